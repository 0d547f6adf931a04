"""
Module entry point delegating to the experiments CLI.
"""

from __future__ import annotations

import sys

from .experiments.main import COMMANDS


def main():
    if len(sys.argv) < 2:
        print(f"Usage: python -m risdrl [{'|'.join(COMMANDS)}] [options...]")
        sys.exit(1)
    command = sys.argv[1]
    if command not in COMMANDS:
        print(f"Unknown command: {command}")
        sys.exit(1)
    from .experiments.main import main as experiments_main

    experiments_main(sys.argv[1:])


if __name__ == "__main__":
    main()
