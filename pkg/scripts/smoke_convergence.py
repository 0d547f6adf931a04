#!/usr/bin/env python3
"""
Smoke test: a tiny training run completes and keeps the configuration feasible.
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

from risdrl.experiments.runner import run_convergence
from risdrl.settings import desk_scale_config


def main() -> int:
    cfg = desk_scale_config()
    cfg = cfg.model_copy(
        update={
            "scenario": cfg.scenario.model_copy(update={"M": 2, "N": 4, "K": 2, "T": 10}),
            "agent": cfg.agent.model_copy(update={"hidden_layers": [16, 16], "learning_start": 8, "batch_size": 8}),
            "run": cfg.run.model_copy(update={"episodes": 3}),
        }
    )
    violations = []

    def check(record, tx):
        if not (tx.satisfies_power(equality=True) and tx.satisfies_modulus()):
            violations.append((record.episode, record.step))

    with tempfile.TemporaryDirectory() as tmp:
        try:
            result = run_convergence(cfg, Path(tmp), on_step=check)
        except Exception as exc:  # noqa: BLE001
            print(f"[risdrl] Training failed: {exc}", file=sys.stderr)
            return 1
    if violations:
        print(f"[risdrl] Constraint violations at {violations[:5]}", file=sys.stderr)
        return 1
    print(f"[risdrl] Smoke run finished: final evaluation reward {result.episodes[-1].evaluation_reward:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
