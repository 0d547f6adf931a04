"""
CLI entry point for the experiments.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from sqlalchemy.exc import SQLAlchemyError

from ..db import resolve_db_path
from ..models import ExperimentConfig
from ..neural import TrainingDiverged
from ..runs import complete_run, fail_run, open_run
from ..settings import (
    config_from_dict,
    config_to_toml,
    derive_seeds,
    preset_config,
    read_config_file,
    save_config,
    sweep_config,
    validate_config,
)
from .runner import eval_checkpoint, run_complexity, run_convergence, run_rate_vs_elements

log = logging.getLogger(__name__)

COMMANDS = ("convergence", "rate-sweep", "complexity", "eval-checkpoint", "init-config")
SWEEP_COMMANDS = ("rate-sweep", "complexity")


def _n_list(value: str) -> list[int]:
    try:
        sizes = [int(item) for item in value.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"Invalid N list {value!r}") from exc
    if not sizes:
        raise argparse.ArgumentTypeError("N list is empty")
    return sizes


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="TOML config overlaid on the preset")
    parser.add_argument("--seed", type=int, help="Master seed (overrides run.seed)")
    parser.add_argument("--out", type=Path, help="Output directory (overrides run.output_dir)")
    parser.add_argument(
        "--full-scale", "--paper-scale", dest="full_scale", action="store_true",
        help="Start from the full-size scenario",
    )
    parser.add_argument("--log-level", default="INFO")


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Long-term-CSI RIS precoding experiments")
    commands = parser.add_subparsers(dest="command", required=True)

    _add_common(commands.add_parser("convergence", help="Train once and log the learning curves"))
    for name, help_text in (
        ("rate-sweep", "Minimum average user rate versus number of RIS elements"),
        ("complexity", "Solver invocations and wall-clock per scheme versus N"),
    ):
        sweep = commands.add_parser(name, help=help_text)
        _add_common(sweep)
        sweep.add_argument("--n-list", type=_n_list, help="Comma-separated RIS sizes")
        sweep.add_argument("--tau-c", type=int, help="Coherence interval in slots")

    evaluate = commands.add_parser("eval-checkpoint", help="Evaluate a saved actor")
    _add_common(evaluate)
    evaluate.add_argument("--checkpoint", type=Path, required=True)

    init = commands.add_parser("init-config", help="Write the preset config for editing")
    init.add_argument("path", type=Path)
    init.add_argument("--full-scale", "--paper-scale", dest="full_scale", action="store_true")
    init.add_argument("--log-level", default="INFO")
    return parser.parse_args(argv)


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    base = preset_config(args.full_scale)
    file_data = read_config_file(args.config) if args.config else {}
    cfg = config_from_dict(file_data, base) if args.config else base
    if args.command in SWEEP_COMMANDS:
        cfg = sweep_config(cfg, file_data)
    run_updates = {}
    if args.seed is not None:
        run_updates["seed"] = args.seed
    if args.out is not None:
        run_updates["output_dir"] = str(args.out)
    if getattr(args, "n_list", None):
        run_updates["n_list"] = args.n_list
    if run_updates:
        cfg = cfg.model_copy(update={"run": cfg.run.model_copy(update=run_updates)})
    if getattr(args, "tau_c", None) is not None:
        cfg = cfg.model_copy(update={"scenario": cfg.scenario.model_copy(update={"tau_c": args.tau_c})})
    validate_config(cfg)
    return cfg


def dispatch(args: argparse.Namespace, cfg: ExperimentConfig, out_dir: Path, db_path: Path, run_id: int) -> None:
    if args.command == "convergence":
        result = run_convergence(cfg, out_dir)
        log.info("Final evaluation reward %.4f", result.episodes[-1].evaluation_reward)
    elif args.command == "rate-sweep":
        run_rate_vs_elements(cfg, out_dir, cfg.run.n_list, db_path=db_path, run_id=run_id)
    elif args.command == "complexity":
        run_complexity(cfg, out_dir, cfg.run.n_list, db_path=db_path, run_id=run_id)
    elif args.command == "eval-checkpoint":
        eval_checkpoint(cfg, args.checkpoint, out_dir)
    else:
        raise ValueError(f"Unknown command {args.command}")


def main(argv: list[str] | None = None):
    args = parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.INFO))
    if args.command == "init-config":
        path = save_config(args.path, preset_config(args.full_scale))
        log.info("Wrote config to %s", path)
        return

    try:
        cfg = build_config(args)
    except (ValueError, FileNotFoundError) as exc:
        logging.error("%s", exc)
        sys.exit(1)

    out_dir = Path(cfg.run.output_dir).expanduser()
    out_dir.mkdir(parents=True, exist_ok=True)
    db_path = resolve_db_path(out_dir)
    seeds = derive_seeds(cfg.run.seed)
    try:
        run_id = open_run(
            db_path,
            command=args.command,
            seed=seeds.master,
            scenario_seed=seeds.scenario,
            training_seed=seeds.training,
            config_toml=config_to_toml(cfg),
            output_dir=out_dir,
        )
    except SQLAlchemyError as exc:
        logging.error("Could not register the run in %s: %s", db_path, exc)
        sys.exit(1)
    try:
        dispatch(args, cfg, out_dir, db_path, run_id)
    except (ValueError, FileNotFoundError, TrainingDiverged) as exc:
        logging.error("%s", exc)
        fail_run(db_path, run_id, exc)
        sys.exit(1)
    except KeyboardInterrupt:
        fail_run(db_path, run_id, "interrupted")
        sys.exit(130)
    complete_run(db_path, run_id)
    log.info("Run %s finished; outputs in %s", run_id, out_dir)


if __name__ == "__main__":
    main()
