"""
Run registry helpers.
"""

from __future__ import annotations

import logging
from datetime import datetime, timezone
from pathlib import Path

from sqlmodel import select

from .db import session_scope
from .models import Run, RunStatus, SweepPoint

log = logging.getLogger(__name__)


def open_run(
    db_path: Path,
    *,
    command: str,
    seed: int,
    scenario_seed: int,
    training_seed: int,
    config_toml: str,
    output_dir: Path,
) -> int:
    with session_scope(db_path) as session:
        run = Run(
            command=command,
            status=RunStatus.RUNNING,
            seed=seed,
            scenario_seed=scenario_seed,
            training_seed=training_seed,
            config_toml=config_toml,
            output_dir=str(output_dir),
        )
        session.add(run)
        session.commit()
        session.refresh(run)
        log.info("Registered run %s (%s) in %s", run.id, command, db_path)
        return run.id


def _finish(db_path: Path, run_id: int, status: str, error_message: str | None = None) -> Run:
    with session_scope(db_path) as session:
        run = session.get(Run, run_id)
        if run is None:
            raise ValueError(f"Unknown run {run_id}")
        run.status = status
        run.finished_at = datetime.now(timezone.utc)
        run.error_message = error_message
        session.add(run)
        session.commit()
        session.refresh(run)
        return run


def complete_run(db_path: Path, run_id: int) -> Run:
    return _finish(db_path, run_id, RunStatus.SUCCEEDED)


def fail_run(db_path: Path, run_id: int, error: BaseException | str) -> Run:
    return _finish(db_path, run_id, RunStatus.FAILED, str(error))


def record_sweep_point(db_path: Path, run_id: int, **fields) -> SweepPoint:
    with session_scope(db_path) as session:
        point = SweepPoint(run_id=run_id, **fields)
        session.add(point)
        session.commit()
        session.refresh(point)
        return point


def list_runs(db_path: Path) -> list[Run]:
    with session_scope(db_path) as session:
        return session.exec(select(Run).order_by(Run.started_at)).all()


def sweep_points(db_path: Path, run_id: int) -> list[SweepPoint]:
    with session_scope(db_path) as session:
        return session.exec(
            select(SweepPoint).where(SweepPoint.run_id == run_id).order_by(SweepPoint.N)
        ).all()
