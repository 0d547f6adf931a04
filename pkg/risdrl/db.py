"""
Database utilities for the run registry.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from pathlib import Path

from sqlmodel import Session, SQLModel, create_engine

from .config import DB_ENV_VAR, DB_FILENAME, DEFAULT_OUTPUT_DIR

_engines: dict[Path, object] = {}


def resolve_db_path(output_dir: Path | None = None) -> Path:
    override = os.environ.get(DB_ENV_VAR)
    if override:
        return Path(override).expanduser()
    return Path(output_dir or DEFAULT_OUTPUT_DIR) / DB_FILENAME


def get_engine(db_path: Path | None = None):
    target_path = Path(db_path or resolve_db_path()).expanduser().resolve()
    engine = _engines.get(target_path)
    if engine is None:
        target_path.parent.mkdir(parents=True, exist_ok=True)
        engine = create_engine(f"sqlite:///{target_path}", echo=False, connect_args={"check_same_thread": False})
        _engines[target_path] = engine
    # Always run create_all in case new tables were added since the engine was created.
    SQLModel.metadata.create_all(engine)
    return engine


@contextmanager
def session_scope(db_path: Path | None = None):
    engine = get_engine(db_path)
    with Session(engine) as session:
        yield session
