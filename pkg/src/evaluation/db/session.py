from pathlib import Path

from sqlalchemy import Engine, create_engine
from sqlalchemy.orm import Session, sessionmaker

DATABASE_FILE = "episodes.sqlite"


def create_db_engine(report_dir: Path) -> Engine:
    report_dir.mkdir(parents=True, exist_ok=True)
    return create_engine(f"sqlite:///{report_dir / DATABASE_FILE}", echo=False)


def create_session_factory(engine: Engine) -> sessionmaker[Session]:
    return sessionmaker(engine, expire_on_commit=False)
