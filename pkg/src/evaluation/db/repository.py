from __future__ import annotations

from sqlalchemy import delete, select
from sqlalchemy.orm import Session

from ...data import Trajectory
from ..rollout import Episode, TerminationReason
from .models import EpisodeRecord, EvalRun


def _record_to_episode(run: EvalRun, record: EpisodeRecord) -> Episode:
    return Episode(
        agent=run.agent,
        game=record.game,
        seed=record.seed,
        max_score=record.max_score,
        score=record.score,
        length=record.length,
        reason=TerminationReason(record.reason),
        trajectory=Trajectory.model_validate_json(record.trajectory),
    )


def replace_run(
    session: Session, label: str, agent: str, checkpoint: str | None = None
) -> EvalRun:
    """Start a run under ``label``, dropping any earlier run with the same label."""
    existing = session.scalar(select(EvalRun).where(EvalRun.label == label))
    if existing is not None:
        session.execute(delete(EpisodeRecord).where(EpisodeRecord.run_id == existing.id))
        session.delete(existing)
        session.flush()
    run = EvalRun(label=label, agent=agent, checkpoint=checkpoint)
    session.add(run)
    session.commit()
    session.refresh(run)
    return run


def add_episode(session: Session, run: EvalRun, episode: Episode) -> EpisodeRecord:
    record = EpisodeRecord(
        run_id=run.id,
        game=episode.game,
        seed=episode.seed,
        max_score=episode.max_score,
        score=episode.score,
        length=episode.length,
        reason=episode.reason.value,
        trajectory=episode.trajectory.model_dump_json(),
    )
    session.add(record)
    session.commit()
    return record


def list_run_labels(session: Session) -> list[str]:
    return list(session.scalars(select(EvalRun.label).order_by(EvalRun.label)))


def list_episodes(session: Session, label: str) -> list[Episode]:
    run = session.scalar(select(EvalRun).where(EvalRun.label == label))
    if run is None:
        return []
    records = session.scalars(
        select(EpisodeRecord)
        .where(EpisodeRecord.run_id == run.id)
        .order_by(EpisodeRecord.game, EpisodeRecord.seed)
    )
    return [_record_to_episode(run, record) for record in records]
