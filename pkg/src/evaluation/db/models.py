from sqlalchemy import ForeignKey, Integer, Text, UniqueConstraint
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, relationship


class Base(DeclarativeBase):
    pass


class EvalRun(Base):
    __tablename__ = "eval_runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    label: Mapped[str] = mapped_column(Text, unique=True, index=True)
    agent: Mapped[str] = mapped_column(Text)
    checkpoint: Mapped[str | None] = mapped_column(Text, nullable=True)

    episodes: Mapped[list["EpisodeRecord"]] = relationship(
        back_populates="run", cascade="all, delete-orphan", order_by="EpisodeRecord.id"
    )


class EpisodeRecord(Base):
    __tablename__ = "episodes"
    __table_args__ = (UniqueConstraint("run_id", "game", "seed"),)

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    run_id: Mapped[int] = mapped_column(
        Integer, ForeignKey("eval_runs.id", ondelete="CASCADE"), index=True
    )
    game: Mapped[str] = mapped_column(Text, index=True)
    seed: Mapped[int] = mapped_column(Integer)
    max_score: Mapped[int] = mapped_column(Integer)
    score: Mapped[int] = mapped_column(Integer)
    length: Mapped[int] = mapped_column(Integer)
    reason: Mapped[str] = mapped_column(Text)
    trajectory: Mapped[str] = mapped_column(Text)

    run: Mapped[EvalRun] = relationship(back_populates="episodes")
