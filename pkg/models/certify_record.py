from sqlmodel import Field, SQLModel, Relationship

from .table_base import TableBase


class CertifyRunBase(SQLModel):
    profile: str = Field(index=True, max_length=50)
    mode: str = Field(max_length=20)
    deadline_mode: str = Field(max_length=20)
    seed_from: int
    seed_to: int
    passed: bool = False
    n_failed: int = 0


class CertifyRun(CertifyRunBase, TableBase, table=True):
    """一次 certify 批量验证"""
    id: int | None = Field(default=None, primary_key=True)

    seeds: list["SeedRecord"] = Relationship(back_populates="run", cascade_delete=True)


class SeedRecordBase(SQLModel):
    seed: int = Field(index=True)
    instance_name: str | None = None
    ok: bool
    lp_objective: float | None = None
    alg_objective: float | None = None
    oracle_objective: float | None = None
    bound_name: str | None = None
    bound_used: float | None = None
    failures: str = ""
    """逗号分隔的失败检查项名称"""


class SeedRecord(SeedRecordBase, TableBase, table=True):
    id: int | None = Field(default=None, primary_key=True)

    run_id: int = Field(foreign_key="certifyrun.id", index=True, ondelete="CASCADE")
    run: CertifyRun | None = Relationship(back_populates="seeds")
