from collections import defaultdict
from typing import NamedTuple

from pydantic import ConfigDict
from sqlmodel import SQLModel, Field

from .instance import Instance


class UnitRef(NamedTuple):
    """一个需求单位：作业 k 的第 j 个 flow 的第 c 份拷贝"""
    job: int
    flow: int
    copy: int


class Schedule:
    """
    把每个需求单位分配到一个整数时隙（从 1 开始）。
    completion / objective 在构造时给定，validate_schedule 会独立重算并比较
    """

    def __init__(
            self,
            slot_of: dict[UnitRef, int],
            completion: list[int],
            objective: float,
            duplicates: list[UnitRef] | None = None,
    ):
        self.slot_of = dict(slot_of)
        self.completion = list(completion)
        self.objective = objective
        self.duplicates = list(duplicates or [])
        """从文件载入时被重复列出的单位，校验时会报告"""

    @classmethod
    def build(cls, inst: Instance, slot_of: dict[UnitRef, int]) -> "Schedule":
        completion = completion_times(inst, slot_of)
        objective = sum(c.weight * completion[k] for k, c in enumerate(inst.coflows))
        return cls(slot_of, completion, objective)

    @property
    def by_slot(self) -> dict[int, list[UnitRef]]:
        slots: dict[int, list[UnitRef]] = defaultdict(list)
        for unit, t in sorted(self.slot_of.items(), key=lambda item: (item[1], item[0])):
            slots[t].append(unit)
        return dict(slots)

    @property
    def horizon_used(self) -> int:
        return max(self.slot_of.values(), default=0)

    def to_document(self) -> "ScheduleDocument":
        return ScheduleDocument(
            slots=[
                SlotEntry(t=t, units=[UnitEntry(job=u.job, flow=u.flow, copy_index=u.copy) for u in units])
                for t, units in sorted(self.by_slot.items())
            ],
            completion=self.completion,
            objective=self.objective,
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Schedule) and self.slot_of == other.slot_of

    def __repr__(self) -> str:
        return f"Schedule(units={len(self.slot_of)}, horizon={self.horizon_used}, objective={self.objective})"


def completion_times(inst: Instance, slot_of: dict[UnitRef, int]) -> list[int]:
    completion = [0] * inst.n_jobs
    for unit, t in slot_of.items():
        if 0 <= unit.job < inst.n_jobs:
            completion[unit.job] = max(completion[unit.job], t)
    return completion


class UnitEntry(SQLModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    job: int
    flow: int
    copy_index: int = Field(alias="copy")
    """导出文件里的键名是 copy"""


class SlotEntry(SQLModel):
    model_config = ConfigDict(extra="forbid")

    t: int
    units: list[UnitEntry] = Field(default_factory=list)


class ScheduleDocument(SQLModel):
    """调度导出格式"""
    model_config = ConfigDict(extra="forbid")

    slots: list[SlotEntry]
    completion: list[int]
    objective: float

    def to_schedule(self) -> Schedule:
        slot_of: dict[UnitRef, int] = {}
        duplicates: list[UnitRef] = []
        for entry in self.slots:
            for u in entry.units:
                ref = UnitRef(u.job, u.flow, u.copy_index)
                if ref in slot_of:
                    duplicates.append(ref)
                slot_of[ref] = entry.t
        return Schedule(slot_of, self.completion, self.objective, duplicates)
