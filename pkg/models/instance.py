import math
from collections import defaultdict
from typing import Iterator, Literal

from pydantic import ConfigDict
from sqlmodel import SQLModel, Field

UNBOUNDED = "unbounded"

NodeCapacity = int | Literal["unbounded"]
"""正整数容量，或者表示无限容量的 "unbounded" """


class NodeSpec(SQLModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    capacity: NodeCapacity = 1

    @property
    def is_finite(self) -> bool:
        return self.capacity != UNBOUNDED


class Flow(SQLModel):
    """沿给定节点路径发送 demand 个单位的数据"""
    model_config = ConfigDict(extra="forbid")

    path: list[str]
    demand: int = 1


class Coflow(SQLModel):
    """一个 coflow（作业），其完成时间是所有 flow 完成时间的最大值"""
    model_config = ConfigDict(extra="forbid")

    weight: float = 1.0
    release: int = 0
    flows: list[Flow]


class Violation(SQLModel):
    code: str
    """稳定的机器可读代码，比如 path_not_simple"""

    message: str
    coflow: int | None = None
    flow: int | None = None
    node: str | None = None


class ValidationReport(SQLModel):
    ok: bool
    violations: list[Violation] = Field(default_factory=list)


class LoadTable:
    """
    L_i^(k)：作业 k 经过节点 i 的所有 flow 的需求之和。
    不存在的条目按 0 读取
    """

    def __init__(self, entries: dict[tuple[str, int], int], n_jobs: int):
        self.entries = entries
        self.n_jobs = n_jobs

    def get(self, node: str, job: int) -> int:
        return self.entries.get((node, job), 0)

    def __getitem__(self, key: tuple[str, int]) -> int:
        return self.entries.get(key, 0)

    def machines(self) -> list[str]:
        return sorted({node for node, _ in self.entries})

    def job_loads(self, node: str) -> list[int]:
        """节点 node 上按作业编号排列的负载向量"""
        return [self.get(node, k) for k in range(self.n_jobs)]

    def max_job_load(self, job: int) -> int:
        """L^(k) = max_i L_i^(k)"""
        return max((v for (_, k), v in self.entries.items() if k == job), default=0)


class Instance(SQLModel):
    """
    PCS 实例。节点用 id 标识，flow 的路径就是节点序列，
    多重图的边集合不存储（可行性只取决于节点占用）
    """
    model_config = ConfigDict(extra="forbid")

    name: str | None = None
    seed: int | None = None
    nodes: list[NodeSpec]
    coflows: list[Coflow]

    def capacity_map(self) -> dict[str, int | None]:
        """节点 id -> 容量，None 表示无限容量"""
        return {n.id: (None if n.capacity == UNBOUNDED else int(n.capacity)) for n in self.nodes}

    def finite_nodes(self) -> set[str]:
        return {n.id for n in self.nodes if n.is_finite}

    def iter_flows(self) -> Iterator[tuple[int, int, Flow]]:
        for k, coflow in enumerate(self.coflows):
            for j, flow in enumerate(coflow.flows):
                yield k, j, flow

    def total_units(self) -> int:
        return sum(flow.demand for _, _, flow in self.iter_flows())

    @property
    def n_jobs(self) -> int:
        return len(self.coflows)

    def validate_instance(self) -> ValidationReport:
        return validate(self)

    def loads(self) -> LoadTable:
        return loads(self)

    def path_lambda(self) -> tuple[int, int]:
        return path_lambda(self)


def validate(inst: Instance) -> ValidationReport:
    """检查所有类型不变量；不抛异常，违反项写在报告里"""
    violations: list[Violation] = []
    seen: set[str] = set()
    for node in inst.nodes:
        if node.id in seen:
            violations.append(Violation(code="duplicate_node", message=f"节点 {node.id} 重复定义", node=node.id))
        seen.add(node.id)
        if node.is_finite and (isinstance(node.capacity, bool) or int(node.capacity) < 1):
            violations.append(Violation(
                code="capacity_not_positive",
                message=f"节点 {node.id} 的容量必须 ≥ 1 或为 unbounded",
                node=node.id,
            ))

    if not inst.coflows:
        violations.append(Violation(code="no_coflows", message="实例至少需要一个 coflow"))

    for k, coflow in enumerate(inst.coflows):
        if not math.isfinite(coflow.weight) or coflow.weight < 0:
            violations.append(Violation(code="weight_negative", message=f"coflow {k} 的权重必须 ≥ 0", coflow=k))
        if coflow.release < 0:
            violations.append(Violation(code="release_negative", message=f"coflow {k} 的释放时间必须 ≥ 0", coflow=k))
        if not coflow.flows:
            violations.append(Violation(code="no_flows", message=f"coflow {k} 至少需要一个 flow", coflow=k))
        for j, flow in enumerate(coflow.flows):
            if flow.demand < 1:
                violations.append(Violation(
                    code="demand_not_positive",
                    message=f"coflow {k} flow {j}: demand ≥ 1",
                    coflow=k, flow=j,
                ))
            if not flow.path:
                violations.append(Violation(code="path_empty", message=f"coflow {k} flow {j}: 路径为空", coflow=k, flow=j))
                continue
            if len(set(flow.path)) != len(flow.path):
                violations.append(Violation(
                    code="path_not_simple",
                    message=f"coflow {k} flow {j}: path not simple（路径中有重复节点）",
                    coflow=k, flow=j,
                ))
            for node_id in flow.path:
                if node_id not in seen:
                    violations.append(Violation(
                        code="unknown_node",
                        message=f"coflow {k} flow {j}: 节点 {node_id} 不存在",
                        coflow=k, flow=j, node=node_id,
                    ))

    return ValidationReport(ok=not violations, violations=violations)


def loads(inst: Instance) -> LoadTable:
    entries: dict[tuple[str, int], int] = defaultdict(int)
    for k, _, flow in inst.iter_flows():
        for node_id in set(flow.path):
            entries[(node_id, k)] += flow.demand
    return LoadTable(dict(entries), inst.n_jobs)


def path_lambda(inst: Instance) -> tuple[int, int]:
    """(λ, λ_<∞)：最长路径的节点数，以及路径上有限容量节点数的最大值"""
    finite = inst.finite_nodes()
    lam = 0
    lam_finite = 0
    for _, _, flow in inst.iter_flows():
        lam = max(lam, len(flow.path))
        lam_finite = max(lam_finite, sum(1 for v in flow.path if v in finite))
    return lam, lam_finite


# --- 边容量版本，归约时使用 ---

class EdgeSpec(SQLModel):
    model_config = ConfigDict(extra="forbid")

    a: str
    b: str
    capacity: NodeCapacity = 1


class EdgeFlow(SQLModel):
    model_config = ConfigDict(extra="forbid")

    edge_path: list[int]
    """按顺序排列的边下标，必须首尾相连"""

    demand: int = 1


class EdgeCoflow(SQLModel):
    model_config = ConfigDict(extra="forbid")

    weight: float = 1.0
    release: int = 0
    flows: list[EdgeFlow]


class EdgeCapInstance(SQLModel):
    """容量定义在边上的实例"""
    model_config = ConfigDict(extra="forbid")

    name: str | None = None
    seed: int | None = None
    nodes: list[str]
    edges: list[EdgeSpec]
    coflows: list[EdgeCoflow]

    def max_edge_count(self) -> int:
        return max((len(f.edge_path) for c in self.coflows for f in c.flows), default=0)
