"""
调度超图：每个需求单位是一条超边（路径上的节点集合）。
线图只在有限容量节点上建立邻接，按截止时间定向后得到无环有向图，再从中取核
"""
import math
import os
from collections import defaultdict
from fractions import Fraction
from typing import NamedTuple, Iterable

import networkx as nx
from loguru import logger
from sqlmodel import SQLModel, Field

from config import config
from models.instance import Instance
from models.schedule import UnitRef
from utils.exceptions import ExpansionCapExceeded
from utils.log import debug_dump_enabled
from .relaxation import DeadlineSet


class EdgeUnit(NamedTuple):
    unit_id: int
    job: int
    flow: int
    copy: int
    nodes: frozenset[str]
    """路径上的全部节点，用于容量核算"""

    finite_nodes: frozenset[str]
    """路径上容量有限的节点，用于线图邻接"""

    release: int
    deadline: float
    rank: int

    @property
    def ref(self) -> UnitRef:
        return UnitRef(self.job, self.flow, self.copy)


class Hypergraph:
    """单位按 (作业名次, flow, 拷贝) 排列，截止时间沿此顺序非降，unit_id 就是位置"""

    def __init__(self, inst: Instance, units: list[EdgeUnit], lam: int, lam_finite: int):
        self.inst = inst
        self.units = units
        self.capacities = inst.capacity_map()
        self.lam = lam
        self.lam_finite = lam_finite

    @property
    def total_units(self) -> int:
        return len(self.units)

    @property
    def lam_eff(self) -> int:
        """各个界里使用的 λ：路径上有限容量节点数的最大值，至少为 1"""
        return max(1, self.lam_finite)

    def unit_by_ref(self) -> dict[UnitRef, int]:
        return {e.ref: e.unit_id for e in self.units}

    def avg_capacity(self, e: EdgeUnit) -> float:
        return avg_capacity(e.finite_nodes, self.capacities)

    def capacity_disparity(self, e: EdgeUnit) -> int:
        return capacity_disparity(e.finite_nodes, self.capacities)

    def __repr__(self) -> str:
        return f"Hypergraph(units={self.total_units}, lambda={self.lam}, lambda_finite={self.lam_finite})"


def avg_capacity(finite_nodes: Iterable[str], capacities: dict[str, int | None]) -> float:
    """有限容量节点的平均容量；没有有限节点时为 1"""
    caps = [capacities[v] for v in finite_nodes]
    if not caps:
        return 1.0
    return sum(caps) / len(caps)


def capacity_disparity(finite_nodes: Iterable[str], capacities: dict[str, int | None]) -> int:
    """Δ(e) = ⌈avg(e) / min u(v)⌉，只看有限容量节点；没有有限节点时为 1"""
    caps = [capacities[v] for v in finite_nodes]
    if not caps:
        return 1
    return math.ceil(Fraction(sum(caps), len(caps) * min(caps)))


def build_hypergraph(inst: Instance, dl: DeadlineSet, expansion_cap: int | None = None) -> Hypergraph:
    """
    每个 flow 的每个需求单位展开成一条超边，继承作业的释放时间和截止时间

    异常:
        ExpansionCapExceeded: 单位总数超过上限
    """
    expansion_cap = config.expansion_cap if expansion_cap is None else expansion_cap
    if len(dl.d) != inst.n_jobs:
        raise ValueError(f"截止时间个数 {len(dl.d)} 与作业数 {inst.n_jobs} 不一致")

    total = inst.total_units()
    if total > expansion_cap:
        raise ExpansionCapExceeded(f"需求单位总数 {total} 超过展开上限 {expansion_cap}")

    ranks = dl.rank_of()
    finite = inst.finite_nodes()
    raw = []
    for k, j, flow in inst.iter_flows():
        nodes = frozenset(flow.path)
        finite_nodes = frozenset(v for v in flow.path if v in finite)
        for c in range(flow.demand):
            raw.append((ranks[k], j, c, k, nodes, finite_nodes))
    raw.sort(key=lambda item: item[:3])

    units = [
        EdgeUnit(
            unit_id=idx, job=k, flow=j, copy=c, nodes=nodes, finite_nodes=finite_nodes,
            release=inst.coflows[k].release, deadline=dl.d[k], rank=rank,
        )
        for idx, (rank, j, c, k, nodes, finite_nodes) in enumerate(raw)
    ]
    lam, lam_finite = inst.path_lambda()
    logger.debug(f"超图: {len(units)} 个单位, λ = {lam}, λ_<∞ = {lam_finite}")
    return Hypergraph(inst, units, lam, lam_finite)


class LineAdjacency:
    """线图：两个单位相邻当且仅当它们有公共的有限容量节点；shared 记录公共节点"""

    def __init__(self, n_units: int, shared: dict[tuple[int, int], frozenset[str]]):
        self.n_units = n_units
        self.shared = shared
        self.neighbors: list[list[int]] = [[] for _ in range(n_units)]
        for a, b in sorted(shared):
            self.neighbors[a].append(b)
            self.neighbors[b].append(a)

    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self.shared)

    def adjacent(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.shared

    def shared_nodes(self, a: int, b: int) -> frozenset[str]:
        return self.shared.get((min(a, b), max(a, b)), frozenset())

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_units))
        g.add_edges_from(self.shared)
        return g


def build_line_adjacency(h: Hypergraph) -> LineAdjacency:
    """按节点建倒排表，每个节点上的单位两两相邻"""
    by_node: dict[str, list[int]] = defaultdict(list)
    for e in h.units:
        for v in e.finite_nodes:
            by_node[v].append(e.unit_id)

    shared: dict[tuple[int, int], set[str]] = defaultdict(set)
    for v, ids in by_node.items():
        ids.sort()
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                shared[(a, b)].add(v)
    return LineAdjacency(h.total_units, {pair: frozenset(nodes) for pair, nodes in shared.items()})


class Orientation:
    """out_adj[a] 中的 b 表示弧 a -> b"""

    def __init__(self, out_adj: list[list[int]]):
        self.out_adj = [sorted(succ) for succ in out_adj]
        self.in_adj: list[list[int]] = [[] for _ in out_adj]
        for a, succ in enumerate(self.out_adj):
            for b in succ:
                self.in_adj[b].append(a)

    @classmethod
    def from_arcs(cls, n_units: int, arcs: Iterable[tuple[int, int]]) -> "Orientation":
        out_adj: list[list[int]] = [[] for _ in range(n_units)]
        for a, b in arcs:
            out_adj[a].append(b)
        return cls(out_adj)

    @property
    def n_units(self) -> int:
        return len(self.out_adj)

    @property
    def in_deg(self) -> list[int]:
        return [len(pred) for pred in self.in_adj]

    @property
    def out_deg(self) -> list[int]:
        return [len(succ) for succ in self.out_adj]

    def arcs(self) -> list[tuple[int, int]]:
        return [(a, b) for a, succ in enumerate(self.out_adj) for b in succ]

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.n_units))
        g.add_edges_from(self.arcs())
        return g

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.to_networkx())

    def to_text(self) -> str:
        return "".join(f"{a} {b}\n" for a, b in self.arcs())

    def dump(self, path: str | os.PathLike) -> None:
        """以文本边表的形式导出，每行一条弧 "a b"（a -> b）"""
        nx.write_edgelist(self.to_networkx(), path, data=False)


def orient(h: Hypergraph, adj: LineAdjacency) -> Orientation:
    """每条线图边从排在后面的单位指向排在前面的单位"""
    out_adj: list[list[int]] = [[] for _ in range(h.total_units)]
    for a, b in adj.pairs():
        out_adj[b].append(a)
    o = Orientation(out_adj)
    if debug_dump_enabled():
        logger.debug(f"线图定向（{len(adj.shared)} 条弧）:\n{o.to_text()}")
    return o


def find_kernel(o: Orientation, active: Iterable[int] | None = None) -> frozenset[int]:
    """
    在 o 限制到 active 的子图上求核：反复取出度为 0 的单位放入核，
    删去它们以及指向它们的单位，直到子图为空。按单位编号升序处理，结果确定

    异常:
        ValueError: 子图中有环
    """
    active = set(range(o.n_units)) if active is None else set(active)
    out_count = {v: sum(1 for w in o.out_adj[v] if w in active) for v in active}
    frontier = sorted(v for v, count in out_count.items() if count == 0)

    kernel: set[int] = set()
    removed: set[int] = set()
    while frontier:
        kernel.update(frontier)
        removed.update(frontier)
        dominated = []
        for v in frontier:
            for w in o.in_adj[v]:
                if w in active and w not in removed:
                    removed.add(w)
                    dominated.append(w)

        released = []
        for v in frontier + dominated:
            for p in o.in_adj[v]:
                if p in active and p not in removed:
                    out_count[p] -= 1
                    if out_count[p] == 0:
                        released.append(p)
        frontier = sorted(released)

    if len(removed) != len(active):
        raise ValueError(f"有向图中存在环，{len(active) - len(removed)} 个单位无法处理")
    return frozenset(kernel)


class OutdegreeViolation(SQLModel):
    unit_id: int
    out_degree: int
    bound: float


class OutdegreeReport(SQLModel):
    ok: bool
    max_out_degree: int = 0
    violations: list[OutdegreeViolation] = Field(default_factory=list)


def check_outdegree_bound(
        o: Orientation,
        h: Hypergraph,
        capacities: dict[str, int | None] | None = None,
        tol: float | None = None,
) -> OutdegreeReport:
    """
    检查每个单位的出度 ≤ λ (D_e · avg(e) - 1)；单位容量时 avg(e) = 1，即 λ (D_e - 1)。
    avg(e) 只对有限容量节点取平均
    """
    tol = config.check_tol if tol is None else tol
    capacities = h.capacities if capacities is None else capacities
    lam = h.lam_eff
    violations = []
    out_deg = o.out_deg
    for e in h.units:
        bound = lam * (e.deadline * avg_capacity(e.finite_nodes, capacities) - 1)
        if out_deg[e.unit_id] > bound + tol:
            violations.append(OutdegreeViolation(unit_id=e.unit_id, out_degree=out_deg[e.unit_id], bound=bound))
    return OutdegreeReport(ok=not violations, max_out_degree=max(out_deg, default=0), violations=violations)
