"""
小实例上的参照解：精确最优调度（分支定界）、精确色数、贪心列表调度
"""
import math
from collections import Counter

import networkx as nx
import numpy as np
from loguru import logger
from pydantic import ConfigDict
from sqlmodel import SQLModel

from config import config
from models.instance import Instance
from models.schedule import Schedule, UnitRef
from utils.exceptions import CapExceeded

OBJECTIVE_EPS = 1e-9


class OracleResult(SQLModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    objective: float
    schedule: Schedule
    nodes_explored: int
    proven_optimal: bool


def greedy_baseline(inst: Instance) -> Schedule:
    """
    列表调度：单位按 (释放时间, 权重降序, 作业, flow, 拷贝) 排序，
    逐个放到释放之后第一个各有限容量节点都还有余量的时隙
    """
    capacity = inst.capacity_map()
    units = []
    for k, j, flow in inst.iter_flows():
        coflow = inst.coflows[k]
        finite = [v for v in flow.path if capacity[v] is not None]
        for c in range(flow.demand):
            units.append(((coflow.release, -coflow.weight, k, j, c), finite))
    units.sort(key=lambda item: item[0])

    occupancy: Counter = Counter()
    slot_of: dict[UnitRef, int] = {}
    for (release, _, k, j, c), finite in units:
        t = release + 1
        while any(occupancy[(t, v)] >= capacity[v] for v in finite):
            t += 1
        for v in finite:
            occupancy[(t, v)] += 1
        slot_of[UnitRef(k, j, c)] = t
    return Schedule.build(inst, slot_of)


class _Search:
    """
    按时隙顺序的深度优先搜索。状态是每个 flow 剩余的单位数；
    每个时隙只枚举极大可行集合：若某个时隙还能再放入一个已释放单位，
    把该单位从它之后的时隙提前到这里不会增加任何完成时间，也不占用之后的容量，
    所以存在每个时隙都是极大集合的最优调度
    """

    def __init__(self, inst: Instance, horizon: int):
        self.inst = inst
        self.horizon = horizon
        capacity = inst.capacity_map()
        self.finite_caps = {v: u for v, u in capacity.items() if u is not None}
        self.flows = []
        for k, j, flow in inst.iter_flows():
            self.flows.append((k, j, tuple(v for v in flow.path if v in self.finite_caps), flow.demand))
        self.flows_of_job = [[f for f, item in enumerate(self.flows) if item[0] == k] for k in range(inst.n_jobs)]
        self.weights = [c.weight for c in inst.coflows]
        self.releases = [c.release for c in inst.coflows]

        self.best_objective = math.inf
        self.best_plan: list[tuple[int, ...]] = []
        self.nodes_explored = 0

    def lower_bound(self, t: int, remaining: tuple[int, ...], cost: float) -> float:
        """未完成作业 k 的完成时间 ≥ max(t - 1, r_k) + max(1, ⌈max_v 剩余负载 / u(v)⌉)"""
        bound = cost
        for k, flow_ids in enumerate(self.flows_of_job):
            load: Counter = Counter()
            left = 0
            for f in flow_ids:
                left += remaining[f]
                for v in self.flows[f][2]:
                    load[v] += remaining[f]
            if left == 0:
                continue
            span = max([1] + [-(-amount // self.finite_caps[v]) for v, amount in load.items()])
            bound += self.weights[k] * (max(t - 1, self.releases[k]) + span)
        return bound

    def maximal_sets(self, t: int, remaining: tuple[int, ...]) -> list[tuple[int, ...]]:
        """所有极大可行的本时隙选取（每个 flow 放入的单位数），放得多的排在前面"""
        candidates = [f for f, (k, _, _, _) in enumerate(self.flows) if remaining[f] and self.releases[k] < t]
        results: list[tuple[int, ...]] = []
        counts = [0] * len(self.flows)
        residual = dict(self.finite_caps)

        def fits(f: int) -> bool:
            return all(residual[v] > 0 for v in self.flows[f][2])

        def extend(idx: int) -> None:
            if idx == len(candidates):
                if all(counts[f] == remaining[f] or not fits(f) for f in candidates):
                    results.append(tuple(counts))
                return
            f = candidates[idx]
            nodes = self.flows[f][2]
            most = min([remaining[f]] + [residual[v] for v in nodes])
            for amount in range(most, -1, -1):
                counts[f] = amount
                for v in nodes:
                    residual[v] -= amount
                extend(idx + 1)
                for v in nodes:
                    residual[v] += amount
            counts[f] = 0

        extend(0)
        return results

    def run(self, t: int, remaining: tuple[int, ...], cost: float, plan: list[tuple[int, ...]]) -> None:
        self.nodes_explored += 1
        if not any(remaining):
            if cost < self.best_objective - OBJECTIVE_EPS:
                self.best_objective = cost
                self.best_plan = list(plan)
            return
        if t > self.horizon:
            return
        if self.lower_bound(t, remaining, cost) >= self.best_objective - OBJECTIVE_EPS:
            return

        choices = self.maximal_sets(t, remaining)
        if not choices:
            self.run(t + 1, remaining, cost, plan + [tuple([0] * len(self.flows))])
            return

        for chosen in choices:
            after = tuple(r - x for r, x in zip(remaining, chosen))
            finished = 0.0
            for k, flow_ids in enumerate(self.flows_of_job):
                if any(chosen[f] for f in flow_ids) and not any(after[f] for f in flow_ids):
                    finished += self.weights[k] * t
            self.run(t + 1, after, cost + finished, plan + [chosen])

    def plan_to_slots(self, plan: list[tuple[int, ...]]) -> dict[UnitRef, int]:
        slot_of: dict[UnitRef, int] = {}
        next_copy = [0] * len(self.flows)
        for t, chosen in enumerate(plan, start=1):
            for f, amount in enumerate(chosen):
                k, j, _, _ = self.flows[f]
                for _ in range(amount):
                    slot_of[UnitRef(k, j, next_copy[f])] = t
                    next_copy[f] += 1
        return slot_of


def exact_optimum(inst: Instance, unit_cap: int | None = None, horizon_cap: int | None = None) -> OracleResult:
    """
    分支定界求精确最优调度，初始上界取贪心列表调度

    异常:
        CapExceeded: 需求单位数或时间范围超过上限
    """
    unit_cap = config.oracle_unit_cap if unit_cap is None else unit_cap
    horizon_cap = config.oracle_horizon_cap if horizon_cap is None else horizon_cap

    total = inst.total_units()
    if total > unit_cap:
        raise CapExceeded(f"需求单位数 {total} 超过精确求解上限 {unit_cap}")
    horizon = total + max((c.release for c in inst.coflows), default=0)
    if horizon > horizon_cap:
        raise CapExceeded(f"时间范围 {horizon} 超过精确求解上限 {horizon_cap}")

    greedy = greedy_baseline(inst)
    search = _Search(inst, horizon)
    search.best_objective = greedy.objective

    start = tuple(item[3] for item in search.flows)
    search.run(1, start, 0.0, [])

    schedule = Schedule.build(inst, search.plan_to_slots(search.best_plan)) if search.best_plan else greedy
    logger.debug(f"精确求解: 最优值 {schedule.objective}, 搜索节点 {search.nodes_explored}")
    return OracleResult(
        objective=schedule.objective,
        schedule=schedule,
        nodes_explored=search.nodes_explored,
        proven_optimal=True,
    )


def chromatic_number(g: nx.Graph, vertex_cap: int | None = None) -> int:
    """
    逐步增大颜色数 k，回溯检查 k 着色是否存在。
    顶点按度数降序着色，新顶点最多只用到已用颜色数 + 1 的颜色（去掉颜色置换的对称）

    异常:
        CapExceeded: 顶点数超过上限
    """
    vertex_cap = config.chromatic_vertex_cap if vertex_cap is None else vertex_cap
    n = g.number_of_nodes()
    if n > vertex_cap:
        raise CapExceeded(f"顶点数 {n} 超过色数计算上限 {vertex_cap}")
    if n == 0:
        return 0

    vertices = sorted(g.nodes(), key=lambda x: (-g.degree(x), str(x)))
    adjacency = nx.to_numpy_array(g, nodelist=vertices, dtype=np.int8)

    def colorable(k: int) -> bool:
        colors = np.full(n, -1, dtype=np.int16)

        def assign(vertex: int, used: int) -> bool:
            if vertex == n:
                return True
            occupied = set(colors[np.flatnonzero(adjacency[vertex])].tolist())
            for color in range(min(k, used + 1)):
                if color in occupied:
                    continue
                colors[vertex] = color
                if assign(vertex + 1, max(used, color + 1)):
                    return True
            colors[vertex] = -1
            return False

        return assign(0, 0)

    for k in range(1, n + 1):
        if colorable(k):
            return k
    return n
