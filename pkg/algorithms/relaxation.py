"""
完成时间下界的线性规划松弛：单作业约束作为基础约束，子集约束用割平面按需加入；
由 LP 最优解得到各作业的截止时间
"""
from enum import Enum
from fractions import Fraction

import numpy as np
from loguru import logger
from sqlmodel import SQLModel, Field

from config import config
from models.instance import Instance, LoadTable, loads
from utils.exceptions import PcsError, BipartiteModeError, RelaxationIterationError
from .lp_core import LinearProgram, LpConstraint, LpStatus, solve_lp

ORDER_DIGITS = 9
"""排序时比较 C 值保留的小数位，差别小于此精度的视为并列，按作业编号排"""


class RelaxationMode(str, Enum):
    GENERAL = "general"
    BIPARTITE = "bipartite"


class DeadlineMode(str, Enum):
    STANDARD = "standard"
    IMPROVED = "improved"


class CutRecord(SQLModel):
    """机器 machine 上、按当前 C 值排序后前 prefix_len 个作业构成的子集约束"""
    machine: str
    prefix_len: int
    jobs: list[int]
    job_loads: list[int]
    lhs: float
    """生成时的左端值 Σ L_i^(k) C_k"""

    rhs: float
    """f_i(S) / u(i)"""

    @property
    def violation(self) -> float:
        return self.rhs - self.lhs

    def as_constraint(self, n_jobs: int) -> LpConstraint:
        coefficients = [0.0] * n_jobs
        for k, load in zip(self.jobs, self.job_loads):
            coefficients[k] = float(load)
        return LpConstraint(coefficients=coefficients, rhs=self.rhs)


class LpSolution(SQLModel):
    mode: RelaxationMode = RelaxationMode.GENERAL
    c_star: list[float]
    order: list[int]
    """按 C* 非降排列的作业编号，并列时编号小的在前"""

    lp_objective: float
    cuts_added: int = 0
    iterations: int = 0
    cuts: list[CutRecord] = Field(default_factory=list)

    def rank_of(self) -> list[int]:
        """作业编号 -> 从 1 开始的名次"""
        ranks = [0] * len(self.order)
        for position, k in enumerate(self.order, start=1):
            ranks[k] = position
        return ranks


class DeadlineSet(SQLModel):
    mode: DeadlineMode
    d: list[float]
    order: list[int]
    """作业的名次顺序（与截止时间非降的顺序一致），超图中单位的排列以此为准"""

    @classmethod
    def from_values(cls, d: list[float], mode: DeadlineMode = DeadlineMode.STANDARD) -> "DeadlineSet":
        """直接给定截止时间（测试和手工实例用），名次按 (D, 编号) 排"""
        return cls(mode=mode, d=list(d), order=job_order(d))

    def rank_of(self) -> list[int]:
        ranks = [0] * len(self.order)
        for position, k in enumerate(self.order, start=1):
            ranks[k] = position
        return ranks

    def as_fractions(self) -> list[Fraction]:
        """仅用于报告：把浮点截止时间还原成分母不超过 10^6 的有理数"""
        return [Fraction(v).limit_denominator(10 ** 6) for v in self.d]


class PrefixViolation(SQLModel):
    kind: str
    """half / sharpened / deadline"""

    machine: str
    job: int
    rank: int
    value: float
    bound: float


class PrefixBoundReport(SQLModel):
    ok: bool
    checked: int = 0
    violations: list[PrefixViolation] = Field(default_factory=list)


def job_order(values: list[float]) -> list[int]:
    return sorted(range(len(values)), key=lambda k: (round(values[k], ORDER_DIGITS), k))


def build_base_constraints(inst: Instance, machine_loads: LoadTable | None = None) -> list[LpConstraint]:
    """
    每个作业 k：C_k ≥ r_k + 1；
    每个 (k, i)，i 容量有限且 L_i^(k) > 0：C_k ≥ r_k + L_i^(k) / u(i)。
    无限容量节点不产生约束
    """
    machine_loads = machine_loads or loads(inst)
    capacity = inst.capacity_map()
    n = inst.n_jobs
    constraints = []
    for k, coflow in enumerate(inst.coflows):
        unit = [0.0] * n
        unit[k] = 1.0
        constraints.append(LpConstraint(coefficients=unit, rhs=float(coflow.release + 1)))
        for node_id in sorted(capacity):
            u = capacity[node_id]
            load = machine_loads.get(node_id, k)
            if u is None or load == 0:
                continue
            constraints.append(LpConstraint(coefficients=list(unit), rhs=coflow.release + load / u))
    return constraints


def separate(
        inst: Instance,
        c: list[float],
        tol: float | None = None,
        machine_loads: LoadTable | None = None,
) -> list[CutRecord]:
    """
    分离子集约束：每台有限容量机器上，把 L_i^(k) > 0 的作业按当前 C 值排序，
    检查所有前缀集合，返回违反量最大的那一条（违反量需超过 tol * max(1, |rhs|)）
    """
    tol = config.separation_tol if tol is None else tol
    machine_loads = machine_loads or loads(inst)
    capacity = inst.capacity_map()
    order = job_order(c)

    cuts = []
    for node_id in sorted(capacity):
        u = capacity[node_id]
        if u is None:
            continue
        jobs = [k for k in order if machine_loads.get(node_id, k) > 0]
        if not jobs:
            continue

        best: CutRecord | None = None
        sum_load = sum_square = 0
        lhs = 0.0
        for length, k in enumerate(jobs, start=1):
            load = machine_loads.get(node_id, k)
            sum_load += load
            sum_square += load * load
            lhs += load * c[k]
            rhs = 0.5 * (sum_square + sum_load * sum_load) / u
            violation = rhs - lhs
            if violation > tol * max(1.0, abs(rhs)) and (best is None or violation > best.violation):
                prefix = jobs[:length]
                best = CutRecord(
                    machine=node_id,
                    prefix_len=length,
                    jobs=prefix,
                    job_loads=[machine_loads.get(node_id, j) for j in prefix],
                    lhs=lhs,
                    rhs=rhs,
                )
        if best is not None:
            cuts.append(best)
    return cuts


def bipartite_loads(inst: Instance) -> LoadTable:
    """
    二部模式下的负载：把需求写成 作业 × 输入端口 × 输出端口 的张量，
    输入端口负载是对输出端口求和，输出端口负载是对输入端口求和
    """
    inputs: list[str] = []
    outputs: list[str] = []
    for k, j, flow in inst.iter_flows():
        if len(flow.path) != 2:
            raise BipartiteModeError(f"coflow {k} flow {j}: 二部模式要求路径恰好包含 2 个节点")
        src, dst = flow.path
        if src not in inputs:
            inputs.append(src)
        if dst not in outputs:
            outputs.append(dst)
    if shared := set(inputs) & set(outputs):
        raise BipartiteModeError(f"节点 {', '.join(sorted(shared))} 同时作为输入端口和输出端口")

    in_index = {v: i for i, v in enumerate(inputs)}
    out_index = {v: i for i, v in enumerate(outputs)}
    demand = np.zeros((inst.n_jobs, len(inputs), len(outputs)), dtype=np.int64)
    for k, _, flow in inst.iter_flows():
        demand[k, in_index[flow.path[0]], out_index[flow.path[1]]] += flow.demand

    entries: dict[tuple[str, int], int] = {}
    for ports, axis in ((inputs, 2), (outputs, 1)):
        port_loads = demand.sum(axis=axis)
        for k, p in zip(*np.nonzero(port_loads)):
            entries[(ports[int(p)], int(k))] = int(port_loads[k, p])
    return LoadTable(entries, inst.n_jobs)


def solve_relaxation(
        inst: Instance,
        mode: RelaxationMode = RelaxationMode.GENERAL,
        tol: float | None = None,
        max_rounds: int | None = None,
) -> LpSolution:
    """
    割平面求解 LP 松弛：求解、分离、加割，直到没有违反的子集约束

    异常:
        BipartiteModeError: 二部模式下实例不是二部的
        RelaxationIterationError: 超过最大轮数，partial 为最后一轮的解
    """
    max_rounds = config.cutting_plane_max_rounds if max_rounds is None else max_rounds
    machine_loads = bipartite_loads(inst) if mode == RelaxationMode.BIPARTITE else loads(inst)
    n = inst.n_jobs

    lp = LinearProgram(
        n_vars=n,
        objective=[coflow.weight for coflow in inst.coflows],
        constraints=build_base_constraints(inst, machine_loads),
    )
    cuts: list[CutRecord] = []
    solution: LpSolution | None = None

    for round_no in range(1, max_rounds + 1):
        result = solve_lp(lp)
        if result.status != LpStatus.OPTIMAL:
            raise PcsError(f"LP 松弛第 {round_no} 轮求解结果为 {result.status.value}，不应发生")

        c_star = result.values
        solution = LpSolution(
            mode=mode,
            c_star=c_star,
            order=job_order(c_star),
            lp_objective=result.objective_value,
            cuts_added=len(cuts),
            iterations=round_no,
            cuts=list(cuts),
        )

        new_cuts = separate(inst, c_star, tol=tol, machine_loads=machine_loads)
        if not new_cuts:
            logger.debug(f"割平面在第 {round_no} 轮收敛，共 {len(cuts)} 条割，LP 目标 {result.objective_value:.9g}")
            return solution

        for cut in new_cuts:
            logger.debug(f"第 {round_no} 轮: 机器 {cut.machine} 前 {cut.prefix_len} 个作业的约束违反 {cut.violation:.6g}")
            lp.constraints.append(cut.as_constraint(n))
        cuts.extend(new_cuts)

    raise RelaxationIterationError(f"割平面超过 {max_rounds} 轮仍未收敛", partial=solution)


def deadlines(sol: LpSolution, mode: DeadlineMode = DeadlineMode.STANDARD) -> DeadlineSet:
    """标准：D_k = 2 C*_k；改进：D_k = (2p / (p + 1)) C*_k，p 为作业 k 的名次"""
    if mode == DeadlineMode.STANDARD:
        d = [2.0 * c for c in sol.c_star]
    else:
        ranks = sol.rank_of()
        d = [2.0 * ranks[k] / (ranks[k] + 1) * c for k, c in enumerate(sol.c_star)]
    return DeadlineSet(mode=mode, d=d, order=list(sol.order))


def _prefix_loads(inst: Instance, order: list[int], machine_loads: LoadTable):
    """依次产出 (机器, 容量, 名次, 作业, 前缀负载和)"""
    for node_id, u in sorted(inst.capacity_map().items()):
        if u is None:
            continue
        prefix = 0
        for rank, k in enumerate(order, start=1):
            prefix += machine_loads.get(node_id, k)
            yield node_id, u, rank, k, prefix


def check_lp_prefix_bound(
        inst: Instance,
        sol: LpSolution,
        mode: DeadlineMode = DeadlineMode.IMPROVED,
        tol: float | None = None,
) -> PrefixBoundReport:
    """
    检查 C*_k ≥ Σ_{l≤k} L_i^(l) / (2u(i))；
    mode 为 improved 时还检查更紧的 C*_k ≥ ((p+1)/(2p)) Σ_{l≤k} L_i^(l) / u(i)
    """
    tol = config.check_tol if tol is None else tol
    machine_loads = loads(inst)
    violations = []
    checked = 0
    for node_id, u, rank, k, prefix in _prefix_loads(inst, sol.order, machine_loads):
        bounds = [("half", prefix / (2 * u))]
        if mode == DeadlineMode.IMPROVED:
            bounds.append(("sharpened", (rank + 1) / (2 * rank) * prefix / u))
        for kind, bound in bounds:
            checked += 1
            if sol.c_star[k] < bound - tol * max(1.0, bound):
                violations.append(PrefixViolation(
                    kind=kind, machine=node_id, job=k, rank=rank, value=sol.c_star[k], bound=bound,
                ))
    return PrefixBoundReport(ok=not violations, checked=checked, violations=violations)


def check_deadline_bound(inst: Instance, dl: DeadlineSet, tol: float | None = None) -> PrefixBoundReport:
    """检查 D_k ≥ Σ_{l≤k} L_i^(l) / u(i)（前缀按截止时间的名次顺序）"""
    tol = config.check_tol if tol is None else tol
    machine_loads = loads(inst)
    violations = []
    checked = 0
    for node_id, u, rank, k, prefix in _prefix_loads(inst, dl.order, machine_loads):
        checked += 1
        bound = prefix / u
        if dl.d[k] < bound - tol * max(1.0, bound):
            violations.append(PrefixViolation(
                kind="deadline", machine=node_id, job=k, rank=rank, value=dl.d[k], bound=bound,
            ))
    return PrefixBoundReport(ok=not violations, checked=checked, violations=violations)
