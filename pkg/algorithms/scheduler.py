"""
按定向逐时隙取核来调度超边单位：单位容量时每个时隙取一个核，
一般容量时在同一时隙内反复取核直到有节点容量耗尽
"""
import math
from collections import Counter, defaultdict
from enum import Enum

from loguru import logger
from sqlmodel import SQLModel, Field

from config import config
from models.instance import Instance
from models.schedule import Schedule, UnitRef, completion_times
from utils.exceptions import SchedulingDefectError
from .hyper import Hypergraph, Orientation, find_kernel, capacity_disparity
from .relaxation import LpSolution, DeadlineMode

HORIZON_SLACK = 1e-9


class SolveMode(str, Enum):
    UNIT = "unit"
    CAPACITIES = "capacities"
    BIPARTITE = "bipartite"


def _horizon(bound: float) -> int:
    return max(1, math.ceil(bound - HORIZON_SLACK))


def _released(h: Hypergraph, pending: set[int], t: int) -> list[int]:
    return sorted(uid for uid in pending if h.units[uid].release < t)


def schedule_unit_capacity(h: Hypergraph, o: Orientation) -> Schedule:
    """
    t = 1..T，T = ⌈max r_e + λ · max D_e⌉：在已释放、未调度的单位上取一个核，放在时隙 t

    异常:
        ValueError: 存在容量大于 1 的节点
        SchedulingDefectError: 到 T 仍有单位未调度
    """
    if big := sorted(v for v, u in h.capacities.items() if u is not None and u > 1):
        raise ValueError(f"节点 {', '.join(big)} 的容量大于 1，请使用一般容量调度")
    if not h.units:
        return Schedule.build(h.inst, {})

    horizon = _horizon(max(e.release for e in h.units) + h.lam_eff * max(e.deadline for e in h.units))
    pending = set(range(h.total_units))
    slot_of: dict[UnitRef, int] = {}

    for t in range(1, horizon + 1):
        if not pending:
            break
        active = _released(h, pending, t)
        if not active:
            continue
        kernel = find_kernel(o, active)
        for uid in kernel:
            slot_of[h.units[uid].ref] = t
        pending -= kernel
        logger.debug(f"时隙 {t}: {len(active)} 个已释放单位，核大小 {len(kernel)}")

    if pending:
        raise SchedulingDefectError(f"到时隙 {horizon} 仍有 {len(pending)} 个单位未调度")
    return Schedule.build(h.inst, slot_of)


def schedule_general_capacity(
        h: Hypergraph,
        o: Orientation,
        capacities: dict[str, int | None] | None = None,
) -> Schedule:
    """
    每个时隙把剩余容量重置为 u(v)，在已释放且未被饱和节点排除的单位上反复取核；
    放入一个核后扣减其有限容量节点的剩余容量，删去经过饱和节点的单位。
    T = ⌈max r_e + λ · max (D_e Δ(e))⌉

    异常:
        SchedulingDefectError: 到 T 仍有单位未调度
    """
    capacities = h.capacities if capacities is None else capacities
    if not h.units:
        return Schedule.build(h.inst, {})

    horizon = _horizon(
        max(e.release for e in h.units)
        + h.lam_eff * max(e.deadline * capacity_disparity(e.finite_nodes, capacities) for e in h.units)
    )
    finite = {v: u for v, u in capacities.items() if u is not None}
    pending = set(range(h.total_units))
    slot_of: dict[UnitRef, int] = {}

    for t in range(1, horizon + 1):
        if not pending:
            break
        residual = dict(finite)
        working = _released(h, pending, t)
        rounds = 0
        while working:
            kernel = find_kernel(o, working)
            rounds += 1
            saturated = set()
            for uid in kernel:
                e = h.units[uid]
                slot_of[e.ref] = t
                for v in e.finite_nodes:
                    residual[v] -= 1
                    if residual[v] == 0:
                        saturated.add(v)
            pending -= kernel
            working = [uid for uid in working if uid not in kernel and not (h.units[uid].finite_nodes & saturated)]
        if rounds:
            logger.debug(f"时隙 {t}: 取核 {rounds} 次")

    if pending:
        raise SchedulingDefectError(f"到时隙 {horizon} 仍有 {len(pending)} 个单位未调度")
    return Schedule.build(h.inst, slot_of)


class ScheduleViolation(SQLModel):
    code: str
    message: str
    slot: int | None = None
    job: int | None = None
    node: str | None = None


class ScheduleReport(SQLModel):
    ok: bool
    objective: float
    completion: list[int]
    horizon: int
    violations: list[ScheduleViolation] = Field(default_factory=list)


def validate_schedule(inst: Instance, s: Schedule, tol: float | None = None) -> ScheduleReport:
    """
    独立检查一个调度：每个需求单位恰好调度一次、释放时间、每个时隙每个节点的占用不超过容量，
    并重算完成时间与目标值
    """
    tol = config.check_tol if tol is None else tol
    violations: list[ScheduleViolation] = []

    for ref in sorted(set(s.duplicates)):
        violations.append(ScheduleViolation(code="unit_duplicated", message=f"单位 {tuple(ref)} 被调度了多次", job=ref.job))

    expected: dict[UnitRef, list[str]] = {}
    for k, j, flow in inst.iter_flows():
        for c in range(flow.demand):
            expected[UnitRef(k, j, c)] = flow.path

    for ref in sorted(set(expected) - set(s.slot_of)):
        violations.append(ScheduleViolation(code="unit_missing", message=f"单位 {tuple(ref)} 没有被调度", job=ref.job))
    for ref in sorted(set(s.slot_of) - set(expected)):
        violations.append(ScheduleViolation(code="unit_unknown", message=f"单位 {tuple(ref)} 不属于该实例", job=ref.job))

    capacity = inst.capacity_map()
    occupancy: dict[int, Counter] = defaultdict(Counter)
    for ref, t in sorted(s.slot_of.items()):
        if ref not in expected:
            continue
        if t < 1:
            violations.append(ScheduleViolation(code="slot_invalid", message=f"单位 {tuple(ref)} 的时隙 {t} < 1", slot=t, job=ref.job))
            continue
        release = inst.coflows[ref.job].release
        if t <= release:
            violations.append(ScheduleViolation(
                code="release_violated",
                message=f"单位 {tuple(ref)} 在时隙 {t} 执行，但作业 {ref.job} 的释放时间为 {release}",
                slot=t, job=ref.job,
            ))
        occupancy[t].update(expected[ref])

    for t in sorted(occupancy):
        for v, count in sorted(occupancy[t].items()):
            u = capacity.get(v)
            if u is not None and count > u:
                violations.append(ScheduleViolation(
                    code="capacity_exceeded",
                    message=f"时隙 {t} 节点 {v} 上有 {count} 个单位，超过容量 {u}",
                    slot=t, node=v,
                ))

    valid_slots = {ref: t for ref, t in s.slot_of.items() if ref in expected}
    completion = completion_times(inst, valid_slots)
    objective = sum(c.weight * completion[k] for k, c in enumerate(inst.coflows))
    if list(s.completion) != completion:
        violations.append(ScheduleViolation(
            code="completion_mismatch",
            message=f"完成时间 {list(s.completion)} 与重算结果 {completion} 不一致",
        ))
    if abs(s.objective - objective) > tol * max(1.0, abs(objective)):
        violations.append(ScheduleViolation(
            code="objective_mismatch",
            message=f"目标值 {s.objective} 与重算结果 {objective} 不一致",
        ))

    return ScheduleReport(
        ok=not violations,
        objective=objective,
        completion=completion,
        horizon=max(valid_slots.values(), default=0),
        violations=violations,
    )


class FinishViolation(SQLModel):
    unit_id: int
    slot: int
    bound: float


class FinishReport(SQLModel):
    ok: bool
    violations: list[FinishViolation] = Field(default_factory=list)


def check_finish_bounds(h: Hypergraph, s: Schedule, general: bool = False, tol: float | None = None) -> FinishReport:
    """
    单位容量：slot ≤ r_e + λ D_e - (λ - 1)；
    一般容量：slot ≤ r_e + λ D_e Δ(e)
    """
    tol = config.check_tol if tol is None else tol
    lam = h.lam_eff
    violations = []
    for e in h.units:
        slot = s.slot_of.get(e.ref)
        if slot is None:
            continue
        if general:
            bound = e.release + lam * e.deadline * capacity_disparity(e.finite_nodes, h.capacities)
        else:
            bound = e.release + lam * e.deadline - (lam - 1)
        if slot > bound + tol:
            violations.append(FinishViolation(unit_id=e.unit_id, slot=slot, bound=bound))
    return FinishReport(ok=not violations, violations=violations)


def max_capacity_disparity(inst: Instance) -> int:
    """Δ = max_e Δ(e)，按 flow 计算（同一 flow 的单位节点集相同）"""
    capacity = inst.capacity_map()
    return max(
        (capacity_disparity([v for v in flow.path if capacity.get(v) is not None], capacity)
         for _, _, flow in inst.iter_flows()),
        default=1,
    )


class RatioReport(SQLModel):
    lp_objective: float
    alg_objective: float
    oracle_objective: float | None = None
    lam: int
    lam_finite: int
    lam_eff: int
    delta: int = 1
    n_jobs: int
    bound_name: str
    bound_used: float
    ratio_vs_lp: float
    ratio_vs_opt: float | None = None
    lp_le_opt: bool | None = None
    opt_le_alg: bool | None = None
    bound_satisfied: bool


def applicable_bound(
        inst: Instance,
        mode: SolveMode,
        deadline_mode: DeadlineMode,
) -> tuple[str, float, int]:
    """
    返回 (界的名称, 倍数, Δ)。
    单位容量：2λ / 2nλ/(n+1)，释放时间不全为 0（改进截止时间时为存在 r_k ≥ λ）再加 1；
    一般容量：乘以 Δ，只有释放时间全为 0 时不加 1；二部模式即 λ = 2 的单位容量情形
    """
    _, lam_finite = inst.path_lambda()
    lam = max(1, lam_finite)
    n = inst.n_jobs
    releases = [c.release for c in inst.coflows]
    delta = max_capacity_disparity(inst) if mode == SolveMode.CAPACITIES else 1

    improved = deadline_mode == DeadlineMode.IMPROVED
    factor = (2 * n / (n + 1) if improved else 2.0) * lam * delta
    name = ("2nλ/(n+1)" if improved else "2λ") + ("Δ" if mode == SolveMode.CAPACITIES else "")

    if mode == SolveMode.CAPACITIES or not improved:
        additive = any(r > 0 for r in releases)
    else:
        additive = any(r >= lam for r in releases)
    if additive:
        factor += 1
        name += "+1"
    if mode == SolveMode.BIPARTITE:
        name = f"bipartite {name}"
    return name, factor, delta


def evaluate(
        inst: Instance,
        lp: LpSolution,
        s: Schedule,
        oracle_opt: float | None = None,
        mode: SolveMode = SolveMode.UNIT,
        deadline_mode: DeadlineMode = DeadlineMode.STANDARD,
        tol: float | None = None,
) -> RatioReport:
    """选出适用的近似界，检查 ALG ≤ 界 · LP；有精确最优值时还检查 LP ≤ OPT ≤ ALG 与 ALG ≤ 界 · OPT"""
    tol = config.check_tol if tol is None else tol
    lam, lam_finite = inst.path_lambda()
    name, factor, delta = applicable_bound(inst, mode, deadline_mode)

    def within(lhs: float, rhs: float) -> bool:
        return lhs <= rhs + tol * max(1.0, abs(rhs))

    def ratio(num: float, den: float) -> float:
        if den > 0:
            return num / den
        return 1.0 if num <= tol else math.inf

    alg = s.objective
    satisfied = within(alg, factor * lp.lp_objective)
    report = RatioReport(
        lp_objective=lp.lp_objective,
        alg_objective=alg,
        lam=lam,
        lam_finite=lam_finite,
        lam_eff=max(1, lam_finite),
        delta=delta,
        n_jobs=inst.n_jobs,
        bound_name=name,
        bound_used=factor,
        ratio_vs_lp=ratio(alg, lp.lp_objective),
        bound_satisfied=satisfied,
    )
    if oracle_opt is not None:
        report.oracle_objective = oracle_opt
        report.ratio_vs_opt = ratio(alg, oracle_opt)
        report.lp_le_opt = within(lp.lp_objective, oracle_opt)
        report.opt_le_alg = within(oracle_opt, alg)
        report.bound_satisfied = satisfied and report.lp_le_opt and report.opt_le_alg and within(alg, factor * oracle_opt)
    return report
