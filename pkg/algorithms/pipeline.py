"""
完整流程：LP 松弛 -> 截止时间 -> 超图 -> 定向 -> 调度，并对每一步做不变量检查
"""
import os
from typing import Literal

from loguru import logger
from pydantic import ConfigDict, model_validator
from sqlmodel import SQLModel, Field

from config import config
from models.instance import Instance
from models.schedule import Schedule
from utils.exceptions import CapExceeded
from .hyper import Hypergraph, Orientation, OutdegreeReport, build_hypergraph, build_line_adjacency, orient, check_outdegree_bound
from .oracle import OracleResult, exact_optimum
from .relaxation import (
    RelaxationMode, DeadlineMode, LpSolution, DeadlineSet, PrefixBoundReport,
    solve_relaxation, deadlines, check_lp_prefix_bound, check_deadline_bound,
)
from .scheduler import (
    SolveMode, ScheduleReport, FinishReport, RatioReport,
    schedule_unit_capacity, schedule_general_capacity, validate_schedule, check_finish_bounds, evaluate,
)

OraclePolicy = Literal["off", "on", "auto"]
"""off 不调用精确求解；on 必须调用（超过上限即报错）；auto 在上限之内才调用"""


class RunConfig(SQLModel):
    """一次求解的参数，默认值取自全局配置，字段约束在解析命令行参数时即被检查"""
    model_config = ConfigDict(extra="forbid")

    mode: SolveMode = SolveMode.UNIT
    deadline_mode: DeadlineMode = DeadlineMode.STANDARD
    seed: int | None = None
    separation_tol: float = Field(default_factory=lambda: config.separation_tol, gt=0, lt=1)
    check_tol: float = Field(default_factory=lambda: config.check_tol, gt=0, lt=1)
    expansion_cap: int = Field(default_factory=lambda: config.expansion_cap, ge=1)
    oracle_unit_cap: int = Field(default_factory=lambda: config.oracle_unit_cap, ge=1)
    max_rounds: int = Field(default_factory=lambda: config.cutting_plane_max_rounds, ge=1)
    output: Literal["text", "json"] = "text"
    oracle: bool = False

    @model_validator(mode="after")
    def _check_combination(self) -> "RunConfig":
        if self.oracle_unit_cap > self.expansion_cap:
            raise ValueError("精确求解的单位上限不能超过超图展开上限")
        return self


class SolveResult(SQLModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str | None = None
    mode: SolveMode
    deadline_mode: DeadlineMode
    lp: LpSolution
    deadlines: DeadlineSet
    total_units: int
    line_graph_edges: int
    acyclic: bool
    schedule: Schedule
    schedule_report: ScheduleReport
    prefix_report: PrefixBoundReport
    deadline_report: PrefixBoundReport
    outdegree_report: OutdegreeReport
    finish_report: FinishReport
    ratio: RatioReport
    max_single_job_load: list[int]
    oracle: OracleResult | None = None

    def checks(self) -> dict[str, bool]:
        """每一项不变量检查的结果，键名稳定，供报告与批量验证汇总"""
        result = {
            "schedule_feasible": self.schedule_report.ok,
            "lp_prefix_bound": self.prefix_report.ok,
            "deadline_load_bound": self.deadline_report.ok,
            "orientation_acyclic": self.acyclic,
            "outdegree_bound": self.outdegree_report.ok,
            "finish_bound": self.finish_report.ok,
            "approximation_bound": self.ratio.bound_satisfied,
        }
        if self.oracle is not None:
            result["lp_le_opt"] = bool(self.ratio.lp_le_opt)
            result["opt_le_alg"] = bool(self.ratio.opt_le_alg)
        return result

    def failures(self) -> list[str]:
        return [name for name, ok in self.checks().items() if not ok]

    @property
    def ok(self) -> bool:
        return not self.failures()

    def summary(self) -> dict:
        """JSON 报告内容，相同输入得到相同结构"""
        return {
            "name": self.name,
            "mode": self.mode.value,
            "deadline_mode": self.deadline_mode.value,
            "lp": {
                "c_star": self.lp.c_star,
                "order": self.lp.order,
                "lp_objective": self.lp.lp_objective,
                "cuts_added": self.lp.cuts_added,
                "iterations": self.lp.iterations,
            },
            "deadlines": {
                "d": self.deadlines.d,
                "rational": [str(f) for f in self.deadlines.as_fractions()],
            },
            "hypergraph": {"units": self.total_units, "line_graph_edges": self.line_graph_edges},
            "schedule": {
                "objective": self.schedule.objective,
                "completion": self.schedule.completion,
                "horizon": self.schedule.horizon_used,
            },
            "ratio": self.ratio.model_dump(mode="json"),
            "max_single_job_load": self.max_single_job_load,
            "oracle": None if self.oracle is None else {
                "objective": self.oracle.objective,
                "nodes_explored": self.oracle.nodes_explored,
                "proven_optimal": self.oracle.proven_optimal,
            },
            "checks": self.checks(),
            "ok": self.ok,
        }


def _check_mode(inst: Instance, mode: SolveMode) -> None:
    if mode == SolveMode.CAPACITIES:
        return
    if big := sorted(n.id for n in inst.nodes if n.is_finite and int(n.capacity) > 1):
        raise ValueError(f"{mode.value} 模式要求单位容量，节点 {', '.join(big)} 的容量大于 1；请使用 --mode capacities")


def build_schedule(h: Hypergraph, o: Orientation, mode: SolveMode) -> Schedule:
    if mode == SolveMode.CAPACITIES:
        return schedule_general_capacity(h, o)
    return schedule_unit_capacity(h, o)


def solve_instance(
        inst: Instance,
        cfg: RunConfig | None = None,
        oracle: OraclePolicy | None = None,
        dump_orientation: str | os.PathLike | None = None,
) -> SolveResult:
    """
    跑完整流程并检查所有不变量。检查失败不会抛异常，而是记录在结果里

    参数:
        inst: 合法实例
        cfg: 运行参数
        oracle: 精确求解策略，默认由 cfg.oracle 决定（on / off）
        dump_orientation: 把定向导出为文本边表

    异常:
        ValueError: 模式与实例容量不符
        CapExceeded: oracle 为 on 且实例超过精确求解上限
    """
    cfg = cfg or RunConfig()
    oracle = oracle or ("on" if cfg.oracle else "off")
    _check_mode(inst, cfg.mode)

    relaxation_mode = RelaxationMode.BIPARTITE if cfg.mode == SolveMode.BIPARTITE else RelaxationMode.GENERAL
    lp = solve_relaxation(inst, relaxation_mode, tol=cfg.separation_tol, max_rounds=cfg.max_rounds)
    dl = deadlines(lp, cfg.deadline_mode)

    h = build_hypergraph(inst, dl, cfg.expansion_cap)
    adj = build_line_adjacency(h)
    o = orient(h, adj)
    if dump_orientation is not None:
        o.dump(dump_orientation)
        logger.info(f"定向已导出到 {dump_orientation}")

    schedule = build_schedule(h, o, cfg.mode)

    oracle_result = None
    if oracle == "on" or (oracle == "auto" and inst.total_units() <= cfg.oracle_unit_cap):
        try:
            oracle_result = exact_optimum(inst, unit_cap=cfg.oracle_unit_cap)
        except CapExceeded:
            if oracle == "on":
                raise
            logger.debug("实例超过精确求解上限，跳过")

    machine_loads = inst.loads()
    result = SolveResult(
        name=inst.name,
        mode=cfg.mode,
        deadline_mode=cfg.deadline_mode,
        lp=lp,
        deadlines=dl,
        total_units=h.total_units,
        line_graph_edges=len(adj.shared),
        acyclic=o.is_acyclic(),
        schedule=schedule,
        schedule_report=validate_schedule(inst, schedule, tol=cfg.check_tol),
        prefix_report=check_lp_prefix_bound(inst, lp, mode=DeadlineMode.IMPROVED, tol=cfg.check_tol),
        deadline_report=check_deadline_bound(inst, dl, tol=cfg.check_tol),
        outdegree_report=check_outdegree_bound(o, h, tol=cfg.check_tol),
        finish_report=check_finish_bounds(h, schedule, general=cfg.mode == SolveMode.CAPACITIES, tol=cfg.check_tol),
        ratio=evaluate(
            inst, lp, schedule,
            oracle_opt=None if oracle_result is None else oracle_result.objective,
            mode=cfg.mode,
            deadline_mode=cfg.deadline_mode,
            tol=cfg.check_tol,
        ),
        max_single_job_load=[machine_loads.max_job_load(k) for k in range(inst.n_jobs)],
        oracle=oracle_result,
    )

    if result.ok:
        logger.info(f"{inst.name or '实例'}: LP {lp.lp_objective:.6g}, 调度目标 {schedule.objective:.6g}, 界 {result.ratio.bound_name}")
    else:
        logger.warning(f"{inst.name or '实例'}: 检查未通过: {', '.join(result.failures())}")
    return result
