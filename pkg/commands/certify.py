"""
批量验证：按种子生成实例，跑完整流程和所有不变量检查，
单位数在上限之内的实例再与精确最优值比较
"""
import argparse
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

from loguru import logger
from sqlmodel import SQLModel, Field

from algorithms.oracle import exact_optimum, chromatic_number
from algorithms.pipeline import RunConfig, solve_instance
from algorithms.relaxation import RelaxationMode, solve_relaxation
from algorithms.scheduler import SolveMode
from config import config
from models import get_engine, get_session, init_db
from models.certify_record import CertifyRun, SeedRecord
from models.instance import Instance
from utils.exceptions import PcsError
from utils.generators import gen_triangle, gen_fig4, gen_coloring, named_graph, gen_random, gen_bipartite, gen_edge_paths
from utils.reductions import reduce_edge_capacities, reduce_node_to_edge
from .common import add_run_options, run_config_from_args, parse_seed_range, emit_json, emit_lines, listed

PROFILES = ("small", "tiny", "capacities", "bipartite", "named-instances", "reductions")
PROFILE_ALIASES = {"paper-figures": "named-instances"}


class NamedCase(SQLModel):
    label: str
    expected_optimum: int
    expected_lp: float | None = None
    graph: str | None = None


NAMED_CASES = [
    NamedCase(label="triangle", expected_optimum=3, expected_lp=2.0),
    NamedCase(label="fig4", expected_optimum=4, expected_lp=3.0),
    NamedCase(label="k3", expected_optimum=3, graph="k3"),
    NamedCase(label="k4", expected_optimum=4, graph="k4"),
    NamedCase(label="c5", expected_optimum=3, graph="c5"),
    NamedCase(label="petersen", expected_optimum=3, graph="petersen"),
]


class CaseOutcome(SQLModel):
    seed: int
    name: str | None = None
    ok: bool
    lp_objective: float | None = None
    alg_objective: float | None = None
    oracle_objective: float | None = None
    bound_name: str | None = None
    bound_used: float | None = None
    checks: dict[str, bool] = Field(default_factory=dict)
    error: str | None = None

    @property
    def failures(self) -> list[str]:
        failed = [name for name, ok in self.checks.items() if not ok]
        if self.error:
            failed.append("error")
        return failed


def register(subparsers) -> None:
    parser = subparsers.add_parser("certify", help="按种子批量验证各项界")
    seeds = parser.add_mutually_exclusive_group()
    seeds.add_argument("--seeds", type=parse_seed_range, default=parse_seed_range("1..50"), help="种子范围 A..B")
    seeds.add_argument("--seed", type=int, default=None, help="只验证这一个种子")
    parser.add_argument("--profile", choices=PROFILES + tuple(PROFILE_ALIASES), default="small", help="实例规模与种类")
    add_run_options(parser)
    parser.add_argument("--oracle", action="store_true", help="每个实例都必须求出精确最优值，超过上限记为失败")
    parser.add_argument("--workers", type=int, default=None, help="并行进程数")
    parser.add_argument("--db", default=None, help="把结果写入该数据库 URL")
    parser.set_defaults(handler=run)


def profile_mode(profile: str, mode: SolveMode) -> SolveMode:
    match profile:
        case "capacities" | "reductions":
            return SolveMode.CAPACITIES
        case "bipartite":
            return SolveMode.BIPARTITE
    return mode


def profile_cases(profile: str, seeds: range) -> list[int]:
    """named-instances 不依赖种子，按固定的实例编号"""
    if profile == "named-instances":
        return list(range(len(NAMED_CASES)))
    return list(seeds)


def _within(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(b))


def _build_instance(profile: str, seed: int, mode: SolveMode) -> tuple[Instance, Callable[..., dict[str, bool]] | None]:
    """返回 (实例, 额外检查)；额外检查以 (实例, 求解结果, 运行参数) 为参数"""
    release = 0 if seed % 2 == 0 else 1
    capacity = 3 if mode == SolveMode.CAPACITIES else 1

    match profile:
        case "small":
            return gen_random(5, 10, 8, 4, 3, 5 * release, capacity, seed), None
        case "tiny":
            return gen_random(3, 5, 2, 3, 2, 3 * release, min(capacity, 2), seed), None
        case "capacities":
            return gen_random(5, 10, 8, 4, 3, 5 * release, 3, seed), None
        case "bipartite":
            def bipartite_checks(inst, result, cfg):
                general = solve_relaxation(inst, RelaxationMode.GENERAL, tol=cfg.separation_tol, max_rounds=cfg.max_rounds)
                return {"bipartite_lp_agrees": _within(general.lp_objective, result.lp.lp_objective, cfg.check_tol)}

            return gen_bipartite(3, 4, 0.4, 2, 4 * release, seed), bipartite_checks
        case "named-instances":
            named = NAMED_CASES[seed % len(NAMED_CASES)]
            if named.graph is None:
                inst = gen_triangle() if named.label == "triangle" else gen_fig4()
            else:
                inst = gen_coloring(named_graph(named.graph), name=f"coloring-{named.graph}")

            def named_checks(inst, result, cfg):
                opt = None if result.oracle is None else result.oracle.objective
                checks = {"expected_optimum": opt == named.expected_optimum}
                if named.expected_lp is not None:
                    checks["expected_lp"] = _within(result.lp.lp_objective, named.expected_lp, cfg.check_tol)
                if named.graph is not None:
                    checks["chromatic_matches"] = chromatic_number(named_graph(named.graph)) == opt
                return checks

            return inst, named_checks
        case _:
            e_inst = gen_edge_paths(5, 3, 2, 2, 3 * release, 2, seed)

            def reduction_checks(inst, result, cfg):
                small = gen_random(2, 3, 2, 3, 2, 2 * release, 2, seed)
                round_trip = reduce_edge_capacities(reduce_node_to_edge(small))
                return {
                    "lambda_finite_matches_edges": result.ratio.lam_finite == e_inst.max_edge_count(),
                    "round_trip_preserves_optimum": _within(
                        exact_optimum(small).objective, exact_optimum(round_trip).objective, cfg.check_tol,
                    ),
                }

            return reduce_edge_capacities(e_inst), reduction_checks


def run_case(profile: str, seed: int, cfg_data: dict) -> CaseOutcome:
    """单个种子的验证；作为进程池任务，参数与返回值都必须可序列化"""
    cfg = RunConfig.model_validate(cfg_data)
    try:
        inst, extra = _build_instance(profile, seed, cfg.mode)
        result = solve_instance(inst, cfg, oracle="on" if cfg.oracle else "auto")
        checks = result.checks()
        if extra is not None:
            checks.update(extra(inst, result, cfg))
    except (PcsError, ValueError) as e:
        logger.warning(f"种子 {seed}: {e}")
        return CaseOutcome(seed=seed, ok=False, error=str(e))

    return CaseOutcome(
        seed=seed,
        name=inst.name,
        ok=all(checks.values()),
        lp_objective=result.lp.lp_objective,
        alg_objective=result.schedule.objective,
        oracle_objective=None if result.oracle is None else result.oracle.objective,
        bound_name=result.ratio.bound_name,
        bound_used=result.ratio.bound_used,
        checks=checks,
    )


def certify(profile: str, seeds: range, cfg: RunConfig, workers: int = 1) -> list[CaseOutcome]:
    cases = profile_cases(profile, seeds)
    cfg_data = cfg.model_dump(mode="json")
    logger.info(f"开始验证: profile {profile}, {len(cases)} 个实例, 模式 {cfg.mode.value}/{cfg.deadline_mode.value}")

    if workers > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_case, [profile] * len(cases), cases, [cfg_data] * len(cases)))
    else:
        outcomes = [run_case(profile, seed, cfg_data) for seed in cases]
    return sorted(outcomes, key=lambda o: o.seed)


def aggregate(outcomes: list[CaseOutcome]) -> dict[str, dict[str, int]]:
    """每一项检查的通过/失败计数"""
    passed: Counter = Counter()
    failed: Counter = Counter()
    for outcome in outcomes:
        for name, ok in outcome.checks.items():
            (passed if ok else failed)[name] += 1
        if outcome.error:
            failed["error"] += 1
    return {name: {"passed": passed[name], "failed": failed[name]} for name in sorted(set(passed) | set(failed))}


def store(url: str, profile: str, seeds: range, cfg: RunConfig, outcomes: list[CaseOutcome]) -> CertifyRun:
    engine = get_engine(url)
    init_db(engine)
    with get_session(engine) as session:
        run_record = CertifyRun(
            profile=profile,
            mode=cfg.mode.value,
            deadline_mode=cfg.deadline_mode.value,
            seed_from=seeds.start,
            seed_to=seeds.stop - 1,
            passed=all(o.ok for o in outcomes),
            n_failed=sum(1 for o in outcomes if not o.ok),
        )
        run_record.seeds = [
            SeedRecord(
                seed=o.seed,
                instance_name=o.name,
                ok=o.ok,
                lp_objective=o.lp_objective,
                alg_objective=o.alg_objective,
                oracle_objective=o.oracle_objective,
                bound_name=o.bound_name,
                bound_used=o.bound_used,
                failures=",".join(o.failures),
            )
            for o in outcomes
        ]
        run_record = run_record.save(session, load=CertifyRun.seeds)
        logger.info(f"验证结果已写入数据库，记录编号 {run_record.id}")
        return run_record


def run(args: argparse.Namespace) -> int:
    args.profile = PROFILE_ALIASES.get(args.profile, args.profile)
    if args.seed is not None:
        args.seeds = range(args.seed, args.seed + 1)
    mode = profile_mode(args.profile, SolveMode(args.mode))
    cfg = run_config_from_args(args, mode=mode)
    workers = config.certify_workers if args.workers is None else args.workers
    if workers < 1:
        raise ValueError("--workers 必须 ≥ 1")

    outcomes = certify(args.profile, args.seeds, cfg, workers)
    summary = aggregate(outcomes)
    passed = all(o.ok for o in outcomes)

    if args.db:
        store(args.db, args.profile, args.seeds, cfg, outcomes)

    if cfg.output == "json":
        emit_json({
            "profile": args.profile,
            "mode": cfg.mode.value,
            "deadline_mode": cfg.deadline_mode.value,
            "cases": [o.model_dump(mode="json") for o in outcomes],
            "summary": summary,
            "passed": passed,
        })
    else:
        with_oracle = sum(1 for o in outcomes if o.oracle_objective is not None)
        lines = [
            f"profile {args.profile}: {len(outcomes)} 个实例，其中 {with_oracle} 个与精确最优值比较",
        ]
        for name, counts in summary.items():
            lines.append(f"  {name}: 通过 {counts['passed']}，失败 {counts['failed']}")
        for o in listed([o for o in outcomes if not o.ok]):
            lines.append(f"  种子 {o.seed} 失败: {', '.join(o.failures)}{'（' + o.error + '）' if o.error else ''}")
        lines.append("全部通过" if passed else "存在失败项")
        emit_lines(lines)
    return 0 if passed else 3
