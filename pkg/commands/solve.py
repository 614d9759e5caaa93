import argparse

from loguru import logger

from algorithms.pipeline import SolveResult, solve_instance
from models.instance import Instance, EdgeCapInstance, validate
from utils.exceptions import InstanceValidationError
from utils.files import load_document, save_schedule
from utils.reductions import reduce_edge_capacities
from .common import add_run_options, run_config_from_args, emit_json, emit_lines, listed


def register(subparsers) -> None:
    parser = subparsers.add_parser("solve", help="求 LP 下界并运行近似算法")
    parser.add_argument("file", help="实例文件（节点容量或边容量）")
    add_run_options(parser)
    parser.add_argument("--oracle", action="store_true", help="同时求精确最优值")
    parser.add_argument("-o", "--output", "--schedule-out", dest="schedule_out", default=None, help="把调度写入该文件")
    parser.add_argument("--dump-orientation", default=None, help="把线图定向导出为文本边表")
    parser.set_defaults(handler=run)


def load_for_solve(path: str) -> tuple[Instance, dict | None]:
    """读取实例；边容量实例先归约成节点容量实例，并给出电路模型下的界 2λ_e + 1"""
    document = load_document(path)
    reduction = None
    if isinstance(document, EdgeCapInstance):
        lam_edges = document.max_edge_count()
        document = reduce_edge_capacities(document)
        reduction = {"lambda_edges": lam_edges, "circuit_bound": 2 * lam_edges + 1}
        logger.info(f"边容量实例已归约为节点容量实例，路径最多 {lam_edges} 条边")

    report = validate(document)
    if not report.ok:
        raise InstanceValidationError(
            f"{path}: 实例不合法: " + "; ".join(v.message for v in report.violations),
            report.violations,
        )
    return document, reduction


def format_result(result: SolveResult, reduction: dict | None = None) -> list[str]:
    ratio = result.ratio
    lines = [
        f"实例: {result.name or '-'}（{result.total_units} 个需求单位, λ = {ratio.lam}, λ_<∞ = {ratio.lam_finite}）",
        f"LP 下界: {result.lp.lp_objective:.6g}（{result.lp.iterations} 轮, 加割 {result.lp.cuts_added} 条）",
        f"C*: {[round(c, 6) for c in result.lp.c_star]}",
        f"截止时间（{result.deadline_mode.value}）: {[str(f) for f in result.deadlines.as_fractions()]}",
        f"调度目标: {result.schedule.objective:.6g}，完成时间 {result.schedule.completion}，时间范围 {result.schedule.horizon_used}",
        f"近似界: {ratio.bound_name} = {ratio.bound_used:.6g}，ALG/LP = {ratio.ratio_vs_lp:.4f}",
        f"单作业最大负载 L^(k): {result.max_single_job_load}",
    ]
    if result.oracle is not None:
        lines.append(
            f"精确最优: {result.oracle.objective:.6g}（搜索节点 {result.oracle.nodes_explored}），"
            f"ALG/OPT = {ratio.ratio_vs_opt:.4f}"
        )
    if reduction is not None:
        lines.append(f"边容量归约: λ_e = {reduction['lambda_edges']}，电路模型的界 2λ_e+1 = {reduction['circuit_bound']}")
    for name, ok in result.checks().items():
        lines.append(f"  [{'通过' if ok else '失败'}] {name}")
    for v in listed(result.schedule_report.violations):
        lines.append(f"    {v.code}: {v.message}")
    return lines


def run(args: argparse.Namespace) -> int:
    cfg = run_config_from_args(args)
    inst, reduction = load_for_solve(args.file)
    result = solve_instance(inst, cfg, dump_orientation=args.dump_orientation)

    if args.schedule_out:
        save_schedule(result.schedule, args.schedule_out)
        logger.info(f"调度已写入 {args.schedule_out}")

    if cfg.output == "json":
        payload = result.summary()
        payload["reduction"] = reduction
        emit_json(payload)
    else:
        emit_lines(format_result(result, reduction))
    return 0 if result.ok else 3
