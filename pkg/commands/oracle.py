import argparse

from algorithms.oracle import exact_optimum, greedy_baseline
from algorithms.scheduler import validate_schedule
from utils.files import load_instance, save_schedule
from .common import emit_json, emit_lines


def register(subparsers) -> None:
    parser = subparsers.add_parser("oracle", help="小实例的精确最优值")
    parser.add_argument("file", help="实例文件")
    parser.add_argument("--unit-cap", type=int, default=None, help="允许的最大需求单位数")
    parser.add_argument("-o", "--output", "--schedule-out", dest="schedule_out", default=None, help="把最优调度写入该文件")
    parser.add_argument("--json", action="store_true", help="输出 JSON")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    if args.unit_cap is not None and args.unit_cap < 1:
        raise ValueError("--unit-cap 必须 ≥ 1")
    inst = load_instance(args.file)
    result = exact_optimum(inst, unit_cap=args.unit_cap)
    greedy = greedy_baseline(inst)
    machine_loads = inst.loads()
    max_loads = [machine_loads.max_job_load(k) for k in range(inst.n_jobs)]
    feasible = validate_schedule(inst, result.schedule).ok

    if args.schedule_out:
        save_schedule(result.schedule, args.schedule_out)

    if args.json:
        emit_json({
            "name": inst.name,
            "objective": result.objective,
            "completion": result.schedule.completion,
            "nodes_explored": result.nodes_explored,
            "proven_optimal": result.proven_optimal,
            "greedy_objective": greedy.objective,
            "max_single_job_load": max_loads,
            "feasible": feasible,
        })
    else:
        emit_lines([
            f"精确最优: {result.objective:.6g}（完成时间 {result.schedule.completion}，搜索节点 {result.nodes_explored}）",
            f"贪心列表调度: {greedy.objective:.6g}",
            f"单作业最大负载 L^(k): {max_loads}",
        ])
    return 0 if feasible else 3
