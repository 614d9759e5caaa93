import argparse
import sys

from loguru import logger

from utils.files import save_instance
from utils.generators import (
    NAMED_GRAPHS, gen_triangle, gen_fig4, gen_coloring, named_graph, gen_random, gen_bipartite, gen_edge_paths,
)

KINDS = ("triangle", "fig4", "coloring", "random", "bipartite", "edge-path")


def register(subparsers) -> None:
    parser = subparsers.add_parser("gen", help="生成实例文件")
    parser.add_argument("--kind", choices=KINDS, required=True, help="实例种类")
    parser.add_argument("--graph", choices=NAMED_GRAPHS, default="k3", help="coloring 使用的图")
    parser.add_argument("--seed", type=int, default=0, help="随机种子（PCG64）")
    parser.add_argument("--coflows", type=int, default=3)
    parser.add_argument("--nodes", type=int, default=6)
    parser.add_argument("--max-flows", type=int, default=4)
    parser.add_argument("--max-path", type=int, default=3)
    parser.add_argument("--max-demand", type=int, default=3)
    parser.add_argument("--max-release", type=int, default=5)
    parser.add_argument("--max-capacity", type=int, default=1)
    parser.add_argument("--ports", type=int, default=3, help="bipartite 的端口数")
    parser.add_argument("--density", type=float, default=0.5, help="bipartite 中每个端口对出现的概率")
    parser.add_argument("-o", "--output", default=None, help="输出文件，缺省写到标准输出")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    match args.kind:
        case "triangle":
            inst = gen_triangle()
        case "fig4":
            inst = gen_fig4()
        case "coloring":
            inst = gen_coloring(named_graph(args.graph), name=f"coloring-{args.graph}")
        case "random":
            inst = gen_random(args.coflows, args.nodes, args.max_flows, args.max_path,
                              args.max_demand, args.max_release, args.max_capacity, args.seed)
        case "bipartite":
            inst = gen_bipartite(args.ports, args.coflows, args.density, args.max_demand, args.max_release, args.seed)
        case _:
            inst = gen_edge_paths(args.nodes, args.coflows, args.max_flows, args.max_demand,
                                  args.max_release, args.max_capacity, args.seed)

    save_instance(inst, args.output or sys.stdout)
    if args.output:
        logger.info(f"已生成实例 {inst.name} -> {args.output}")
    return 0
