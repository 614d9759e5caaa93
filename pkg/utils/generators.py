"""
实例生成器。所有随机性都来自一个种子，经 numpy 的 PCG64 生成器（np.random.default_rng）产生，
跨平台结果一致；生成器是参数（含种子）的纯函数
"""
import networkx as nx
import numpy as np
from loguru import logger

from models.instance import Instance, NodeSpec, Coflow, Flow, EdgeCapInstance, EdgeSpec, EdgeCoflow, EdgeFlow

NAMED_GRAPHS = ("k3", "k4", "c5", "petersen")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gen_triangle() -> Instance:
    """三个节点构成三角形，一个 coflow 在每条边上发送一个单位"""
    return Instance(
        name="triangle",
        nodes=[NodeSpec(id=v, capacity=1) for v in ("a", "b", "c")],
        coflows=[Coflow(weight=1.0, release=0, flows=[
            Flow(path=["a", "b"], demand=1),
            Flow(path=["b", "c"], demand=1),
            Flow(path=["c", "a"], demand=1),
        ])],
    )


def gen_fig4() -> Instance:
    """一个 coflow、四条三节点路径，任意两条路径都有公共节点"""
    paths = [
        ["A1", "B1", "C2"],
        ["A1", "B2", "C1"],
        ["A1", "B1", "C1"],
        ["A2", "B1", "C1"],
    ]
    return Instance(
        name="fig4",
        nodes=[NodeSpec(id=v, capacity=1) for v in ("A1", "A2", "B1", "B2", "C1", "C2")],
        coflows=[Coflow(weight=1.0, release=0, flows=[Flow(path=p, demand=1) for p in paths])],
    )


def named_graph(name: str) -> nx.Graph:
    match name:
        case "k3":
            return nx.complete_graph(3)
        case "k4":
            return nx.complete_graph(4)
        case "c5":
            return nx.cycle_graph(5)
        case "petersen":
            return nx.petersen_graph()
    raise ValueError(f"未知的图名称: {name}，可选 {', '.join(NAMED_GRAPHS)}")


def _edge_node_id(u, v) -> str:
    a, b = sorted((u, v), key=str)
    return f"{a}-{b}"


def gen_coloring(g: nx.Graph, name: str | None = None) -> Instance:
    """
    着色归约：g 的每条边对应一个节点，g 的每个顶点对应一个单位需求的 flow，
    其路径是与该顶点相关联的边节点（按 id 排序，顺序与调度无关）
    """
    if g.number_of_edges() == 0:
        raise ValueError("图中至少需要一条边")

    node_ids = sorted({_edge_node_id(u, v) for u, v in g.edges()})
    flows = []
    for x in sorted(g.nodes(), key=str):
        incident = sorted({_edge_node_id(x, y) for y in g.neighbors(x)})
        if not incident:
            logger.warning(f"顶点 {x} 是孤立点，不对应任何 flow")
            continue
        flows.append(Flow(path=incident, demand=1))

    return Instance(
        name=name or f"coloring-{g.number_of_nodes()}v{g.number_of_edges()}e",
        nodes=[NodeSpec(id=v, capacity=1) for v in node_ids],
        coflows=[Coflow(weight=1.0, release=0, flows=flows)],
    )


def gen_random(
        n_coflows: int,
        n_nodes: int,
        max_flows: int,
        max_path: int,
        max_demand: int,
        max_release: int,
        max_capacity: int,
        seed: int,
) -> Instance:
    """
    随机实例：路径是从节点中无放回均匀抽取的简单序列，长度不超过 min(max_path, n_nodes)；
    需求、权重（1..10 的整数）、释放时间、容量都在各自范围内均匀抽取
    """
    for label, value in (("n_coflows", n_coflows), ("n_nodes", n_nodes), ("max_flows", max_flows),
                         ("max_path", max_path), ("max_demand", max_demand), ("max_capacity", max_capacity)):
        if value < 1:
            raise ValueError(f"{label} 必须 ≥ 1")
    if max_release < 0:
        raise ValueError("max_release 必须 ≥ 0")

    rng = _rng(seed)
    node_ids = [f"n{i}" for i in range(n_nodes)]
    nodes = [NodeSpec(id=v, capacity=int(rng.integers(1, max_capacity + 1))) for v in node_ids]
    longest = min(max_path, n_nodes)

    coflows = []
    for _ in range(n_coflows):
        weight = float(rng.integers(1, 11))
        release = int(rng.integers(0, max_release + 1))
        flows = []
        for _ in range(int(rng.integers(1, max_flows + 1))):
            length = int(rng.integers(1, longest + 1))
            picked = rng.choice(n_nodes, size=length, replace=False)
            flows.append(Flow(path=[node_ids[int(i)] for i in picked], demand=int(rng.integers(1, max_demand + 1))))
        coflows.append(Coflow(weight=weight, release=release, flows=flows))

    return Instance(name=f"random-{seed}", seed=seed, nodes=nodes, coflows=coflows)


def gen_bipartite(
        n_ports: int,
        n_coflows: int,
        density: float,
        max_demand: int,
        max_release: int,
        seed: int,
) -> Instance:
    """
    二部 coflow：2·n_ports 个单位容量端口，每个 flow 从一个输入端口发往一个输出端口。
    每个端口对以概率 density 出现；一个 coflow 至少有一个 flow
    """
    if n_ports < 1:
        raise ValueError("n_ports 必须 ≥ 1")
    if n_coflows < 1 or max_demand < 1 or max_release < 0:
        raise ValueError("n_coflows、max_demand 必须 ≥ 1，max_release 必须 ≥ 0")

    rng = _rng(seed)
    inputs = [f"in{i}" for i in range(n_ports)]
    outputs = [f"out{j}" for j in range(n_ports)]

    coflows = []
    for _ in range(n_coflows):
        weight = float(rng.integers(1, 11))
        release = int(rng.integers(0, max_release + 1))
        flows = []
        for i in range(n_ports):
            for j in range(n_ports):
                if rng.random() < density:
                    flows.append(Flow(path=[inputs[i], outputs[j]], demand=int(rng.integers(1, max_demand + 1))))
        if not flows:
            i, j = int(rng.integers(0, n_ports)), int(rng.integers(0, n_ports))
            flows.append(Flow(path=[inputs[i], outputs[j]], demand=int(rng.integers(1, max_demand + 1))))
        coflows.append(Coflow(weight=weight, release=release, flows=flows))

    return Instance(
        name=f"bipartite-{seed}",
        seed=seed,
        nodes=[NodeSpec(id=v, capacity=1) for v in inputs + outputs],
        coflows=coflows,
    )


def gen_edge_paths(
        n_nodes: int,
        n_coflows: int,
        max_flows: int,
        max_demand: int,
        max_release: int,
        max_capacity: int,
        seed: int,
) -> EdgeCapInstance:
    """
    边容量实例：节点排成一条线 p0 - p1 - ... ，flow 走其中一段连续的边。
    用来检查边到节点的归约
    """
    if n_nodes < 2:
        raise ValueError("n_nodes 必须 ≥ 2")

    rng = _rng(seed)
    node_ids = [f"p{i}" for i in range(n_nodes)]
    edges = [
        EdgeSpec(a=node_ids[i], b=node_ids[i + 1], capacity=int(rng.integers(1, max_capacity + 1)))
        for i in range(n_nodes - 1)
    ]

    coflows = []
    for _ in range(n_coflows):
        weight = float(rng.integers(1, 11))
        release = int(rng.integers(0, max_release + 1))
        flows = []
        for _ in range(int(rng.integers(1, max_flows + 1))):
            start = int(rng.integers(0, len(edges)))
            end = int(rng.integers(start, len(edges)))
            edge_path = list(range(start, end + 1))
            if rng.random() < 0.5:
                edge_path.reverse()
            flows.append(EdgeFlow(edge_path=edge_path, demand=int(rng.integers(1, max_demand + 1))))
        coflows.append(EdgeCoflow(weight=weight, release=release, flows=flows))

    return EdgeCapInstance(name=f"edge-paths-{seed}", seed=seed, nodes=node_ids, edges=edges, coflows=coflows)
