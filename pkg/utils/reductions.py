"""
边容量与节点容量之间的相互归约，以及同质容量的时间缩放
"""
from loguru import logger

from models.instance import (
    Instance, NodeSpec, Coflow, Flow, UNBOUNDED,
    EdgeCapInstance, EdgeSpec, EdgeCoflow, EdgeFlow,
)
from models.schedule import Schedule
from .exceptions import ReductionError


def edge_node_id(index: int, edge: EdgeSpec) -> str:
    return f"{edge.a}~{edge.b}#{index}"


def _walk_edge_path(e_inst: EdgeCapInstance, edge_path: list[int], where: str) -> list[str]:
    """把边序列还原成 起点, v_e1, n1, v_e2, ... 的节点序列"""
    if not edge_path:
        raise ReductionError(f"{where}: 边路径为空")
    for idx in edge_path:
        if not 0 <= idx < len(e_inst.edges):
            raise ReductionError(f"{where}: 边 {idx} 不存在")

    first = e_inst.edges[edge_path[0]]
    if len(edge_path) == 1:
        start = first.a
    else:
        nxt = e_inst.edges[edge_path[1]]
        if first.b in (nxt.a, nxt.b):
            start = first.a
        elif first.a in (nxt.a, nxt.b):
            start = first.b
        else:
            raise ReductionError(f"{where}: 边 {edge_path[0]} 与边 {edge_path[1]} 不相连")

    sequence = [start]
    current = start
    for idx in edge_path:
        edge = e_inst.edges[idx]
        if current == edge.a:
            other = edge.b
        elif current == edge.b:
            other = edge.a
        else:
            raise ReductionError(f"{where}: 边 {idx} 不与节点 {current} 相连，路径不连续")
        sequence.extend([edge_node_id(idx, edge), other])
        current = other
    if len(set(sequence)) != len(sequence):
        raise ReductionError(f"{where}: 边路径重复经过节点，不是简单路径")
    return sequence


def reduce_edge_capacities(e_inst: EdgeCapInstance) -> Instance:
    """
    把每条边从中间拆开，插入一个容量等于该边容量的新节点 v_e；
    原有节点全部变为无限容量。coflow 结构、权重、释放时间、需求保持不变
    """
    known = set(e_inst.nodes)
    for idx, edge in enumerate(e_inst.edges):
        if edge.a not in known or edge.b not in known:
            raise ReductionError(f"边 {idx} 的端点不存在")

    nodes = [NodeSpec(id=v, capacity=UNBOUNDED) for v in e_inst.nodes]
    for idx, edge in enumerate(e_inst.edges):
        node_id = edge_node_id(idx, edge)
        if node_id in known:
            raise ReductionError(f"新节点 id {node_id} 与原有节点冲突")
        nodes.append(NodeSpec(id=node_id, capacity=edge.capacity))

    coflows = []
    for k, coflow in enumerate(e_inst.coflows):
        flows = [
            Flow(path=_walk_edge_path(e_inst, flow.edge_path, f"coflow {k} flow {j}"), demand=flow.demand)
            for j, flow in enumerate(coflow.flows)
        ]
        coflows.append(Coflow(weight=coflow.weight, release=coflow.release, flows=flows))

    logger.debug(f"边容量归约: {len(e_inst.edges)} 条边 -> {len(nodes)} 个节点")
    return Instance(name=e_inst.name, seed=e_inst.seed, nodes=nodes, coflows=coflows)


def reduce_node_to_edge(inst: Instance) -> EdgeCapInstance:
    """
    每个节点 v 替换为 v_in -- v_out 两个节点和一条容量为 u(v) 的边，
    路径上相邻节点之间用无限容量的连接边串起来（同一对节点共用一条连接边）
    """
    for node in inst.nodes:
        if not node.is_finite:
            raise ReductionError(f"节点 {node.id} 容量无限，不能转换为边容量实例")

    nodes: list[str] = []
    edges: list[EdgeSpec] = []
    gadget: dict[str, int] = {}
    for node in inst.nodes:
        nodes.extend([f"{node.id}_in", f"{node.id}_out"])
        gadget[node.id] = len(edges)
        edges.append(EdgeSpec(a=f"{node.id}_in", b=f"{node.id}_out", capacity=node.capacity))

    connector: dict[tuple[str, str], int] = {}
    coflows = []
    for coflow in inst.coflows:
        flows = []
        for flow in coflow.flows:
            edge_path = [gadget[flow.path[0]]]
            for u, v in zip(flow.path, flow.path[1:]):
                if (u, v) not in connector:
                    connector[(u, v)] = len(edges)
                    edges.append(EdgeSpec(a=f"{u}_out", b=f"{v}_in", capacity=UNBOUNDED))
                edge_path.extend([connector[(u, v)], gadget[v]])
            flows.append(EdgeFlow(edge_path=edge_path, demand=flow.demand))
        coflows.append(EdgeCoflow(weight=coflow.weight, release=coflow.release, flows=flows))

    return EdgeCapInstance(name=inst.name, seed=inst.seed, nodes=nodes, edges=edges, coflows=coflows)


def scale_homogeneous(inst: Instance) -> tuple[Instance, int]:
    """
    所有有限容量都等于 ū 时，返回容量全部为 1、释放时间乘以 ū 的实例和缩放因子 ū：
    单位容量调度中的 ū 个连续时隙对应原问题的 1 个时隙（见 compress_schedule）
    """
    capacities = {int(n.capacity) for n in inst.nodes if n.is_finite}
    if len(capacities) > 1:
        raise ValueError(f"容量不同质: {sorted(capacities)}")
    u_bar = capacities.pop() if capacities else 1
    nodes = [NodeSpec(id=n.id, capacity=1 if n.is_finite else UNBOUNDED) for n in inst.nodes]
    coflows = [c.model_copy(update={"release": c.release * u_bar}) for c in inst.coflows]
    return inst.model_copy(update={"nodes": nodes, "coflows": coflows}), u_bar


def compress_schedule(inst: Instance, schedule: Schedule, u_bar: int) -> Schedule:
    """把缩放后实例上的调度映射回原实例：时隙 s -> ceil(s / ū)"""
    return Schedule.build(inst, {unit: -(-t // u_bar) for unit, t in schedule.slot_of.items()})
