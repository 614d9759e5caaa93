from collections import defaultdict

import networkx as nx
import numpy as np
import pytest

from algorithms.oracle import exact_optimum, greedy_baseline, chromatic_number
from algorithms.scheduler import validate_schedule
from models.schedule import UnitRef
from utils.exceptions import CapExceeded
from utils.generators import gen_coloring, gen_random, named_graph


def _trim_units(inst, limit: int):
    """从最后一个 flow 开始逐个减少需求，直到单位数不超过 limit"""
    coflows = [c.model_copy(deep=True) for c in inst.coflows]
    excess = inst.total_units() - limit
    for coflow in reversed(coflows):
        for flow in reversed(coflow.flows):
            while excess > 0 and flow.demand > 1:
                flow.demand -= 1
                excess -= 1
    return inst.model_copy(update={"coflows": coflows})


def _full_search(inst) -> float:
    """
    逐个单位枚举全部时隙 1..单位数 + 最大释放时间，只剪掉容量冲突的部分赋值，
    同一 flow 的拷贝按时隙非降排列；返回最小目标值
    """
    caps = inst.capacity_map()
    units = [
        (k, j, c, flow.path) for k, j, flow in inst.iter_flows() for c in range(flow.demand)
    ]
    horizon = len(units) + max(c.release for c in inst.coflows)
    usage: dict[tuple[int, str], int] = defaultdict(int)
    slots: list[int] = []
    best = float("inf")

    def place(i: int) -> None:
        nonlocal best
        if i == len(units):
            completion = [0] * inst.n_jobs
            for (k, _, _, _), t in zip(units, slots):
                completion[k] = max(completion[k], t)
            best = min(best, sum(c.weight * completion[k] for k, c in enumerate(inst.coflows)))
            return
        k, j, c, path = units[i]
        first = inst.coflows[k].release + 1
        if c > 0:
            first = max(first, slots[-1])
        for t in range(first, horizon + 1):
            if any(caps[v] is not None and usage[(t, v)] >= caps[v] for v in path):
                continue
            for v in path:
                usage[(t, v)] += 1
            slots.append(t)
            place(i + 1)
            slots.pop()
            for v in path:
                usage[(t, v)] -= 1

    place(0)
    return best


def test_triangle_optimum(triangle):
    """测试三角形的最优值为 3"""
    result = exact_optimum(triangle)
    assert result.objective == 3.0
    assert result.proven_optimal
    assert validate_schedule(triangle, result.schedule).ok


def test_fig4_optimum(fig4):
    """测试 fig4 的最优值为 4"""
    assert exact_optimum(fig4).objective == 4.0


def test_single_edge_graph():
    """测试单条边的着色实例最优值为 2"""
    assert exact_optimum(gen_coloring(nx.Graph([(0, 1)]))).objective == 2.0


@pytest.mark.parametrize("name, chi", [("k3", 3), ("k4", 4), ("c5", 3), ("petersen", 3)])
def test_coloring_optimum_equals_chromatic_number(name, chi):
    """测试着色实例的最优值等于图的色数"""
    g = named_graph(name)
    assert chromatic_number(g) == chi
    assert exact_optimum(gen_coloring(g)).objective == chi


def test_chromatic_small_graphs():
    """测试空图、无边图与二部图的色数"""
    assert chromatic_number(nx.Graph()) == 0
    g = nx.Graph()
    g.add_nodes_from(range(4))
    assert chromatic_number(g) == 1
    assert chromatic_number(nx.cycle_graph(6)) == 2
    with pytest.raises(CapExceeded):
        chromatic_number(nx.complete_graph(5), vertex_cap=4)


def test_weights_and_releases(make_instance):
    """测试权重与释放时间：权重大的作业先做"""
    inst = make_instance([[["a"]], [["a"]]], weights=[1.0, 5.0], releases=[0, 1])
    result = exact_optimum(inst)
    assert result.schedule.slot_of[UnitRef(1, 0, 0)] == 2
    assert result.objective == 1.0 * 1 + 5.0 * 2


def test_caps(make_instance):
    """测试单位数与时间范围上限"""
    inst = make_instance([[["a"]]], demands=[[5]], releases=[3])
    with pytest.raises(CapExceeded):
        exact_optimum(inst, unit_cap=4)
    with pytest.raises(CapExceeded):
        exact_optimum(inst, horizon_cap=7)
    assert exact_optimum(inst, horizon_cap=8).objective == 8.0


@pytest.mark.parametrize("seed", range(1, 16))
def test_greedy_feasible_and_above_optimum(seed):
    """测试贪心调度可行且不优于精确最优值"""
    inst = gen_random(3, 4, 2, 3, 2, 2, 2, seed)
    greedy = greedy_baseline(inst)
    assert validate_schedule(inst, greedy).ok
    if inst.total_units() <= 10:
        result = exact_optimum(inst)
        assert validate_schedule(inst, result.schedule).ok
        assert result.objective <= greedy.objective


@pytest.mark.parametrize("seed", range(1, 21))
def test_against_full_search(seed):
    """测试至多 6 个单位的实例上与不剪枝的完全搜索结果一致"""
    inst = _trim_units(gen_random(2, 3, 2, 2, 2, 2, 2, seed), 6)
    assert inst.total_units() <= 6
    assert exact_optimum(inst).objective == pytest.approx(_full_search(inst))


@pytest.mark.parametrize("seed", range(1, 11))
def test_permuted_order_same_objective(seed):
    """测试打乱作业、flow 与节点的顺序后最优值不变，重复求解结果相同"""
    inst = _trim_units(gen_random(3, 4, 2, 3, 2, 2, 2, seed), 9)
    result = exact_optimum(inst)
    again = exact_optimum(inst)
    assert again.objective == result.objective
    assert again.schedule.slot_of == result.schedule.slot_of

    rng = np.random.default_rng(seed)
    coflows = [
        c.model_copy(update={"flows": [c.flows[i] for i in rng.permutation(len(c.flows))]})
        for c in (inst.coflows[i] for i in rng.permutation(inst.n_jobs))
    ]
    nodes = [inst.nodes[i] for i in rng.permutation(len(inst.nodes))]
    permuted = inst.model_copy(update={"coflows": coflows, "nodes": nodes})
    shuffled = exact_optimum(permuted)
    assert validate_schedule(permuted, shuffled.schedule).ok
    assert shuffled.objective == pytest.approx(result.objective)
