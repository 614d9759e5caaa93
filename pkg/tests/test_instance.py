from itertools import combinations

import pytest

from models.instance import Instance, NodeSpec, Coflow, Flow, UNBOUNDED, validate, loads, path_lambda
from utils.generators import gen_random


def test_triangle_valid(triangle):
    """测试三角形实例合法"""
    report = validate(triangle)
    assert report.ok
    assert report.violations == []


def test_path_not_simple(make_instance):
    """测试路径中重复节点被报告"""
    inst = make_instance([[["a", "b", "a"]]])
    report = validate(inst)
    assert not report.ok
    codes = [v.code for v in report.violations]
    assert "path_not_simple" in codes
    violation = next(v for v in report.violations if v.code == "path_not_simple")
    assert violation.coflow == 0
    assert violation.flow == 0


def test_demand_not_positive(make_instance):
    """测试需求为 0 被报告"""
    inst = make_instance([[["a", "b"]]], demands=[[0]])
    report = validate(inst)
    assert not report.ok
    assert [v.code for v in report.violations] == ["demand_not_positive"]


def test_unknown_node_and_empty_path():
    """测试路径引用不存在的节点、空路径"""
    inst = Instance(
        nodes=[NodeSpec(id="a")],
        coflows=[Coflow(flows=[Flow(path=["a", "x"]), Flow(path=[])])],
    )
    report = validate(inst)
    codes = sorted(v.code for v in report.violations)
    assert codes == ["path_empty", "unknown_node"]
    unknown = next(v for v in report.violations if v.code == "unknown_node")
    assert unknown.node == "x"


def test_structural_violations():
    """测试缺少 coflow / flow、负权重、负释放时间、重复节点与非正容量"""
    assert [v.code for v in validate(Instance(nodes=[], coflows=[])).violations] == ["no_coflows"]

    inst = Instance(
        nodes=[NodeSpec(id="a", capacity=0), NodeSpec(id="a")],
        coflows=[Coflow(weight=-1.0, release=-2, flows=[])],
    )
    codes = sorted(v.code for v in validate(inst).violations)
    assert codes == sorted(["capacity_not_positive", "duplicate_node", "weight_negative", "release_negative", "no_flows"])


def test_zero_weight_allowed(make_instance):
    """测试权重为 0 是合法的"""
    inst = make_instance([[["a"]]], weights=[0.0])
    assert validate(inst).ok


def test_triangle_loads(triangle):
    """测试三角形每个节点负载为 2"""
    table = loads(triangle)
    for v in ("a", "b", "c"):
        assert table[v, 0] == 2
    assert table.max_job_load(0) == 2
    assert table["missing", 0] == 0


def test_single_flow_loads(make_instance):
    """测试单个 flow 的负载等于需求"""
    inst = make_instance([[["a", "b", "c"]]], demands=[[5]])
    table = loads(inst)
    assert [table[v, 0] for v in ("a", "b", "c")] == [5, 5, 5]


def test_fig4_loads(fig4):
    """测试 fig4 的最大负载为 3，位于 A1、B1、C1"""
    table = loads(fig4)
    assert table.max_job_load(0) == 3
    assert {v for v in table.machines() if table[v, 0] == 3} == {"A1", "B1", "C1"}


def test_fig4_pairwise_intersection(fig4):
    """测试 fig4 任意两条路径都有公共节点"""
    paths = [set(f.path) for f in fig4.coflows[0].flows]
    assert len(list(combinations(paths, 2))) == 6
    for p, q in combinations(paths, 2):
        assert p & q


def test_path_lambda(triangle, fig4, make_instance):
    """测试 λ 与 λ_<∞"""
    assert path_lambda(triangle) == (2, 2)
    assert path_lambda(fig4) == (3, 3)
    inst = make_instance([[["a", "b", "c"]]], capacities={"b": UNBOUNDED})
    assert path_lambda(inst) == (3, 2)


@pytest.mark.parametrize("seed", range(1, 21))
def test_loads_recount(seed):
    """测试负载表与直接按 flow 重新计数的结果一致"""
    inst = gen_random(4, 7, 4, 4, 3, 3, 2, seed)
    table = loads(inst)
    for node in inst.nodes:
        for k, coflow in enumerate(inst.coflows):
            expected = sum(f.demand for f in coflow.flows if node.id in f.path)
            assert table[node.id, k] == expected
