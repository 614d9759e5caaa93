from fractions import Fraction

import pytest

from algorithms.relaxation import (
    RelaxationMode, DeadlineMode, LpSolution, DeadlineSet,
    job_order, build_base_constraints, separate, bipartite_loads, solve_relaxation, deadlines,
    check_lp_prefix_bound, check_deadline_bound,
)
from models.instance import UNBOUNDED
from utils.exceptions import BipartiteModeError, RelaxationIterationError
from utils.generators import gen_random, gen_bipartite


def test_single_job_release(make_instance):
    """测试单个作业：负载 4、释放时间 2 时 C* = 6"""
    sol = solve_relaxation(make_instance([[["a"]]], demands=[[4]], releases=[2]))
    assert sol.c_star == pytest.approx([6.0])
    assert sol.lp_objective == pytest.approx(6.0)
    assert sol.order == [0]


def test_base_constraints(make_instance):
    """测试基础约束：每个作业一条 C ≥ r + 1，每个有负载的有限节点一条"""
    inst = make_instance([[["a", "b"]], [["b", "c"]]], capacities={"a": 2, "c": UNBOUNDED}, releases=[0, 1],
                         demands=[[2], [3]])
    rows = build_base_constraints(inst)
    assert [(r.coefficients, r.rhs) for r in rows] == [
        ([1.0, 0.0], 1.0),
        ([1.0, 0.0], 1.0),
        ([1.0, 0.0], 2.0),
        ([0.0, 1.0], 2.0),
        ([0.0, 1.0], 4.0),
    ]


def test_triangle_and_fig4(triangle, fig4):
    """测试三角形 LP = 2，fig4 LP = 3"""
    assert solve_relaxation(triangle).lp_objective == pytest.approx(2.0)
    assert solve_relaxation(fig4).lp_objective == pytest.approx(3.0)


def test_separation_finds_prefix(make_instance):
    """测试两个单位作业共用一个节点、C = (1, 1) 时违反量为 1 的子集约束"""
    inst = make_instance([[["a"]], [["a"]]])
    cuts = separate(inst, [1.0, 1.0])
    assert len(cuts) == 1
    assert cuts[0].machine == "a"
    assert cuts[0].jobs == [0, 1]
    assert cuts[0].rhs == pytest.approx(3.0)
    assert cuts[0].violation == pytest.approx(1.0)
    assert separate(inst, [1.0, 2.0]) == []


def test_cutting_plane_converges(make_instance):
    """测试加入子集约束后 LP 值从 2 升到 3"""
    inst = make_instance([[["a"]], [["a"]]])
    sol = solve_relaxation(inst)
    assert sol.lp_objective == pytest.approx(3.0)
    assert sol.cuts_added == 1
    assert sol.iterations == 2
    assert sum(sol.c_star) == pytest.approx(3.0)


def test_weighted_order(make_instance):
    """测试权重大的作业排在前面"""
    inst = make_instance([[["a"]], [["a"]]], weights=[1.0, 2.0])
    sol = solve_relaxation(inst)
    assert sol.c_star == pytest.approx([2.0, 1.0])
    assert sol.order == [1, 0]
    assert sol.rank_of() == [2, 1]
    assert sol.lp_objective == pytest.approx(4.0)


def test_round_limit(make_instance):
    """测试割平面轮数达到上限时报错并带回最后一轮的解"""
    inst = make_instance([[["a"]], [["a"]]])
    with pytest.raises(RelaxationIterationError) as e:
        solve_relaxation(inst, max_rounds=1)
    assert e.value.partial.lp_objective == pytest.approx(2.0)


def test_unbounded_nodes_only(make_instance):
    """测试只经过无限容量节点的作业只受 C ≥ r + 1 约束"""
    inst = make_instance([[["a"]], [["a"]]], capacities={"a": UNBOUNDED}, releases=[3, 0])
    sol = solve_relaxation(inst)
    assert sol.c_star == pytest.approx([4.0, 1.0])


def test_job_order_ties():
    """测试非常接近的 C 值视为并列，按编号排序"""
    assert job_order([2.0, 1.0, 2.0000000000001]) == [1, 0, 2]
    assert job_order([3.0, 3.0, 1.0]) == [2, 0, 1]


def test_standard_deadlines():
    """测试标准截止时间 D = 2C*"""
    sol = LpSolution(c_star=[1.0, 4.0], order=[0, 1], lp_objective=5.0)
    dl = deadlines(sol, DeadlineMode.STANDARD)
    assert dl.d == pytest.approx([2.0, 8.0])
    assert dl.order == [0, 1]


def test_improved_deadlines():
    """测试改进截止时间 D = (2p/(p+1)) C*"""
    sol = LpSolution(c_star=[1.0, 4.0], order=[0, 1], lp_objective=5.0)
    dl = deadlines(sol, DeadlineMode.IMPROVED)
    assert dl.d == pytest.approx([1.0, 16 / 3])
    assert dl.as_fractions() == [Fraction(1), Fraction(16, 3)]
    assert dl.rank_of() == [1, 2]


def test_deadline_set_from_values():
    """测试直接给定截止时间时名次按截止时间排列"""
    dl = DeadlineSet.from_values([5.0, 1.0, 3.0])
    assert dl.order == [1, 2, 0]
    assert dl.rank_of() == [3, 1, 2]


def test_prefix_bound_detects_violation(make_instance):
    """测试人为给出过小的 C 值时下界检查报告违反"""
    inst = make_instance([[["a"]]], demands=[[4]])
    bad = LpSolution(c_star=[0.5], order=[0], lp_objective=0.5)
    report = check_lp_prefix_bound(inst, bad)
    assert not report.ok
    assert {v.kind for v in report.violations} == {"half", "sharpened"}
    assert report.checked == 2


def test_deadline_bound_detects_violation(make_instance):
    """测试截止时间小于前缀负载时报告违反"""
    inst = make_instance([[["a"]]], demands=[[4]])
    report = check_deadline_bound(inst, DeadlineSet.from_values([3.0]))
    assert not report.ok
    assert report.violations[0].kind == "deadline"
    assert report.violations[0].bound == pytest.approx(4.0)


@pytest.mark.parametrize("seed", range(1, 31))
def test_bounds_hold_on_random_instances(seed):
    """测试随机实例上 LP 解满足前缀负载下界，两种截止时间都满足负载界"""
    inst = gen_random(4, 6, 3, 3, 3, 4, 2, seed)
    sol = solve_relaxation(inst)
    assert check_lp_prefix_bound(inst, sol).ok
    assert check_lp_prefix_bound(inst, sol, mode=DeadlineMode.STANDARD).ok
    for mode in DeadlineMode:
        assert check_deadline_bound(inst, deadlines(sol, mode)).ok
    assert not separate(inst, sol.c_star)


def test_improved_deadlines_monotone():
    """测试改进截止时间仍按名次非降"""
    for seed in range(1, 21):
        sol = solve_relaxation(gen_random(5, 6, 3, 3, 2, 3, 1, seed))
        dl = deadlines(sol, DeadlineMode.IMPROVED)
        ordered = [dl.d[k] for k in dl.order]
        assert all(x <= y + 1e-9 for x, y in zip(ordered, ordered[1:]))


@pytest.mark.parametrize("seed", range(1, 11))
def test_bipartite_mode_agrees(seed):
    """测试二部实例上两种负载计算方式给出相同的 LP 值"""
    inst = gen_bipartite(3, 3, 0.5, 3, 2, seed)
    assert bipartite_loads(inst).entries == inst.loads().entries
    general = solve_relaxation(inst, RelaxationMode.GENERAL)
    bipartite = solve_relaxation(inst, RelaxationMode.BIPARTITE)
    assert bipartite.mode == RelaxationMode.BIPARTITE
    assert bipartite.lp_objective == pytest.approx(general.lp_objective)


def test_bipartite_mode_rejects(make_instance):
    """测试非二部实例在二部模式下被拒绝"""
    with pytest.raises(BipartiteModeError):
        bipartite_loads(make_instance([[["a", "b", "c"]]]))
    with pytest.raises(BipartiteModeError):
        bipartite_loads(make_instance([[["a", "b"], ["b", "c"]]]))
