import argparse
import json

import pytest

from commands.common import parse_seed_range
from utils.files import load_document, load_instance, save_instance


@pytest.fixture
def triangle_file(tmp_path, triangle):
    path = tmp_path / "triangle.json"
    save_instance(triangle, path)
    return str(path)


def test_gen_to_stdout(cli):
    """测试生成实例写到标准输出"""
    result = cli("gen", "--kind", "triangle")
    assert result.exit_code == 0
    document = result.json()
    assert document["name"] == "triangle"
    assert len(document["coflows"][0]["flows"]) == 3


def test_gen_random_deterministic(cli, tmp_path):
    """测试相同种子生成相同文件"""
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli("gen", "--kind", "random", "--seed", "5", "-o", str(a)).exit_code == 0
    assert cli("gen", "--kind", "random", "--seed", "5", "-o", str(b)).exit_code == 0
    assert a.read_text(encoding="utf-8") == b.read_text(encoding="utf-8")
    assert load_instance(a).seed == 5


def test_gen_coloring_and_edge_paths(cli, tmp_path):
    """测试着色实例与边容量实例的生成"""
    result = cli("gen", "--kind", "coloring", "--graph", "c5")
    assert result.json()["name"] == "coloring-c5"
    path = tmp_path / "edges.json"
    assert cli("gen", "--kind", "edge-path", "--seed", "2", "-o", str(path)).exit_code == 0
    assert "edges" in json.loads(path.read_text(encoding="utf-8"))


def test_gen_bad_arguments(cli):
    """测试参数错误的退出码为 2"""
    assert cli("gen", "--kind", "nonsense").exit_code == 2
    assert cli("gen", "--kind", "random", "--coflows", "0").exit_code == 2


def test_solve_text(cli, triangle_file):
    """测试文本输出"""
    result = cli("solve", triangle_file)
    assert result.exit_code == 0
    assert "LP 下界: 2" in result.out
    assert "[通过] schedule_feasible" in result.out


def test_solve_json(cli, triangle_file, tmp_path):
    """测试 JSON 输出、调度导出与定向导出"""
    schedule_path = tmp_path / "out" / "schedule.json"
    orientation_path = tmp_path / "orientation.txt"
    result = cli(
        "solve", triangle_file, "--json", "--oracle",
        "--schedule-out", str(schedule_path), "--dump-orientation", str(orientation_path),
    )
    assert result.exit_code == 0
    report = result.json()
    assert report["lp"]["lp_objective"] == pytest.approx(2.0)
    assert report["schedule"]["objective"] == 3.0
    assert report["oracle"]["objective"] == 3.0
    assert report["ratio"]["lam"] == 2
    assert report["reduction"] is None
    assert all(report["checks"].values())
    assert schedule_path.exists()
    assert orientation_path.exists()

    checked = cli("validate", triangle_file, "--schedule", str(schedule_path), "--json")
    assert checked.exit_code == 0
    assert checked.json()["schedule"]["ok"] is True


def test_solve_improved_and_capacities(cli, tmp_path):
    """测试改进截止时间与一般容量模式"""
    path = tmp_path / "caps.json"
    assert cli("gen", "--kind", "random", "--seed", "3", "--max-capacity", "3", "-o", str(path)).exit_code == 0
    assert cli("solve", str(path), "--mode", "capacities", "--deadlines", "improved", "--json").exit_code == 0
    result = cli("solve", str(path), "--mode", "unit")
    if any(n.capacity != 1 for n in load_instance(path).nodes):
        assert result.exit_code == 2


def test_solve_edge_instance(cli, tmp_path):
    """测试边容量实例先归约再求解"""
    path = tmp_path / "edges.json"
    cli("gen", "--kind", "edge-path", "--seed", "4", "--max-capacity", "2", "-o", str(path))
    result = cli("solve", str(path), "--mode", "capacities", "--json")
    assert result.exit_code == 0
    report = result.json()
    lam_edges = load_document(path).max_edge_count()
    assert report["reduction"] == {"lambda_edges": lam_edges, "circuit_bound": 2 * lam_edges + 1}
    assert report["ratio"]["lam_finite"] == lam_edges


def test_solve_errors(cli, tmp_path):
    """测试文件不存在、解析失败与参数非法"""
    assert cli("solve", str(tmp_path / "missing.json")).exit_code == 4
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert cli("solve", str(bad)).exit_code == 4
    assert cli("solve", str(bad), "--tol", "2").exit_code == 2
    assert cli("solve", str(bad), "--mode", "weird").exit_code == 2


def test_solve_rejects_invalid_instance(cli, tmp_path, make_instance):
    """测试不合法实例在求解时被拒绝"""
    path = tmp_path / "invalid.json"
    save_instance(make_instance([[["a", "b", "a"]]]), path)
    assert cli("solve", str(path)).exit_code == 4


def test_validate_invalid_instance(cli, tmp_path, make_instance):
    """测试 validate 报告实例中的问题"""
    path = tmp_path / "invalid.json"
    save_instance(make_instance([[["a", "b", "a"]]]), path)
    result = cli("validate", str(path), "--json")
    assert result.exit_code == 3
    report = result.json()
    assert report["ok"] is False
    assert report["instance"]["violations"][0]["code"] == "path_not_simple"

    text = cli("validate", str(path))
    assert "path_not_simple" in text.out


def test_validate_bad_schedule(cli, triangle_file, tmp_path):
    """测试 validate 发现不可行调度"""
    schedule = {
        "slots": [{"t": 1, "units": [{"job": 0, "flow": j, "copy": 0} for j in range(3)]}],
        "completion": [1],
        "objective": 1.0,
    }
    path = tmp_path / "schedule.json"
    path.write_text(json.dumps(schedule), encoding="utf-8")
    result = cli("validate", triangle_file, "--schedule", str(path), "--json")
    assert result.exit_code == 3
    codes = {v["code"] for v in result.json()["schedule"]["violations"]}
    assert codes == {"capacity_exceeded"}


def test_oracle_command(cli, triangle_file, tmp_path):
    """测试 oracle 命令"""
    out = tmp_path / "optimal.json"
    result = cli("oracle", triangle_file, "--json", "--schedule-out", str(out))
    assert result.exit_code == 0
    report = result.json()
    assert report["objective"] == 3.0
    assert report["proven_optimal"] is True
    assert report["max_single_job_load"] == [2]
    assert report["greedy_objective"] >= 3.0
    assert out.exists()


def test_solve_output_flag(cli, triangle_file, tmp_path):
    """测试 -o 把调度写入文件，oracle 命令同样支持"""
    schedule_path = tmp_path / "schedule.json"
    assert cli("solve", triangle_file, "-o", str(schedule_path)).exit_code == 0
    assert cli("validate", triangle_file, "--schedule", str(schedule_path), "--json").json()["schedule"]["ok"] is True

    optimal_path = tmp_path / "optimal.json"
    assert cli("oracle", triangle_file, "--output", str(optimal_path)).exit_code == 0
    assert optimal_path.exists()


def test_oracle_over_cap(cli, triangle_file):
    """测试超过单位上限时退出码为 2"""
    assert cli("oracle", triangle_file, "--unit-cap", "2").exit_code == 2
    assert cli("oracle", triangle_file, "--unit-cap", "0").exit_code == 2


def test_certify_named_instances(cli):
    """测试固定实例集合上的验证全部通过"""
    result = cli("certify", "--profile", "named-instances", "--json")
    assert result.exit_code == 0, result.out
    report = result.json()
    assert report["passed"] is True
    assert [case["seed"] for case in report["cases"]] == list(range(6))
    assert report["summary"]["expected_optimum"] == {"passed": 6, "failed": 0}
    assert report["summary"]["chromatic_matches"] == {"passed": 4, "failed": 0}


def test_certify_profile_alias(cli):
    """测试 paper-figures 是 named-instances 的别名"""
    result = cli("certify", "--profile", "paper-figures", "--json")
    assert result.exit_code == 0, result.out
    report = result.json()
    assert report["profile"] == "named-instances"
    assert len(report["cases"]) == 6


def test_certify_single_seed_with_oracle(cli):
    """测试 --seed 只验证一个种子，--oracle 要求每个实例都有精确最优值"""
    result = cli("certify", "--profile", "tiny", "--seed", "3", "--oracle", "--json")
    assert result.exit_code == 0, result.out
    cases = result.json()["cases"]
    assert [case["seed"] for case in cases] == [3]
    assert cases[0]["oracle_objective"] is not None
    assert cases[0]["alg_objective"] >= cases[0]["oracle_objective"]

    over_cap = cli("certify", "--profile", "small", "--seed", "1", "--oracle", "--unit-cap", "2", "--json")
    assert over_cap.exit_code == 3
    assert over_cap.json()["cases"][0]["error"]

    assert cli("certify", "--seed", "1", "--seeds", "1..2").exit_code == 2


@pytest.mark.parametrize("profile", ["tiny", "capacities", "bipartite", "reductions"])
def test_certify_profiles(cli, profile):
    """测试各个 profile 在几个种子上通过"""
    result = cli("certify", "--profile", profile, "--seeds", "1..4")
    assert result.exit_code == 0, result.out
    assert "全部通过" in result.out


def test_certify_improved_deadlines(cli):
    """测试改进截止时间下的批量验证"""
    result = cli("certify", "--profile", "tiny", "--seeds", "1..6", "--deadlines", "improved", "--json")
    assert result.exit_code == 0
    assert all(case["bound_name"].startswith("2nλ/(n+1)") for case in result.json()["cases"])


def test_certify_parallel_matches_serial(cli):
    """测试多进程与单进程的结果相同"""
    serial = cli("certify", "--profile", "tiny", "--seeds", "1..4", "--json").json()
    parallel = cli("certify", "--profile", "tiny", "--seeds", "1..4", "--workers", "2", "--json").json()
    assert serial["cases"] == parallel["cases"]


def test_certify_bad_arguments(cli):
    """测试批量验证的参数错误"""
    assert cli("certify", "--seeds", "5..1").exit_code == 2
    assert cli("certify", "--seeds", "1..2", "--workers", "0").exit_code == 2
    assert cli("certify", "--profile", "huge").exit_code == 2


def test_parse_seed_range():
    """测试种子范围解析"""
    assert parse_seed_range("1..3") == range(1, 4)
    assert parse_seed_range("7") == range(7, 8)
    with pytest.raises(argparse.ArgumentTypeError):
        parse_seed_range("a..b")


def test_no_command(cli):
    """测试缺少子命令"""
    assert cli().exit_code == 2


def test_history(cli, tmp_path):
    """测试 history 列出、查看和删除 certify 写入的记录"""
    url = f"sqlite:///{tmp_path / 'certify.db'}"
    assert cli("certify", "--profile", "tiny", "--seeds", "1..3", "--db", url).exit_code == 0
    assert cli("certify", "--profile", "paper-figures", "--db", url).exit_code == 0

    runs = cli("history", "--db", url, "--json").json()
    assert [r["profile"] for r in runs] == ["named-instances", "tiny"]
    assert [r["profile"] for r in cli("history", "--db", url, "--offset", "1", "--json").json()] == ["tiny"]
    assert cli("history", "--db", url, "--profile", "tiny", "--limit", "1", "--json").json()[0]["seed_to"] == 3

    tiny_id = runs[1]["id"]
    detail = cli("history", "--db", url, "--run", str(tiny_id), "--json").json()
    assert [s["seed"] for s in detail["seeds"]] == [1, 2, 3]
    assert "种子 2" in cli("history", "--db", url, "--run", str(tiny_id)).out

    assert cli("history", "--db", url, "--delete", str(tiny_id), "--json").json() == {"deleted": tiny_id, "seeds": 3}
    assert [r["profile"] for r in cli("history", "--db", url, "--json").json()] == ["named-instances"]
    assert cli("history", "--db", url, "--run", str(tiny_id)).exit_code == 2
    assert cli("history", "--db", url, "--limit", "0").exit_code == 2


def test_history_empty(cli, tmp_path):
    """测试空数据库"""
    result = cli("history", "--db", f"sqlite:///{tmp_path / 'empty.db'}")
    assert result.exit_code == 0
    assert "没有验证记录" in result.out
