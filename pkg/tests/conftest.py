import os

# 必须在导入 config 之前设置
os.environ.setdefault("COFLOW_CONFIG", os.path.join(os.path.dirname(__file__), "config.cfg"))

import json

import pytest
from sqlmodel import SQLModel

from commands import main
from models import get_engine, get_session, init_db
from models.instance import Instance, NodeSpec, Coflow, Flow
from utils.generators import gen_triangle, gen_fig4
from utils.log import setup_logging

setup_logging()


def _make_instance(flows_per_job: list[list[list[str]]], capacities: dict[str, int | str] | None = None,
                  releases: list[int] | None = None, weights: list[float] | None = None,
                  demands: list[list[int]] | None = None) -> Instance:
    """测试用的小实例：flows_per_job[k][j] 是作业 k 第 j 个 flow 的路径"""
    node_ids = sorted({v for job in flows_per_job for path in job for v in path} | set(capacities or {}))
    capacities = capacities or {}
    return Instance(
        name="test",
        nodes=[NodeSpec(id=v, capacity=capacities.get(v, 1)) for v in node_ids],
        coflows=[
            Coflow(
                weight=(weights or [1.0] * len(flows_per_job))[k],
                release=(releases or [0] * len(flows_per_job))[k],
                flows=[
                    Flow(path=path, demand=(demands[k][j] if demands else 1))
                    for j, path in enumerate(job)
                ],
            )
            for k, job in enumerate(flows_per_job)
        ],
    )


@pytest.fixture
def make_instance():
    return _make_instance


@pytest.fixture
def triangle() -> Instance:
    return gen_triangle()


@pytest.fixture
def fig4() -> Instance:
    return gen_fig4()


@pytest.fixture
def engine():
    """内存数据库，每个测试重新建表"""
    test_engine = get_engine("sqlite://")
    init_db(test_engine)
    yield test_engine
    SQLModel.metadata.drop_all(test_engine)
    test_engine.dispose()


@pytest.fixture
def session(engine):
    with get_session(engine) as session:
        yield session
        session.rollback()


class CliResult:
    def __init__(self, exit_code: int, out: str, err: str):
        self.exit_code = exit_code
        self.out = out
        self.err = err

    def json(self):
        return json.loads(self.out)


@pytest.fixture
def cli(capsys):
    """调用命令行入口，返回退出码和标准输出"""

    def invoke(*argv: str) -> CliResult:
        capsys.readouterr()
        code = main(list(argv))
        captured = capsys.readouterr()
        return CliResult(code, captured.out, captured.err)

    return invoke
