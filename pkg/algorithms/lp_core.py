"""
小规模稠密线性规划：min c·x, s.t. A x ≥ b, x ≥ 0。

两阶段表格单纯形法，入基/出基都按 Bland 规则选取，保证不循环；
所有运算为 float64，容差来自配置。
"""
from enum import Enum
from typing import Literal

import numpy as np
from loguru import logger
from pydantic import ConfigDict, model_validator
from sqlmodel import SQLModel, Field

from config import config
from utils.exceptions import LpIterationLimitError
from utils.log import debug_dump_enabled


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpConstraint(SQLModel):
    """coefficients · x ≥ rhs"""
    model_config = ConfigDict(extra="forbid")

    coefficients: list[float]
    rhs: float
    relation: Literal[">="] = ">="


class LinearProgram(SQLModel):
    model_config = ConfigDict(extra="forbid")

    n_vars: int = Field(ge=1)
    objective: list[float]
    constraints: list[LpConstraint] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_lengths(self) -> "LinearProgram":
        if len(self.objective) != self.n_vars:
            raise ValueError(f"目标函数系数个数 {len(self.objective)} 与变量数 {self.n_vars} 不一致")
        for idx, row in enumerate(self.constraints):
            if len(row.coefficients) != self.n_vars:
                raise ValueError(f"第 {idx} 条约束的系数个数 {len(row.coefficients)} 与变量数 {self.n_vars} 不一致")
        return self

    def add_constraint(self, coefficients: list[float], rhs: float) -> None:
        if len(coefficients) != self.n_vars:
            raise ValueError(f"约束系数个数 {len(coefficients)} 与变量数 {self.n_vars} 不一致")
        self.constraints.append(LpConstraint(coefficients=list(coefficients), rhs=rhs))

    def matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(A, b, c)"""
        a = np.array([row.coefficients for row in self.constraints], dtype=float).reshape(len(self.constraints), self.n_vars)
        b = np.array([row.rhs for row in self.constraints], dtype=float)
        c = np.array(self.objective, dtype=float)
        return a, b, c


class LpResult(SQLModel):
    status: LpStatus
    values: list[float] | None = None
    objective_value: float | None = None
    iterations: int = 0

    duals: list[float] | None = None
    """每条 ≥ 约束的对偶乘子 y（y ≥ 0, Aᵀy ≤ c, b·y = c·x），只在 Optimal 时给出，供测试核对最优性"""


class _Tableau:
    """
    约束行在前，最后一行是检验数；最后一列是右端项。
    检验数行的右端项保存的是 -目标值
    """

    def __init__(self, rows: np.ndarray, rhs: np.ndarray, basis: list[int]):
        m, width = rows.shape
        self.table = np.zeros((m + 1, width + 1))
        self.table[:m, :width] = rows
        self.table[:m, -1] = rhs
        self.basis = list(basis)

    @property
    def m(self) -> int:
        return len(self.basis)

    def set_cost(self, cost: np.ndarray) -> None:
        cost_b = cost[self.basis]
        self.table[-1, :-1] = cost - cost_b @ self.table[:-1, :-1]
        self.table[-1, -1] = -float(cost_b @ self.table[:-1, -1])

    def pivot(self, row: int, col: int) -> None:
        self.table[row, :] /= self.table[row, col]
        for r in range(self.table.shape[0]):
            if r != row and self.table[r, col] != 0.0:
                self.table[r, :] -= self.table[r, col] * self.table[row, :]
        self.basis[row] = col

    def drop_row(self, row: int) -> None:
        self.table = np.delete(self.table, row, axis=0)
        del self.basis[row]

    def drop_columns(self, start: int, stop: int) -> None:
        self.table = np.delete(self.table, np.s_[start:stop], axis=1)

    def solution(self, width: int) -> np.ndarray:
        x = np.zeros(width)
        x[self.basis] = self.table[:-1, -1]
        return x


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise LpIterationLimitError(f"单纯形转轴次数超过上限 {self.limit}")


def _iterate(tab: _Tableau, n_cols: int, budget: _Budget, feas_tol: float, opt_tol: float, phase: int) -> LpStatus:
    """在前 n_cols 列上做单纯形迭代，直到最优或发现无界"""
    trace = debug_dump_enabled()
    while True:
        reduced = tab.table[-1, :n_cols]
        entering = np.flatnonzero(reduced < -opt_tol)
        if entering.size == 0:
            return LpStatus.OPTIMAL
        col = int(entering[0])

        column = tab.table[:-1, col]
        positive = np.flatnonzero(column > feas_tol)
        if positive.size == 0:
            return LpStatus.UNBOUNDED

        ratios = tab.table[positive, -1] / column[positive]
        best = ratios.min()
        ties = positive[ratios <= best + feas_tol]
        row = int(min(ties, key=lambda r: tab.basis[r]))

        budget.spend()
        if trace:
            logger.debug(
                f"阶段 {phase} 第 {budget.used} 次转轴: 第 {col} 列入基, 第 {tab.basis[row]} 列出基, "
                f"比值 {best:.6g}, 当前目标 {-tab.table[-1, -1]:.9g}\n"
                f"{np.array2string(tab.table, precision=4, suppress_small=True, max_line_width=200)}"
            )
        tab.pivot(row, col)


def solve_lp(
        lp: LinearProgram,
        feas_tol: float | None = None,
        opt_tol: float | None = None,
        max_iterations: int | None = None,
) -> LpResult:
    """
    求解线性规划

    参数:
        lp: 线性规划
        feas_tol: 可行性容差，默认取配置
        opt_tol: 最优性容差，默认取配置
        max_iterations: 两个阶段合计的转轴次数上限，默认取配置

    返回:
        LpResult，状态为 optimal / infeasible / unbounded

    异常:
        LpIterationLimitError: 转轴次数超过上限
    """
    feas_tol = config.lp_feasibility_tol if feas_tol is None else feas_tol
    opt_tol = config.lp_optimality_tol if opt_tol is None else opt_tol
    budget = _Budget(config.lp_max_iterations if max_iterations is None else max_iterations)

    a, b, c = lp.matrices()
    m, n = a.shape

    if m == 0:
        if np.any(c < -opt_tol):
            return LpResult(status=LpStatus.UNBOUNDED)
        return LpResult(status=LpStatus.OPTIMAL, values=[0.0] * n, objective_value=0.0, duals=[])

    # A x - s = b，右端为负的行整体取反，使初始人工变量基可行
    sign = np.where(b < 0, -1.0, 1.0)
    rows = np.hstack([sign[:, None] * a, -np.diag(sign)])
    standard = rows.copy()
    rows = np.hstack([rows, np.eye(m)])
    width = n + m

    tab = _Tableau(rows, sign * b, basis=list(range(width, width + m)))
    tab.set_cost(np.concatenate([np.zeros(width), np.ones(m)]))

    _iterate(tab, width + m, budget, feas_tol, opt_tol, phase=1)
    infeasibility = -tab.table[-1, -1]
    if infeasibility > feas_tol * max(1.0, float(np.abs(b).sum())):
        logger.debug(f"第一阶段目标 {infeasibility:.3g} > 0，问题不可行")
        return LpResult(status=LpStatus.INFEASIBLE, iterations=budget.used)

    # 把仍在基中的人工变量换出；换不出的行是冗余行
    kept_rows = list(range(m))
    r = 0
    while r < tab.m:
        if tab.basis[r] >= width:
            candidates = np.flatnonzero(np.abs(tab.table[r, :width]) > feas_tol)
            if candidates.size:
                budget.spend()
                tab.pivot(r, int(candidates[0]))
            else:
                logger.debug(f"约束 {kept_rows[r]} 冗余，已删除")
                tab.drop_row(r)
                del kept_rows[r]
                continue
        r += 1

    tab.drop_columns(width, width + m)
    cost = np.concatenate([c, np.zeros(m)])
    tab.set_cost(cost)

    status = _iterate(tab, width, budget, feas_tol, opt_tol, phase=2)
    if status == LpStatus.UNBOUNDED:
        return LpResult(status=status, iterations=budget.used)

    x = tab.solution(width)[:n]
    x[np.abs(x) < feas_tol] = 0.0
    x = np.maximum(x, 0.0)

    duals = np.zeros(m)
    if tab.m:
        basis_matrix = standard[np.ix_(kept_rows, tab.basis)]
        duals[kept_rows] = np.linalg.solve(basis_matrix.T, cost[tab.basis])
    duals *= sign

    objective = float(c @ x)
    logger.debug(f"线性规划最优: 目标 {objective:.9g}, {m} 条约束, 转轴 {budget.used} 次")
    return LpResult(
        status=LpStatus.OPTIMAL,
        values=[float(v) for v in x],
        objective_value=objective,
        iterations=budget.used,
        duals=[float(v) for v in duals],
    )
