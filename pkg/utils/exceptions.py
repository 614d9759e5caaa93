from typing import Any


class PcsError(Exception):
    """
    所有领域异常的基类，
    exit_code 相当于 Web 接口里的 status_code，由命令行入口统一转换为退出码
    """
    exit_code: int = 3

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InstanceParseError(PcsError):
    """实例文件无法解析，detail 中带有字段/行号上下文"""
    exit_code = 4


class InstanceValidationError(PcsError):
    """实例文件能解析但违反不变量"""
    exit_code = 4

    def __init__(self, detail: str, violations: list | None = None):
        super().__init__(detail)
        self.violations = violations or []


class ReductionError(PcsError):
    """容量归约的输入不满足前置条件"""
    exit_code = 2


class BipartiteModeError(PcsError):
    """二部模式要求实例是二部的"""
    exit_code = 2


class CapExceeded(PcsError):
    """精确求解器/色数计算的规模超过上限"""
    exit_code = 2


class ExpansionCapExceeded(PcsError):
    """超图展开的单位数超过上限（伪多项式展开）"""
    exit_code = 3


class LpIterationLimitError(PcsError):
    """单纯形转轴次数超过上限"""
    exit_code = 3


class RelaxationIterationError(PcsError):
    """割平面轮数超过上限，partial 中保存了最后一次的候选解"""
    exit_code = 3

    def __init__(self, detail: str, partial: Any = None):
        super().__init__(detail)
        self.partial = partial


class SchedulingDefectError(PcsError):
    """调度结束时仍有未调度的单位，属于内部契约被破坏"""
    exit_code = 3
