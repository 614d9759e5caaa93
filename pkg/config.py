import os

from sqlmodel import SQLModel
from charset_normalizer import from_bytes
from loguru import logger
import toml

class Config(SQLModel):
    debug: bool = False
    testing: bool = False

    log_level: str = "INFO"
    """标准错误输出的日志级别，调试转储请使用环境变量 COFLOW_LOG"""

    lp_feasibility_tol: float = 1e-9
    """单纯形可行性容差"""

    lp_optimality_tol: float = 1e-9
    """单纯形最优性（检验数）容差"""

    lp_max_iterations: int = 50000
    """单次求解的最大转轴次数，Bland 规则下正常情况远达不到"""

    separation_tol: float = 1e-7
    """割平面分离的相对违反容差：违反量 > tol * max(1, |rhs|) 才加割"""

    cutting_plane_max_rounds: int = 1000
    """割平面循环的最大轮数，超过说明数值有问题"""

    check_tol: float = 1e-6
    """引理/定理界检查的松弛量"""

    expansion_cap: int = 100000
    """超图展开的最大单位数（伪多项式展开的保护）"""

    oracle_unit_cap: int = 12
    """精确枚举求解器允许的最大需求单位数"""

    oracle_horizon_cap: int = 200
    """精确枚举求解器允许的最大时间范围"""

    chromatic_vertex_cap: int = 12
    """精确色数计算允许的最大顶点数"""

    certify_workers: int = 1
    """批量验证时并行的进程数"""

    database_url: str = "sqlite:///./certify.db"
    """批量验证历史记录所用的 SQL 数据库 URL"""

    max_listed_violations: int = 20
    """文本输出中最多列出多少条违反项"""

    @staticmethod
    def load_from_file(path: str = "config.cfg") -> "Config":
        # 此时日志尚未配置，载入情况由 setup_logging 报告
        if not os.path.exists(path):
            return Config()
        try:
            with open(path, "rb") as f:
                if guessed_str := from_bytes(f.read()).best():
                    return Config.model_validate(toml.loads(str(guessed_str)))
                else:
                    raise ValueError("无法识别配置文件")
        except Exception as e:
            logger.exception(e)
            logger.error("配置文件有误")
            exit(4)

if __name__ == "__main__":
    config = Config.load_from_file("../config.cfg")
    print(config)
else:
    config_path = os.environ.get("COFLOW_CONFIG", "config.cfg")
    config = Config.load_from_file(config_path)
