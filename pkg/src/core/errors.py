"""异常定义模块

q-微积分计算中使用的异常类型。所有异常都携带 details 字典，
命令行入口根据 exit_code 决定进程退出码。
"""

from typing import Any, Dict, Optional


class QCalcError(Exception):
    """数值计算异常基类"""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """转换为可序列化的字典"""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": {k: str(v) for k, v in self.details.items()},
        }


class QDomainError(QCalcError):
    """参数超出定义域（q 不在 (0,1)、非网格点等）"""


class QRangeError(QCalcError):
    """网格下标越界"""


class QPoleError(QCalcError):
    """无穷乘积分母为零（极点）"""


class QDivergenceError(QCalcError):
    """双边 Jackson 和发散"""


class QEvaluationError(QCalcError):
    """被积函数或级数出现非有限值"""


class QSingularityError(QCalcError):
    """前向代换主元或 Wronskian 乘积因子接近零"""


class QConditioningError(QCalcError):
    """最小二乘法方程病态"""


class QHypothesisError(QCalcError):
    """定理前提不满足（如 alpha <= -1/2）"""


class QUsageError(QCalcError):
    """命令行用法错误"""

    exit_code = 2


class QConfigError(QUsageError):
    """配置无效"""
