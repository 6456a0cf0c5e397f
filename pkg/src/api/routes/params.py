"""查询参数解析

把 URL 查询参数转成底数参数与自变量，格式错误一律报用法错误（400）。
"""

from typing import Optional

from flask import Request

from src.core.config_manager import ConfigManager
from src.core.errors import QCalcError, QUsageError
from src.core.qcore import Argument, QParam, QPoint, make_q_param, structural_q

config_manager = ConfigManager()


def _number(request: Request, name: str, kind=float) -> Optional[float]:
    raw = request.args.get(name)
    if raw is None or raw == '':
        return None
    try:
        return kind(raw)
    except ValueError:
        raise QUsageError(f"参数 {name} 格式错误", {name: raw})


def q_param_from(request: Request) -> QParam:
    """?q= 或 ?q_structural=；都缺省时用默认配置"""
    q = _number(request, 'q')
    m = _number(request, 'q_structural', int)
    precision = request.args.get('precision', config_manager.get_config_value('precision'))
    try:
        if m is not None:
            return structural_q(m, precision=precision)
        if q is None:
            return config_manager.to_run_config().q_param()
        return make_q_param(q, precision=precision)
    except ValueError:
        raise QUsageError("precision 必须是 binary64 或 extended", {"precision": precision})
    except QCalcError as e:
        raise QUsageError(e.message, e.details)


def argument_from(request: Request) -> Argument:
    """?x= 或 ?k=（x = q^k），二者必须恰好给出一个"""
    x = _number(request, 'x')
    k = _number(request, 'k', int)
    if (x is None) == (k is None):
        raise QUsageError("必须且只能给出 x 或 k 之一")
    return QPoint(k) if k is not None else x


def float_param(request: Request, name: str, default: float) -> float:
    value = _number(request, name)
    return default if value is None else value
