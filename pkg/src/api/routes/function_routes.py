"""函数求值路由模块

提供 q-特殊函数求值的API端点。
"""

from flask import Blueprint, jsonify, request
import logging

from mpmath import mp

from src.core.errors import QUsageError
from src.core.qcore import format_real, json_real, q_gamma
from src.core.qspecial import hahn_exton_J, j_alpha, q_cos, q_exp_E, q_exp_e, q_sin
from .params import argument_from, float_param, q_param_from

# 设置日志
logger = logging.getLogger('function_routes')

# 创建蓝图
function_bp = Blueprint('functions', __name__)

SERIES_FUNCTIONS = {
    'qcos': lambda x, qp, alpha: q_cos(x, qp),
    'qsin': lambda x, qp, alpha: q_sin(x, qp),
    'jalpha': lambda x, qp, alpha: j_alpha(x, alpha, qp),
}

SCALAR_FUNCTIONS = {
    'qexp_E': lambda x, qp, alpha: q_exp_E(x, qp),
    'qexp_e': lambda x, qp, alpha: q_exp_e(x, qp),
    'qgamma': lambda x, qp, alpha: q_gamma(qp.resolve(x), qp),
    'hahn_exton': lambda x, qp, alpha: hahn_exton_J(x, alpha, qp),
}


@function_bp.route('/', methods=['GET'])
def list_functions():
    """获取可求值的函数列表"""
    return jsonify({
        'status': 'success',
        'data': {
            'functions': sorted(list(SERIES_FUNCTIONS) + list(SCALAR_FUNCTIONS))
        }
    })


@function_bp.route('/<name>', methods=['GET'])
def evaluate(name: str):
    """求值函数

    查询参数:
        x 或 k: 自变量，k 表示网格点 q^k
        q 或 q_structural: 底数
        alpha: jalpha / hahn_exton 的阶，默认为0

    Returns:
        JSON响应，包含值与求值报告
    """
    if name not in SERIES_FUNCTIONS and name not in SCALAR_FUNCTIONS:
        raise QUsageError(f"未知函数: {name}")
    qp = q_param_from(request)
    x = argument_from(request)
    alpha = float_param(request, 'alpha', 0.0)

    if name in SERIES_FUNCTIONS:
        report = SERIES_FUNCTIONS[name](x, qp, alpha)
        data = report.to_dict()
        data['text'] = format_real(report.value)
    else:
        with mp.workdps(max(mp.dps, qp.precision.target_digits + 5)):
            value = SCALAR_FUNCTIONS[name](x, qp, alpha)
        data = {'value': json_real(value), 'text': format_real(value)}

    logger.info(f"求值 {name}: {data['text']}")
    return jsonify({
        'status': 'success',
        'data': {
            'function': name,
            'q': json_real(qp.base()),
            'report': data
        }
    })
