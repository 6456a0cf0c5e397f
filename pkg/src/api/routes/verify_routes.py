"""校验路由模块

提供恒等式校验套件的API端点。
"""

from flask import Blueprint, jsonify, request
import logging

from src.core.errors import QUsageError
from src.core.verifier import SUITES, Verifier
from .params import q_param_from

# 设置日志
logger = logging.getLogger('verify_routes')

# 创建蓝图
verify_bp = Blueprint('verify', __name__)


@verify_bp.route('/', methods=['GET'])
def list_suites():
    return jsonify({
        'status': 'success',
        'data': {
            'suites': list(SUITES) + ['all']
        }
    })


@verify_bp.route('/<suite>', methods=['GET'])
def run_suite(suite: str):
    """运行校验套件

    查询参数:
        q 或 q_structural: 底数

    Returns:
        JSON响应，包含 VerifyReport
    """
    if suite not in SUITES and suite != 'all':
        raise QUsageError(f"未知的校验套件: {suite}")
    qp = q_param_from(request)
    report = Verifier(qp).run(suite)
    logger.info(f"套件 {suite} 完成: {'通过' if report.passed else '未通过'}")
    return jsonify({
        'status': 'success',
        'data': report.to_dict(include_wall_clock=True)
    })
