"""配置路由模块

提供只读的配置查询API端点。
"""

from flask import Blueprint, jsonify
import logging

from .params import config_manager

# 设置日志
logger = logging.getLogger('config_routes')

# 创建蓝图
config_bp = Blueprint('config', __name__)


@config_bp.route('/', methods=['GET'])
def get_config():
    """获取默认运行配置

    Returns:
        JSON响应，包含完整配置
    """
    return jsonify({
        'status': 'success',
        'data': {
            'config': config_manager.config
        }
    })


@config_bp.route('/<path:key>', methods=['GET'])
def get_config_value(key: str):
    """获取指定配置项的值

    Args:
        key: 配置键名，支持嵌套键，如 grid.k_min

    Returns:
        JSON响应，包含配置值
    """
    value = config_manager.get_config_value(key)
    if value is None:
        return jsonify({
            'status': 'error',
            'message': f"配置项 {key} 不存在",
            'code': 404
        }), 404

    return jsonify({
        'status': 'success',
        'data': {
            'key': key,
            'value': value
        }
    })
