"""API服务器模块

提供只读 REST API 的 Flask 服务器实现。
"""

from flask import Flask, jsonify
import logging
import os
import sys

# 确保可以导入src目录下的模块
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(__file__))))

from src.core.errors import QCalcError, QUsageError

# 设置日志
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger('api_server')

# 创建Flask应用
app = Flask(__name__)

# 导入路由
from .routes import config_routes, function_routes, verify_routes

# 注册路由蓝图
app.register_blueprint(function_routes.function_bp, url_prefix='/api/functions')
app.register_blueprint(verify_routes.verify_bp, url_prefix='/api/verify')
app.register_blueprint(config_routes.config_bp, url_prefix='/api/config')


# 错误处理
@app.errorhandler(QCalcError)
def calc_error(error: QCalcError):
    # 用法错误 400，数值错误 422
    code = 400 if isinstance(error, QUsageError) else 422
    logger.warning(f"请求失败 ({code}): {type(error).__name__}: {error.message}")
    return jsonify({
        'status': 'error',
        'message': error.message,
        'error': type(error).__name__,
        'details': error.to_dict()['details'],
        'code': code
    }), code


@app.errorhandler(404)
def not_found(error):
    return jsonify({
        'status': 'error',
        'message': '资源不存在',
        'code': 404
    }), 404


@app.errorhandler(500)
def server_error(error):
    return jsonify({
        'status': 'error',
        'message': '服务器内部错误',
        'code': 500
    }), 500


# API入口路由
@app.route('/api', methods=['GET'])
def api_index():
    return jsonify({
        'status': 'success',
        'message': 'q-Sturm 工作台 API服务',
        'version': '0.1.0',
        'endpoints': [
            '/api/functions/<name>',
            '/api/verify/<suite>',
            '/api/config'
        ]
    })


def start_server(host='127.0.0.1', port=5000, debug=False):
    """启动API服务器

    Args:
        host: 主机地址，默认为127.0.0.1
        port: 端口号，默认为5000
        debug: 是否开启调试模式，默认为False
    """
    logger.info(f"Starting API server on {host}:{port}")
    app.run(host=host, port=port, debug=debug)


if __name__ == '__main__':
    start_server(debug=True)
