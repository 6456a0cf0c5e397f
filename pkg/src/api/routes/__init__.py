# API路由模块

"""
API路由模块提供函数求值、校验与配置查询的路由实现。
"""
