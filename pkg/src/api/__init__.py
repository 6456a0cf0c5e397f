# API模块

"""
API模块提供只读的 REST API 接口。
"""
