# Core modules for q-Sturm Workbench

"""
核心模块包含网格与积分、q-特殊函数、Sturm–Liouville 求解和 q-Bessel 结果的数值实现。
"""
