# q-Sturm Workbench

"""
q-Sturm 工作台：几何网格上的数值 q-微积分与 q-Sturm–Liouville 求解。
"""

__version__ = '0.1.0'
