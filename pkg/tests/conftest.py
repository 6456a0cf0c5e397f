"""测试公共夹具"""

import os
import sys

import numpy as np
import pytest
from mpmath import mpf

# 添加项目根目录到Python路径
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from src.core.qcore import GridFunction, QGrid, make_q_param, structural_q  # noqa: E402


@pytest.fixture(scope="session")
def qp_half():
    """q = 1/2，满足 1-q = q"""
    return make_q_param(0.5)


@pytest.fixture(scope="session")
def qp_golden():
    """q^2 + q - 1 = 0，q ≈ 0.618"""
    return structural_q(2)


@pytest.fixture(scope="session")
def qp_plain():
    """非结构性底数"""
    return make_q_param(0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_grid(qp_half):
    return QGrid(qp_half, 0, 20)


@pytest.fixture
def sturm_grid(qp_half):
    return QGrid(qp_half, -10, 30)


@pytest.fixture
def random_function(rng):
    """生成 [-1, 1] 内均匀分布的随机网格函数"""
    def factory(grid):
        return GridFunction(grid, [mpf(float(v)) for v in rng.uniform(-1, 1, len(grid))])
    return factory
