"""结果文件写出模块

CSV 与 JSON 文件的写出。实数统一用 17 位有效数字，文件中不写时间戳，
相同输入得到逐字节相同的文件。
"""

import os
import csv
import json
import logging
from typing import Any, Dict, List, Optional, Sequence

from src.core.qcore import format_real
from src.core.qsturm import Potential, Solution, ode_residuals

logger = logging.getLogger('output_writer')

SOLUTION_HEADER = ['k', 'x', 'phi', 'theta', 'ode_residual']
BESSEL_ASYM_HEADER = ['alpha', 'K', 'lambda', 'x', 'j_alpha', 'principal', 'remainder', 'bound']


def ensure_output_dir(out_dir: str) -> str:
    """创建输出目录并返回其绝对路径"""
    os.makedirs(out_dir, exist_ok=True)
    return os.path.abspath(out_dir)


def write_csv(path: str, header: Sequence[str], rows: List[Sequence[Any]]) -> str:
    """写出 CSV 表；行内的值应已格式化为字符串"""
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)
    logger.info(f"已写出 {path} ({len(rows)} 行)")
    return path


def write_json(path: str, data: Any) -> str:
    """写出 JSON，键排序、缩进 2"""
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write('\n')
    logger.info(f"已写出 {path}")
    return path


def solution_rows(phi: Solution, theta: Solution, p: Potential) -> List[List[str]]:
    """k,x,phi,theta,ode_residual 行

    ode_residual 取 φ 与 θ 的较大者；最后两个网格点没有二阶差商，留空。
    """
    res_phi = ode_residuals(phi, p)
    res_theta = ode_residuals(theta, p)
    grid = phi.grid
    rows = []
    for k in grid.exponents():
        residual: Optional[str] = ""
        if k in res_phi and k in res_theta:
            residual = format_real(max(res_phi[k], res_theta[k]))
        rows.append([str(k), format_real(grid.point(k)), format_real(phi.u.at(k)),
                     format_real(theta.u.at(k)), residual])
    return rows


def write_solution_csv(out_dir: str, K: int, rows: List[List[str]]) -> str:
    return write_csv(os.path.join(out_dir, f"solution_K{K}.csv"), SOLUTION_HEADER, rows)


def write_coefficients_json(out_dir: str, K: int, records: List[Dict[str, Any]]) -> str:
    return write_json(os.path.join(out_dir, f"coefficients_K{K}.json"), records)


def write_bessel_asym_csv(out_dir: str, rows: List[List[Any]]) -> str:
    return write_csv(os.path.join(out_dir, "bessel_asym.csv"), BESSEL_ASYM_HEADER, rows)


def write_verify_json(out_dir: str, suite: str, report: Dict[str, Any]) -> str:
    return write_json(os.path.join(out_dir, f"verify_{suite}.json"), report)


def write_heat_json(out_dir: str, records: List[Dict[str, Any]]) -> str:
    return write_json(os.path.join(out_dir, "heat_kernel.json"), records)
