"""q-Sturm 工作台主程序入口

提供命令行接口：函数求值、q-Sturm-Liouville 求解、恒等式校验、
q-Bessel 余项扫描、q-热核计算，以及只读 API 服务器。

退出码: 0 成功，1 定义域或数值失败，2 用法错误。
"""

import os
import sys
import argparse
import logging
from typing import Any, Callable, Dict, List, Optional, Tuple

# 添加项目根目录到Python路径
current_file = os.path.abspath(__file__)
src_dir = os.path.dirname(current_file)
project_root = os.path.dirname(src_dir)
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from mpmath import mp

from src.core.config_manager import ConfigManager, RunConfig
from src.core.errors import QCalcError, QDomainError, QHypothesisError, QUsageError
from src.core.qcore import (
    INF, Argument, QGrid, QParam, QPoint, format_real, json_real, q_gamma, q_pochhammer,
)
from src.core.qspecial import hahn_exton_J, j_alpha, q_cos, q_exp_E, q_exp_e, q_sin
from src.core.qsturm import (
    BoundaryParams, Coupling, Potential, Problem, coeffs_fitted, coeffs_integral,
    main_identity_residual, parse_potential_spec, solve,
)
from src.core.qbessel import bessel_remainder, heat_kernel
from src.core.verifier import SUITES, Verifier
from src.utils import output_writer
from src.utils.cli_interface import (
    print_error, print_header, print_info, print_success, print_warning, show_key_values,
    show_rows, show_verify_report,
)
from src.utils.environment import check_environment, describe_environment
from src.utils.task_manager import TaskManager

# 设置日志
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger('qsturm_workbench')

EVAL_FUNCTIONS = ("qcos", "qsin", "qexp_E", "qexp_e", "jalpha", "qgamma", "pochhammer",
                  "hahn_exton")
VERIFY_WINDOW = (-12, 20)


# ---------------------------------------------------------------- 参数解析辅助

def parse_int_list(text: str) -> List[int]:
    """解析 "8,10,12"、"2:12" 或二者的组合（区间两端都包含）

    Raises:
        QUsageError: 格式错误或结果为空
    """
    values: List[int] = []
    try:
        for part in text.split(','):
            part = part.strip()
            if not part:
                continue
            if ':' in part:
                lo, hi = part.split(':')
                values.extend(range(int(lo), int(hi) + 1))
            else:
                values.append(int(part))
    except ValueError:
        raise QUsageError(f"无法解析整数列表: {text}")
    if not values:
        raise QUsageError(f"整数列表为空: {text}")
    return values


def parse_float_list(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise QUsageError(f"无法解析数值列表: {text}")
    if not values:
        raise QUsageError(f"数值列表为空: {text}")
    return values


def parse_window(text: Optional[str]) -> Optional[Tuple[int, int]]:
    if text is None:
        return None
    try:
        lo, hi = text.split(':')
        return int(lo), int(hi)
    except ValueError:
        raise QUsageError(f"拟合窗口格式应为 lo:hi: {text}")


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """默认值 < 配置文件 < 命令行参数"""
    config_manager = ConfigManager(getattr(args, 'config', None))
    config_manager.apply_overrides({
        "q": getattr(args, 'q', None),
        "q_structural": getattr(args, 'q_structural', None),
        "grid.k_min": getattr(args, 'kmin', None),
        "grid.k_max": getattr(args, 'kmax', None),
        "tolerances.prod": getattr(args, 'tol_prod', None),
        "tolerances.tail": getattr(args, 'tol_tail', None),
        "tolerances.pivot": getattr(args, 'tol_pivot', None),
        "tolerances.fit": getattr(args, 'tol_fit', None),
        "precision": getattr(args, 'precision', None),
        "jobs": getattr(args, 'jobs', None),
        "out_dir": getattr(args, 'out', None),
        "coupling": getattr(args, 'coupling', None),
    })
    return config_manager.to_run_config()


# ---------------------------------------------------------------- 进程池任务（模块级，可 pickle）

def solve_task(item: Tuple[int, Potential, float, Optional[Tuple[int, int]], float, float]
               ) -> Dict[str, Any]:
    """单个 λ = q^{-K}: 求解 E1/E2，提取两种系数并计算主恒等式残差"""
    K, potential, alpha_bc, window, pivot_tol, fit_tol = item
    lam = QPoint(-K)
    phi = solve(potential, lam, BoundaryParams(alpha_bc, Problem.E1), pivot_tol)
    theta = solve(potential, lam, BoundaryParams(alpha_bc, Problem.E2), pivot_tol)

    records = []
    for method in ("fitted", "integral"):
        if method == "fitted":
            cE1 = coeffs_fitted(phi, window, fit_tol)
            cE2 = coeffs_fitted(theta, window, fit_tol)
        else:
            cE1 = coeffs_integral(phi, potential)
            cE2 = coeffs_integral(theta, potential)
        record = cE1.merge(cE2).to_dict()
        record["main_identity_residual"] = json_real(main_identity_residual(cE1, cE2))
        records.append(record)

    return {
        "K": K,
        "rows": output_writer.solution_rows(phi, theta, potential),
        "records": records,
        "ode_residual_rel": max(phi.ode_residual_rel, theta.ode_residual_rel),
    }


def bessel_task(item: Tuple[float, int, List[int], QParam]) -> List[List[str]]:
    """固定 (α, K)，对每个 x = q^j 计算余项与界"""
    alpha, K, js, qp = item
    rows = []
    for j in js:
        report = bessel_remainder(QPoint(j), QPoint(-K), alpha, qp)
        if not report.within_bound:
            logger.warning(f"α={alpha}, K={K}, j={j}: |R| 超过界 C_q/(λx)")
        rows.append(report.to_row())
    return rows


def heat_task(item: Tuple[float, int, int, QParam]) -> Dict[str, Any]:
    alpha, t_exp, K, qp = item
    return heat_kernel(QPoint(t_exp), QPoint(-K), alpha, qp).to_dict()


# ---------------------------------------------------------------- 子命令

def cmd_eval(args: argparse.Namespace, config: RunConfig) -> int:
    """求值单个函数并打印结果"""
    qp = config.q_param()
    if (args.x is None) == (args.k is None):
        raise QUsageError("必须且只能给出 --x 或 --k 之一")
    x: Argument = QPoint(args.k) if args.k is not None else mp.mpf(args.x)

    name = args.function
    if name in ("qcos", "qsin", "jalpha"):
        if name == "qcos":
            report = q_cos(x, qp)
        elif name == "qsin":
            report = q_sin(x, qp)
        else:
            report = j_alpha(x, args.alpha, qp)
        data = report.to_dict()
        value = report.value
        if not report.trusted:
            print_warning("抵消放大量超出工作精度，结果不可信")
    else:
        with mp.workdps(max(mp.dps, qp.precision.target_digits + 5)):
            xv = qp.resolve(x)
            if name == "qexp_E":
                value = q_exp_E(x, qp)
            elif name == "qexp_e":
                value = q_exp_e(x, qp)
            elif name == "qgamma":
                value = q_gamma(xv, qp)
            elif name == "hahn_exton":
                value = hahn_exton_J(x, args.alpha, qp)
            else:
                n = INF if args.n is None else args.n
                value = q_pochhammer(mp.mpf(args.a) * xv, qp.base(), n, qp.prod_tol)
        data = {"value": json_real(value)}

    print_header(f"{name} (q = {format_real(qp.base())})")
    show_key_values(name, data)
    print(format_real(value))
    return 0


def cmd_solve(args: argparse.Namespace, config: RunConfig) -> int:
    """对每个 K 求解并写出 solution_K{K}.csv 与 coefficients_K{K}.json"""
    qp = config.q_param()
    grid = QGrid(qp, config.k_min, config.k_max)
    try:
        potential = parse_potential_spec(args.p, grid, config.coupling)
    except QDomainError as e:
        raise QUsageError(e.message, e.details)
    Ks = parse_int_list(args.K)
    window = parse_window(args.window)
    out_dir = output_writer.ensure_output_dir(config.out_dir)

    print_header(f"solve p={args.p} α={args.alpha} ({config.coupling.value})")
    manager = TaskManager(config.jobs)
    items = [(K, potential, args.alpha, window, config.pivot_tol, config.fit_tol) for K in Ks]
    outcomes = manager.run(solve_task, items, "solve")

    failed = 0
    for outcome in outcomes:
        K = outcome.item[0]
        if not outcome.ok:
            failed += 1
            print_error(f"K={K}: {outcome.error['error']}: {outcome.error['message']}")
            continue
        result = outcome.result
        output_writer.write_solution_csv(out_dir, K, result["rows"])
        output_writer.write_coefficients_json(out_dir, K, result["records"])
        residuals = ", ".join(f"{r['method']}={r['main_identity_residual']}"
                              for r in result["records"])
        print_success(f"K={K}: 主恒等式残差 {residuals}")

    manager.display_report()
    return 1 if failed else 0


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> int:
    """运行校验套件并写出 verify_{suite}.json"""
    qp = config.q_param()
    k_min = max(config.k_min, VERIFY_WINDOW[0])
    k_max = min(config.k_max, VERIFY_WINDOW[1])
    print_header(f"verify {args.suite} (q = {format_real(qp.base())}, {qp.precision.value})")
    report = Verifier(qp, k_min, k_max).run(args.suite)
    data = report.to_dict()
    out_dir = output_writer.ensure_output_dir(config.out_dir)
    output_writer.write_verify_json(out_dir, args.suite, data)
    show_verify_report(data)
    print_info(f"用时 {report.wall_clock:.2f}s")
    return 0 if report.passed else 1


def cmd_bessel_asym(args: argparse.Namespace, config: RunConfig) -> int:
    """余项扫描，写出 bessel_asym.csv"""
    qp = config.q_param()
    alphas = parse_float_list(args.alpha)
    bad = [a for a in alphas if a <= -0.5]
    if bad:
        raise QHypothesisError("余项估计要求 alpha > -1/2", {"alpha": bad})
    Ks = parse_int_list(args.K)
    js = parse_int_list(args.j)
    out_dir = output_writer.ensure_output_dir(config.out_dir)

    manager = TaskManager(config.jobs)
    items = [(alpha, K, js, qp) for alpha in alphas for K in Ks]
    outcomes = manager.run(bessel_task, items, "bessel-asym")
    errors = [o for o in outcomes if not o.ok]
    if errors:
        for outcome in errors:
            print_error(f"{outcome.item[:2]}: {outcome.error['message']}")
        manager.display_report()
        return 1

    rows = [row for outcome in outcomes for row in outcome.result]
    output_writer.write_bessel_asym_csv(out_dir, rows)
    show_rows("bessel-asym", output_writer.BESSEL_ASYM_HEADER, rows)
    manager.display_report()
    return 0


def cmd_heat(args: argparse.Namespace, config: RunConfig) -> int:
    """q-热核，写出 heat_kernel.json"""
    qp = config.q_param()
    alphas = parse_float_list(args.alpha)
    t_exps = parse_int_list(args.t_exp)
    Ks = parse_int_list(args.K)
    out_dir = output_writer.ensure_output_dir(config.out_dir)

    manager = TaskManager(config.jobs)
    items = [(alpha, t_exp, K, qp) for alpha in alphas for t_exp in t_exps for K in Ks]
    outcomes = manager.run(heat_task, items, "heat")
    errors = [o for o in outcomes if not o.ok]
    for outcome in errors:
        print_error(f"{outcome.item[:3]}: {outcome.error['message']}")
    if errors:
        manager.display_report()
        return 1

    records = [outcome.result for outcome in outcomes]
    output_writer.write_heat_json(out_dir, records)
    header = ["alpha", "t", "lambda", "E", "theta", "residual"]
    show_rows("heat", header, [[r["alpha"], r["t"], r["lambda"], r["E_value"], r["theta"],
                                r["residual"]] for r in records])
    manager.display_report()
    return 0


def start_api_server(host: str = '127.0.0.1', port: int = 5000, debug: bool = False) -> int:
    """启动API服务器"""
    try:
        from src.api.server import start_server
    except ImportError as e:
        logger.error(f"无法导入API服务器模块: {e}")
        print_error("启动API服务器失败，请确认已安装 flask")
        return 1
    try:
        start_server(host=host, port=port, debug=debug)
    except OSError as e:
        logger.error(f"API服务器操作系统错误: {e}")
        print_error(f"启动API服务器失败: 端口 {port} 可能已被占用")
        return 1
    return 0


def cmd_server(args: argparse.Namespace, config: RunConfig) -> int:
    print_info(f"启动API服务器 - 地址: {args.host}:{args.port}")
    return start_api_server(args.host, args.port, args.debug)


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "eval": cmd_eval,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "bessel-asym": cmd_bessel_asym,
    "heat": cmd_heat,
    "server": cmd_server,
}


# ---------------------------------------------------------------- 入口

def build_parser() -> argparse.ArgumentParser:
    # 全局参数放在父解析器里，子命令前后都可以出现
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument('--config', type=str, help='配置文件（JSON 或 YAML）')
    common.add_argument('--q', type=float, help='底数 q ∈ (0,1)')
    common.add_argument('--q-structural', type=int, metavar='M', help='使用满足 1-q = q^M 的底数')
    common.add_argument('--kmin', type=int, help='网格最小指数（最大的 x）')
    common.add_argument('--kmax', type=int, help='网格最大指数（最小的 x）')
    common.add_argument('--tol-prod', type=float, help='无穷乘积截断容差')
    common.add_argument('--tol-tail', type=float, help='Jackson 积分尾项容差')
    common.add_argument('--tol-pivot', type=float, help='前向代换主元容差')
    common.add_argument('--tol-fit', type=float, help='系数拟合残差容差')
    common.add_argument('--precision', choices=['binary64', 'extended'], help='精度模式')
    common.add_argument('--jobs', type=int, help='并行进程数')
    common.add_argument('--out', type=str, help='输出目录')
    common.add_argument('--verbose', '-v', action='store_true', help='输出调试日志')

    parser = argparse.ArgumentParser(description='q-Sturm 工作台命令行工具', parents=[common],
                                     allow_abbrev=False)
    subparsers = parser.add_subparsers(dest='command', help='子命令')

    eval_parser = subparsers.add_parser('eval', parents=[common], help='求值 q-特殊函数')
    eval_parser.add_argument('function', choices=EVAL_FUNCTIONS, help='函数名')
    eval_parser.add_argument('--x', type=float, default=None, help='自变量')
    eval_parser.add_argument('--k', type=int, default=None, help='网格点 x = q^k')
    eval_parser.add_argument('--alpha', type=float, default=0.0, help='jalpha / hahn_exton 的阶')
    eval_parser.add_argument('--a', type=float, default=1.0, help='pochhammer 的系数 (a x; q)_n')
    eval_parser.add_argument('--n', type=int, default=None, help='pochhammer 的项数，缺省为 ∞')

    solve_parser = subparsers.add_parser('solve', parents=[common], help='求解 (E1)/(E2)')
    solve_parser.add_argument('--p', type=str, required=True,
                              help='位势: zero | compact:k_lo:k_hi:c | gaussian:c | csv:PATH')
    solve_parser.add_argument('--alpha', type=float, required=True, help='边界参数 α')
    solve_parser.add_argument('--K', type=str, required=True, help='λ = q^{-K} 的 K 列表')
    solve_parser.add_argument('--coupling', choices=[c.value for c in Coupling],
                              help='位势耦合方式')
    solve_parser.add_argument('--window', type=str, default=None, help='拟合窗口 lo:hi')

    verify_parser = subparsers.add_parser('verify', parents=[common], help='运行恒等式校验')
    verify_parser.add_argument('suite', choices=SUITES + ('all',), help='套件名')

    bessel_parser = subparsers.add_parser('bessel-asym', parents=[common],
                                          help='q-Bessel 余项扫描')
    bessel_parser.add_argument('--alpha', type=str, required=True, help='α 列表')
    bessel_parser.add_argument('--K', type=str, required=True, help='K 列表或区间')
    bessel_parser.add_argument('--j', type=str, default='0', help='x = q^j 的 j 列表或区间')

    heat_parser = subparsers.add_parser('heat', parents=[common], help='q-热核')
    heat_parser.add_argument('--alpha', type=str, required=True, help='α 列表')
    heat_parser.add_argument('--t-exp', type=str, default='0', help='t = q^s 的 s 列表（偶数）')
    heat_parser.add_argument('--K', type=str, required=True, help='K 列表或区间')

    server_parser = subparsers.add_parser('server', parents=[common], help='启动API服务器')
    server_parser.add_argument('--host', '-H', type=str, default='127.0.0.1', help='主机地址')
    server_parser.add_argument('--port', '-P', type=int, default=5000, help='端口号')
    server_parser.add_argument('--debug', '-D', action='store_true', help='开启调试模式')

    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """解析参数并执行子命令，返回退出码"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if getattr(args, 'verbose', False):
        logging.getLogger().setLevel(logging.DEBUG)

    if not args.command:
        parser.print_help()
        return 0

    if not check_environment(including_optional=args.command == 'server'):
        return 1
    logger.debug(f"运行环境: {describe_environment()}")

    try:
        config = load_run_config(args)
        return COMMANDS[args.command](args, config)
    except QCalcError as e:
        logger.error(f"{type(e).__name__}: {e.message} {e.details}")
        print_error(f"{type(e).__name__}: {e.message}")
        return e.exit_code


def main(argv: Optional[List[str]] = None) -> None:
    """主程序入口"""
    sys.exit(run(argv))


if __name__ == '__main__':
    main()
