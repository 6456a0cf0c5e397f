"""命令行输出模块

提供带样式的状态行、求值结果表、校验报告表和扫描摘要。
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

# 设置日志
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger('cli_interface')

# 创建Rich控制台对象
console = Console()


def print_header(title: str) -> None:
    """打印带有样式的标题

    Args:
        title: 标题文本
    """
    console.print(Panel(f"[bold blue]{title}[/]", expand=False))


def print_success(message: str) -> None:
    console.print(f"[bold green]✓[/] {message}")


def print_error(message: str) -> None:
    console.print(f"[bold red]✗[/] {message}")


def print_warning(message: str) -> None:
    console.print(f"[bold yellow]![/] {message}")


def print_info(message: str) -> None:
    console.print(f"[bold cyan]i[/] {message}")


def show_key_values(title: str, values: Dict[str, Any]) -> None:
    """以两列表格显示键值对（求值报告、配置等）"""
    table = Table(title=title, show_header=False)
    table.add_column("key", style="cyan")
    table.add_column("value")
    for key, value in values.items():
        table.add_row(str(key), "" if value is None else str(value))
    console.print(table)


def show_verify_report(report: Dict[str, Any]) -> None:
    """显示校验报告

    Args:
        report: VerifyReport.to_dict() 的结果
    """
    table = Table(title=f"verify {report.get('suite', '')}")
    table.add_column("identity", style="cyan")
    table.add_column("max residual", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("status")
    table.add_column("note", overflow="fold")
    for check in report.get("checks", []):
        residual = check.get("max_residual")
        status = "[green]✓[/]" if check.get("passed") else "[red]✗[/]"
        table.add_row(check.get("identity", ""), "-" if residual is None else str(residual),
                      str(check.get("tolerance")), status, check.get("note", ""))
    console.print(table)
    if report.get("passed"):
        print_success(f"套件 {report.get('suite')} 全部通过")
    else:
        failed = [c["identity"] for c in report.get("checks", []) if not c.get("passed")]
        print_error(f"套件 {report.get('suite')} 未通过: {', '.join(failed)}")


def show_rows(title: str, header: Sequence[str], rows: List[Sequence[Any]],
              limit: Optional[int] = 20) -> None:
    """显示表格数据的前 limit 行"""
    table = Table(title=title)
    for name in header:
        table.add_column(name, justify="right")
    shown = rows if limit is None else rows[:limit]
    for row in shown:
        table.add_row(*[str(v) for v in row])
    console.print(table)
    if limit is not None and len(rows) > limit:
        print_info(f"共 {len(rows)} 行，仅显示前 {limit} 行")
