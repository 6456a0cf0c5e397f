"""任务管理模块

把相互独立的扫描任务（λ、α、t 的组合）分发到进程池，
跟踪进度与统计，并按输入顺序返回结果。
"""

import time
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

from rich.console import Console
from rich.progress import Progress, BarColumn, TextColumn, TimeElapsedColumn
from rich.panel import Panel

from src.core.errors import QCalcError

# 设置日志
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger('task_manager')

# 创建Rich控制台对象
console = Console()


@dataclass
class TaskOutcome:
    """单个任务的结果；失败时 result 为 None，error 为异常的字典形式"""
    index: int
    item: Any
    result: Any = None
    error: Optional[Dict[str, Any]] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class TaskState:
    """任务状态，用于统计和报告"""
    description: str
    total: int
    start_time: float = field(default_factory=time.time)
    end_time: Optional[float] = None
    success: int = 0
    failed: int = 0
    failed_items: List[str] = field(default_factory=list)

    def record(self, outcome: TaskOutcome) -> None:
        if outcome.ok:
            self.success += 1
        else:
            self.failed += 1
            self.failed_items.append(f"{outcome.item}: {outcome.error.get('message', '')}")

    def complete(self) -> None:
        self.end_time = time.time()

    def get_elapsed_time(self) -> float:
        end = self.end_time if self.end_time is not None else time.time()
        return end - self.start_time

    def to_stats(self) -> Dict[str, Any]:
        return {
            "description": self.description,
            "total": self.total,
            "success": self.success,
            "failed": self.failed,
            "failed_items": list(self.failed_items),
            "elapsed_time": self.get_elapsed_time(),
        }


def _run_one(fn: Callable[[Any], Any], index: int, item: Any) -> TaskOutcome:
    """在工作进程内执行一个任务，数值异常转成结果数据"""
    try:
        return TaskOutcome(index, item, result=fn(item))
    except QCalcError as e:
        return TaskOutcome(index, item, error=e.to_dict())


class TaskManager:
    """任务管理器，负责任务分发、进度显示和报告

    jobs == 1 时在当前进程内串行执行；否则使用进程池。
    mpmath 的精度是进程级全局状态，所以不使用线程。
    """

    def __init__(self, jobs: int = 1, show_progress: bool = True):
        if jobs < 1:
            raise ValueError("jobs 必须是正整数")
        self.jobs = jobs
        self.show_progress = show_progress
        self.current_task: Optional[TaskState] = None

    def run(self, fn: Callable[[Any], Any], items: Sequence[Any],
            description: str = "计算") -> List[TaskOutcome]:
        """对每个 item 执行 fn，按输入顺序返回结果

        Args:
            fn: 模块级函数（进程池要求可 pickle）
            items: 任务参数
            description: 进度条描述

        Returns:
            List[TaskOutcome]: 与 items 一一对应
        """
        items = list(items)
        self.current_task = TaskState(description, len(items))
        outcomes: List[Optional[TaskOutcome]] = [None] * len(items)

        progress = Progress(
            TextColumn("[bold blue]{task.description}"),
            BarColumn(),
            TextColumn("{task.completed}/{task.total}"),
            TimeElapsedColumn(),
            console=console,
            disable=not self.show_progress,
            transient=True,
        )
        with progress:
            bar = progress.add_task(description, total=len(items))
            if self.jobs == 1 or len(items) <= 1:
                for index, item in enumerate(items):
                    outcome = _run_one(fn, index, item)
                    outcomes[index] = outcome
                    self.current_task.record(outcome)
                    progress.advance(bar)
            else:
                with ProcessPoolExecutor(max_workers=self.jobs) as executor:
                    futures = [executor.submit(_run_one, fn, index, item)
                               for index, item in enumerate(items)]
                    for future in as_completed(futures):
                        outcome = future.result()
                        outcomes[outcome.index] = outcome
                        self.current_task.record(outcome)
                        progress.advance(bar)

        self.current_task.complete()
        for outcome in outcomes:
            if not outcome.ok:
                logger.warning(f"任务失败 {outcome.item}: {outcome.error.get('message')}")
        return outcomes

    def get_stats(self) -> Dict[str, Any]:
        if not self.current_task:
            return {}
        return self.current_task.to_stats()

    def generate_report(self, stats: Dict[str, Any]) -> str:
        """生成任务报告

        Args:
            stats: 任务统计信息

        Returns:
            str: 报告文本
        """
        elapsed_time = stats.get("elapsed_time", 0)
        minutes, seconds = divmod(elapsed_time, 60)
        time_str = f"{int(minutes)}分{int(seconds)}秒" if minutes > 0 else f"{seconds:.2f}秒"

        report = [
            f"任务: {stats.get('description', '')}",
            f"总任务数: {stats.get('total', 0)}",
            f"成功: {stats.get('success', 0)}",
            f"失败: {stats.get('failed', 0)}",
            f"用时: {time_str}",
        ]
        if stats.get('failed', 0) > 0 and stats.get('failed_items'):
            report.append("\n失败的任务:")
            for item in stats['failed_items']:
                report.append(f"  - {item}")
        return "\n".join(report)

    def display_report(self, stats: Optional[Dict[str, Any]] = None) -> None:
        """在终端显示任务报告"""
        stats = stats if stats is not None else self.get_stats()
        if not stats:
            return
        style = "green" if stats.get("failed", 0) == 0 else "yellow"
        console.print(Panel(self.generate_report(stats), title="运行统计", border_style=style))
