"""任务管理测试"""

import pytest

from src.core.errors import QDomainError
from src.utils.task_manager import TaskManager, TaskOutcome


def _reject_odd(n):
    if n % 2:
        raise QDomainError("奇数", {"n": n})
    return n * n


def test_serial_keeps_order_and_captures_errors():
    manager = TaskManager(jobs=1, show_progress=False)
    outcomes = manager.run(_reject_odd, [2, 3, 4], "平方")
    assert [o.index for o in outcomes] == [0, 1, 2]
    assert [o.result for o in outcomes] == [4, None, 16]
    assert not outcomes[1].ok
    assert outcomes[1].error["error"] == "QDomainError"
    assert outcomes[1].error["details"] == {"n": "3"}


def test_stats_and_report():
    manager = TaskManager(show_progress=False)
    assert manager.get_stats() == {}
    manager.run(_reject_odd, [1, 2], "平方")
    stats = manager.get_stats()
    assert (stats["total"], stats["success"], stats["failed"]) == (2, 1, 1)
    assert stats["failed_items"] == ["1: 奇数"]
    report = manager.generate_report(stats)
    assert "失败: 1" in report
    assert "  - 1: 奇数" in report


def test_process_pool_returns_input_order():
    manager = TaskManager(jobs=2, show_progress=False)
    outcomes = manager.run(abs, [-3, 1, -2, 7, -5])
    assert [o.result for o in outcomes] == [3, 1, 2, 7, 5]
    assert all(o.ok for o in outcomes)
    assert manager.get_stats()["success"] == 5


def test_other_exceptions_propagate():
    manager = TaskManager(show_progress=False)
    with pytest.raises(ZeroDivisionError):
        manager.run(lambda n: 1 / n, [0])


def test_jobs_must_be_positive():
    with pytest.raises(ValueError):
        TaskManager(jobs=0)


def test_outcome_ok():
    assert TaskOutcome(0, "a", result=1).ok
    assert not TaskOutcome(0, "a", error={"message": "x"}).ok
