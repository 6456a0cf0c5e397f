"""配置管理模块

提供运行配置的加载、合并与校验。配置文件可以是 JSON 或 YAML，
命令行参数覆盖文件中的值，文件中的值覆盖默认值。
"""

import os
import copy
import json
import logging
from dataclasses import dataclass
from typing import Dict, Any, Optional, Tuple

import yaml

from src.core.errors import QCalcError, QConfigError
from src.core.qcore import (
    DEFAULT_PROD_TOL, DEFAULT_TAIL_TOL, Precision, QParam, make_q_param, structural_q,
)
from src.core.qsturm import DEFAULT_FIT_TOL, DEFAULT_PIVOT_TOL, Coupling

logger = logging.getLogger('config_manager')

YAML_SUFFIXES = ('.yaml', '.yml')


@dataclass(frozen=True)
class RunConfig:
    """一次运行的完整配置"""
    q: float
    q_structural: Optional[int]
    k_min: int
    k_max: int
    prod_tol: float
    tail_tol: float
    pivot_tol: float
    fit_tol: float
    precision: Precision
    jobs: int
    out_dir: str
    coupling: Coupling

    def q_param(self) -> QParam:
        """按配置构造底数参数；q_structural 优先于 q"""
        if self.q_structural is not None:
            return structural_q(self.q_structural, self.prod_tol, self.precision, self.tail_tol)
        return make_q_param(self.q, self.prod_tol, self.precision, self.tail_tol)


class ConfigManager:
    """配置管理器，负责加载、保存和校验运行配置"""

    def __init__(self, config_path: Optional[str] = None):
        """初始化配置管理器

        Args:
            config_path: 配置文件路径；为 None 时只使用默认配置
        """
        self.config_path = config_path

        # 默认配置
        self.default_config: Dict[str, Any] = {
            "q": 0.5,
            "q_structural": None,
            "grid": {
                "k_min": -40,
                "k_max": 60,
            },
            "tolerances": {
                "prod": DEFAULT_PROD_TOL,
                "tail": DEFAULT_TAIL_TOL,
                "pivot": DEFAULT_PIVOT_TOL,
                "fit": DEFAULT_FIT_TOL,
            },
            "precision": Precision.BINARY64.value,
            "jobs": 1,
            "out_dir": "results",
            "coupling": Coupling.POINT.value,
        }

        self.config: Dict[str, Any] = {}
        self.load_config()

    def load_config(self) -> Dict[str, Any]:
        """加载配置文件并与默认配置合并。文件不存在时使用默认配置，不创建文件。

        Returns:
            Dict[str, Any]: 配置信息

        Raises:
            QConfigError: 文件格式错误或无法读取
        """
        self.config = copy.deepcopy(self.default_config)
        if not self.config_path:
            return self.config
        if not os.path.exists(self.config_path):
            logger.warning(f"配置文件不存在，使用默认配置: {self.config_path}")
            return self.config

        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                if self.config_path.endswith(YAML_SUFFIXES):
                    loaded = yaml.safe_load(f) or {}
                else:
                    loaded = json.load(f)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise QConfigError(f"配置文件格式错误: {e}", {"path": self.config_path})
        except OSError as e:
            raise QConfigError(f"无法读取配置文件: {e}", {"path": self.config_path})

        if not isinstance(loaded, dict):
            raise QConfigError("配置文件顶层必须是对象", {"path": self.config_path})
        self._merge(self.config, loaded)
        return self.config

    @staticmethod
    def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> None:
        for key, value in override.items():
            if isinstance(value, dict) and isinstance(base.get(key), dict):
                ConfigManager._merge(base[key], value)
            else:
                base[key] = value

    def save_config(self, path: Optional[str] = None) -> bool:
        """保存当前配置

        Args:
            path: 目标路径，默认为加载时的路径

        Returns:
            bool: 保存是否成功
        """
        path = path or self.config_path
        if not path:
            return False
        try:
            with open(path, 'w', encoding='utf-8') as f:
                if path.endswith(YAML_SUFFIXES):
                    yaml.safe_dump(self.config, f, allow_unicode=True, sort_keys=False)
                else:
                    json.dump(self.config, f, indent=4, ensure_ascii=False)
            return True
        except OSError as e:
            logger.error(f"保存配置失败: {e}")
            return False

    def update_config(self, key: str, value: Any) -> None:
        """更新单个配置项，支持 grid.k_min 这样的嵌套键"""
        parts = key.split(".")
        current = self.config
        for part in parts[:-1]:
            current = current.setdefault(part, {})
        current[parts[-1]] = value

    def get_config_value(self, key: str, default: Any = None) -> Any:
        """获取配置值

        Args:
            key: 配置键名，支持嵌套键
            default: 默认值，当键不存在时返回
        """
        current: Any = self.config
        for part in key.split("."):
            if not isinstance(current, dict) or part not in current:
                return default
            current = current[part]
        return current

    def apply_overrides(self, overrides: Dict[str, Any]) -> None:
        """应用命令行覆盖；值为 None 的项忽略"""
        for key, value in overrides.items():
            if value is not None:
                self.update_config(key, value)

    def validate_config(self, config: Optional[Dict[str, Any]] = None) -> Tuple[bool, str]:
        """验证配置是否有效

        Returns:
            Tuple[bool, str]: (是否有效, 错误信息)
        """
        config = self.config if config is None else config

        q = config.get("q")
        if not isinstance(q, (int, float)) or isinstance(q, bool) or not 0 < q < 1:
            return False, "q 必须是 (0,1) 内的数值"

        m = config.get("q_structural")
        if m is not None and (not isinstance(m, int) or isinstance(m, bool) or m < 1):
            return False, "q_structural 必须是正整数"

        grid = config.get("grid", {})
        if not isinstance(grid, dict):
            return False, "grid 必须是字典类型"
        k_min, k_max = grid.get("k_min"), grid.get("k_max")
        if not isinstance(k_min, int) or not isinstance(k_max, int) or k_min >= k_max:
            return False, "grid.k_min 与 grid.k_max 必须是整数且 k_min < k_max"

        tolerances = config.get("tolerances", {})
        if not isinstance(tolerances, dict):
            return False, "tolerances 必须是字典类型"
        for name in ("prod", "tail", "pivot", "fit"):
            value = tolerances.get(name)
            if not isinstance(value, (int, float)) or not value > 0:
                return False, f"tolerances.{name} 必须是正数"

        if config.get("precision") not in [p.value for p in Precision]:
            return False, "precision 必须是 binary64 或 extended"

        jobs = config.get("jobs")
        if not isinstance(jobs, int) or isinstance(jobs, bool) or jobs < 1:
            return False, "jobs 必须是正整数"

        if config.get("coupling") not in [c.value for c in Coupling]:
            return False, "coupling 必须是 point 或 shifted"

        if not isinstance(config.get("out_dir"), str) or not config.get("out_dir"):
            return False, "out_dir 必须是非空字符串"

        return True, ""

    def to_run_config(self) -> RunConfig:
        """校验并冻结当前配置

        Raises:
            QConfigError: 配置无效
        """
        valid, message = self.validate_config()
        if not valid:
            raise QConfigError(message, {"path": self.config_path or "<defaults>"})
        config = self.config
        run_config = RunConfig(
            q=float(config["q"]),
            q_structural=config["q_structural"],
            k_min=config["grid"]["k_min"],
            k_max=config["grid"]["k_max"],
            prod_tol=float(config["tolerances"]["prod"]),
            tail_tol=float(config["tolerances"]["tail"]),
            pivot_tol=float(config["tolerances"]["pivot"]),
            fit_tol=float(config["tolerances"]["fit"]),
            precision=Precision(config["precision"]),
            jobs=config["jobs"],
            out_dir=config["out_dir"],
            coupling=Coupling(config["coupling"]),
        )
        try:
            run_config.q_param()
        except QCalcError as e:
            raise QConfigError(e.message, e.details)
        return run_config
