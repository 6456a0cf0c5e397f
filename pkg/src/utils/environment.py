"""环境管理模块

提供解释器版本与依赖包检查，并给出运行环境记录。
"""

import sys
import logging
import platform
import importlib.util
from importlib import metadata
from typing import Any, Dict, List, Tuple

# 操作系统类型常量
OS_TYPE_WINDOWS = "windows"
OS_TYPE_MACOS = "macos"
OS_TYPE_LINUX = "linux"
OS_TYPE_UNKNOWN = "unknown"

MIN_PYTHON_VERSION = (3, 8)

# 设置日志
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger('environment')

# 依赖包列表：导入名 -> 发行包名
REQUIRED_PACKAGES = {
    "mpmath": "mpmath",  # 任意精度实数
    "numpy": "numpy",    # 网格函数数组与随机数
    "rich": "rich",      # 终端输出美化
    "yaml": "pyyaml",    # YAML 配置文件
}

# 可选依赖包列表（用于API服务器等扩展功能）
OPTIONAL_PACKAGES = {
    "api_server": {"flask": "flask"},
}


def check_python_version() -> bool:
    """检查Python版本

    Returns:
        bool: 版本是否满足要求
    """
    current_version = sys.version_info
    if (current_version.major, current_version.minor) < MIN_PYTHON_VERSION:
        logger.error(f"Python版本不满足要求: 当前版本 {current_version.major}.{current_version.minor}, "
                     f"最低要求 {MIN_PYTHON_VERSION[0]}.{MIN_PYTHON_VERSION[1]}")
        return False
    return True


def check_dependencies(including_optional: bool = False) -> Tuple[bool, List[str]]:
    """检查依赖包是否已安装

    Args:
        including_optional: 是否包括可选依赖包

    Returns:
        Tuple[bool, List[str]]: (是否全部已安装, 缺失的发行包列表)
    """
    packages = dict(REQUIRED_PACKAGES)
    if including_optional:
        for group in OPTIONAL_PACKAGES.values():
            packages.update(group)

    missing_packages = [dist for module, dist in packages.items()
                        if importlib.util.find_spec(module) is None]
    return len(missing_packages) == 0, missing_packages


def get_os_type() -> str:
    """检测当前操作系统类型"""
    system = platform.system().lower()
    if system == "windows":
        return OS_TYPE_WINDOWS
    elif system == "darwin":
        return OS_TYPE_MACOS
    elif system == "linux":
        return OS_TYPE_LINUX
    return OS_TYPE_UNKNOWN


def package_versions() -> Dict[str, str]:
    """已安装依赖的版本号；未安装的记为 missing"""
    versions = {}
    for group in [REQUIRED_PACKAGES] + list(OPTIONAL_PACKAGES.values()):
        for dist in group.values():
            try:
                versions[dist] = metadata.version(dist)
            except metadata.PackageNotFoundError:
                versions[dist] = "missing"
    return versions


def describe_environment() -> Dict[str, Any]:
    """运行环境记录：解释器、操作系统、依赖版本"""
    return {
        "python_version": platform.python_version(),
        "os_type": get_os_type(),
        "packages": package_versions(),
    }


def check_environment(including_optional: bool = False) -> bool:
    """启动检查：版本不满足或缺少必需包时记录错误并返回 False"""
    if not check_python_version():
        return False
    ok, missing = check_dependencies(including_optional)
    if not ok:
        logger.error(f"缺少依赖包: {', '.join(missing)}，请运行 pip install -r requirements.txt")
    return ok
