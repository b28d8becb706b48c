import importlib
import pkgutil
from typing import Dict, Type

from anda_io.platforms.platform_cls import Platform

__all__ = ["Platform", "load_platforms"]


def load_platforms(package_dir: str = __name__) -> Dict[str, Type[Platform]]:
    slug_to_cls = {}
    package = importlib.import_module(package_dir)
    for _, module_name, is_pkg in pkgutil.walk_packages(package.__path__):
        if not is_pkg:
            module = importlib.import_module(f"{package_dir}.{module_name}")
            for cls in module.__dict__.values():
                if isinstance(cls, type) and issubclass(cls, Platform) and cls is not Platform:
                    slug_to_cls[cls.PLATFORM_SLUG] = cls
    return slug_to_cls
