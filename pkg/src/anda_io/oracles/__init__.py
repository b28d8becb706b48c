import importlib
import pkgutil
from typing import Dict, Type

from anda_io.errors import UsageError
from anda_io.oracles.oracle_cls import CachedOracle, Oracle

__all__ = ["CachedOracle", "Oracle", "load_oracles", "oracle_from_cli"]


def load_oracles(package_dir: str = __name__) -> Dict[str, Type[Oracle]]:
    slug_to_cls = {}
    package = importlib.import_module(package_dir)
    for _, module_name, is_pkg in pkgutil.walk_packages(package.__path__):
        if not is_pkg:
            module = importlib.import_module(f"{package_dir}.{module_name}")
            for cls in module.__dict__.values():
                if (
                    isinstance(cls, type)
                    and issubclass(cls, Oracle)
                    and cls is not Oracle
                    and cls.CLI_EXPOSED
                ):
                    slug_to_cls[cls.ORACLE_SLUG] = cls
    return slug_to_cls


def oracle_from_cli(value: str, args: dict) -> Oracle:
    """
    Build an oracle from `--oracle slug[:argument]`.
    """
    slug, _, rest = value.partition(":")
    choices = load_oracles()
    if slug not in choices:
        raise UsageError(f"unknown oracle '{slug}', choose from {sorted(choices)}")
    return choices[slug].from_cli(rest, args)
