import importlib
import pkgutil

from anda_io.commands.command_cls import Command


def load_subclasses(package_dir: str = __name__):
    slug_to_run_func = {}
    slug_to_parser_func = {}
    package = importlib.import_module(package_dir)
    for _, module_name, is_pkg in pkgutil.walk_packages(package.__path__):
        if not is_pkg:
            module = importlib.import_module(f"{package_dir}.{module_name}")
            for cls in module.__dict__.values():
                if isinstance(cls, type) and issubclass(cls, Command) and cls is not Command:
                    slug_to_run_func[cls.COMMAND_SLUG] = cls.run
                    slug_to_parser_func[cls.COMMAND_SLUG] = cls.make_parser
    return slug_to_run_func, slug_to_parser_func
