import dataclasses
import importlib
import inspect
import pkgutil

from pydantic import BaseModel

__all__ = []

for loader, module_name, is_pkg in pkgutil.walk_packages(__path__):
    full_module_name = f"{__name__}.{module_name}"
    module = importlib.import_module(full_module_name)

    # Export record dataclasses and run-configuration models defined in the package
    for name, obj in inspect.getmembers(module, inspect.isclass):
        if obj.__module__ != full_module_name:
            continue
        if dataclasses.is_dataclass(obj) or (issubclass(obj, BaseModel) and obj is not BaseModel):
            globals()[name] = obj
            if name not in __all__:
                __all__.append(name)
