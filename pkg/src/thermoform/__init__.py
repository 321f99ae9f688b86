"""Thermodynamic formalism toolkit: shift pressure and Gibbs chains, graph
directed contraction systems, beta-expansion towers, and dimension estimators.

Submodules load lazily so the command line can cap thread counts before any
numerical library initializes.
"""

import importlib

__version__ = "0.1.0"

_SUBMODULES = ("shifts", "gdms", "beta", "dimension", "errors", "rng", "cli")

__all__ = ["__version__", *_SUBMODULES]


def __getattr__(name):
    if name in _SUBMODULES:
        module = importlib.import_module(f".{name}", __name__)
        globals()[name] = module
        return module
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(set(globals()) | set(_SUBMODULES))
