"""Kernel backend selection.

Two interchangeable backends implement the O(N^2) geometry kernels: a
compiled Cython module ("c") and a pure numpy fallback ("numpy"). The
active one is picked on first use from the ASCPROBE_KERNELS environment
variable, defaulting to the compiled module when it imported cleanly.
"""

from __future__ import annotations

import os
from types import ModuleType

_ACTIVE: ModuleType | None = None


def _import(name: str) -> ModuleType:
    if name == "numpy":
        from . import _npkern

        return _npkern
    from . import _ckern  # ImportError when the extension was not built

    return _ckern


def load_backend(name: str | None = None) -> ModuleType:
    """Resolve a backend module by name ('c' or 'numpy').

    With name=None the ASCPROBE_KERNELS variable decides; unset or
    'auto' prefers the compiled backend and falls back to numpy.
    """
    if name is None:
        name = os.environ.get("ASCPROBE_KERNELS", "auto").strip().lower() or "auto"
    if name == "auto":
        try:
            return _import("c")
        except ImportError:
            return _import("numpy")
    if name in ("c", "numpy"):
        try:
            return _import(name)
        except ImportError as e:
            raise RuntimeError(
                f"kernel backend {name!r} requested but not available"
            ) from e
    raise ValueError(f"unknown kernel backend {name!r}; expected 'c' or 'numpy'")


def active_backend() -> ModuleType:
    global _ACTIVE
    if _ACTIVE is None:
        _ACTIVE = load_backend()
    return _ACTIVE


def set_backend(name: str | None) -> ModuleType:
    """Force a backend (tests and benchmarks); None re-reads the environment."""
    global _ACTIVE
    _ACTIVE = load_backend(name)
    return _ACTIVE


def backend_name() -> str:
    return active_backend().BACKEND_NAME
