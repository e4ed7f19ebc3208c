"""Kernel backend selection.

The compiled ``_ckernels`` module is used when it imports; otherwise the
pure-Python ``_pykernels`` fallback.  Both stay importable so tests and the
benchmark can compare them directly.
"""
from __future__ import annotations

from . import _pykernels as python_kernels

try:
    from . import _ckernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "compiled" if compiled_kernels is not None else "python"


def get_kernels(name: str | None = None):
    """``None`` gives the active backend; ``"python"``/``"compiled"`` pick one."""
    if name is None:
        return kernels
    if name == "python":
        return python_kernels
    if name == "compiled":
        if compiled_kernels is None:
            raise RuntimeError("compiled kernels are not available in this installation")
        return compiled_kernels
    raise ValueError(f"unknown backend {name!r}")
