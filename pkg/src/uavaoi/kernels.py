"""Hot-loop backend: the compiled ``_ckernels`` extension when built, else pure Python.

Set ``UAVAOI_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

python_backend: ModuleType = _pykernels
compiled_backend: ModuleType | None

try:
    from . import _ckernels as compiled_backend  # type: ignore[attr-defined]
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and not os.environ.get("UAVAOI_PURE_PYTHON"):
    backend = compiled_backend
    BACKEND = "cython"
else:
    backend = _pykernels
    BACKEND = "python"

pack_channel = _pykernels.pack_channel
root_residual = _pykernels.root_residual


def get(name: str | None = None) -> ModuleType:
    if name is None:
        return backend
    if name == "python":
        return python_backend
    if name == "cython":
        if compiled_backend is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return compiled_backend
    raise ValueError(f"unknown backend {name!r}")
