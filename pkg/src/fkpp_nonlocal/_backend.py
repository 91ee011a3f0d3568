"""Pick the compiled core if it is importable, else the numpy fallback.

Set ``FKPP_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pycore

core = _pycore
if os.environ.get("FKPP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as core  # type: ignore[no-redef]
    except ImportError:  # extension not built
        core = _pycore

BACKEND = core.NAME


def get(name: str | None = None):
    """Return the backend module ``"cython"`` / ``"python"`` (default: active)."""
    if name is None:
        return core
    if name == "python":
        return _pycore
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")


def fft_workers() -> int:
    try:
        return max(1, int(os.environ.get("FKPP_THREADS", "1")))
    except ValueError:
        return 1
