"""Hot-loop kernels: compiled extension when importable, numpy fallback otherwise.

Set ``QSTEIN_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"

if os.environ.get("QSTEIN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
else:
    _impl = _fallback

merge_sorted_atoms = _impl.merge_sorted_atoms
convolve_sorted = _impl.convolve_sorted
gram_schmidt = _impl.gram_schmidt

__all__ = ["BACKEND", "merge_sorted_atoms", "convolve_sorted", "gram_schmidt"]
