"""Hot kernels: compiled core when available, numpy fallback otherwise.

Set ``FRACKIRCHHOFF_PURE_PYTHON=1`` to force the fallback.

The elementwise power kernels always come from the fallback: numpy's
vectorised ``**`` beats a scalar libm loop (see ``benchmarks/bench_kernels.py``).
The compiled core serves the interpolation stencil and the scalar fiber
evaluation and root finding, where per-call Python overhead dominates.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if not os.environ.get("FRACKIRCHHOFF_PURE_PYTHON"):
    try:
        from . import _core as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

power_sums = _fallback.power_sums
power_terms = _fallback.power_terms
lagrange4 = _impl.lagrange4
fiber_eval = _impl.fiber_eval
fiber_root = _impl.fiber_root

__all__ = [
    "BACKEND",
    "power_sums",
    "power_terms",
    "lagrange4",
    "fiber_eval",
    "fiber_root",
]
