"""Backend selection for the sampling kernels.

The compiled module is used for the scans when it imports; set
``GEVREYLAB_PURE_PYTHON=1`` to force the numpy fallback everywhere.
"""

import os

from . import _pykernels

if os.environ.get("GEVREYLAB_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels

BACKEND = _impl.BACKEND
RATIO_SLACK = _pykernels.RATIO_SLACK

exp_lemma_ratios = _impl.exp_lemma_ratios
exp_lemma_scan = _impl.exp_lemma_scan
ximed_ratios = _impl.ximed_ratios
ximed_scan = _impl.ximed_scan
bracket_ratios = _impl.bracket_ratios
bracket_scan = _impl.bracket_scan
# numpy's vectorized exp/log beat the scalar libm loop for the weight
# kernel (see benchmarks/bench_kernels.py), so it stays on numpy
ridge_scales = _pykernels.ridge_scales
kernel_weights = _pykernels.kernel_weights


def backends():
    """Both implementations, compiled first when available."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out = {"cython": _ckernels, **out}
    except ImportError:  # pragma: no cover
        pass
    return out
