"""Backend dispatch for the hot quaternion kernels.

The environment variable ISONETS_KERNELS selects the implementation:

* ``numpy`` (default) -- vectorized numpy, no compilation latency
* ``numba`` -- @njit loops, worthwhile for large batches / repeated calls

``benchmarks/bench_kernels.py`` compares the two paths.
"""

import os

_BACKEND = os.environ.get("ISONETS_KERNELS", "numpy").strip().lower()

if _BACKEND == "numba":
    from . import numba_backend as _impl
elif _BACKEND == "numpy":
    from . import numpy_backend as _impl
else:
    raise ImportError(
        f"ISONETS_KERNELS={_BACKEND!r} not recognized (expected 'numpy' or 'numba')"
    )

qmul = _impl.qmul
qconj = _impl.qconj
qnorm2 = _impl.qnorm2
qinv = _impl.qinv
mat2_mul = _impl.mat2_mul
mat2_vec = _impl.mat2_vec
cov_mat2 = _impl.cov_mat2
mat2_inv = _impl.mat2_inv
mat2_study_det = _impl.mat2_study_det
mat2_to_complex = _impl.mat2_to_complex
mat2_from_complex = _impl.mat2_from_complex


def backend_name():
    return _BACKEND
