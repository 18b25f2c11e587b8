"""Hot integer kernels: compiled when available, pure Python otherwise.

Set ``KGRING_PURE_PYTHON=1`` to force the fallback (the benchmark and the
kernel agreement tests use both explicitly).
"""

import os

from kgring import _kernels_py as python_kernels

compiled_kernels = None
if not os.environ.get("KGRING_PURE_PYTHON"):
    try:
        from kgring import _kernels as compiled_kernels
    except ImportError:  # extension not built
        compiled_kernels = None

_impl = compiled_kernels if compiled_kernels is not None else python_kernels

BACKEND = "cython" if compiled_kernels is not None else "python"

matmul = _impl.matmul
col_echelon = _impl.col_echelon
smith = _impl.smith
