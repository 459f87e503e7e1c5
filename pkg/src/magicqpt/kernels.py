"""Selects the matvec kernel at import time.

The compiled extension ``magicqpt._matvec`` is used when it was built; set
``MAGICQPT_BACKEND=python`` to force the numpy fallback.
"""

import os

from . import _matvec_py

python_matvec_real = _matvec_py.matvec_real

try:
    from ._matvec import matvec_real as compiled_matvec_real
except ImportError:  # extension not built
    compiled_matvec_real = None

if compiled_matvec_real is not None and os.environ.get("MAGICQPT_BACKEND", "") != "python":
    matvec_real = compiled_matvec_real
    BACKEND = "cython"
else:
    matvec_real = python_matvec_real
    BACKEND = "python"
