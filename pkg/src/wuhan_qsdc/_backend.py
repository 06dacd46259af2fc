"""Kernel backend selection.

The compiled extension is used when it was built; set ``WUHAN_QSDC_PURE=1``
to force the numpy fallback.
"""

import os

if os.environ.get("WUHAN_QSDC_PURE", "") not in ("", "0"):
    from wuhan_qsdc import _kernels_py as kernels
else:
    try:
        from wuhan_qsdc import _kernels as kernels
    except ImportError:
        from wuhan_qsdc import _kernels_py as kernels

BACKEND = kernels.BACKEND
