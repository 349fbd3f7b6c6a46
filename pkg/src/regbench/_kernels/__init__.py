"""Kernel backend selection.

The compiled extension is preferred; set REGBENCH_KERNELS=python to force the
numpy fallback (or =native to fail loudly if the extension is missing).
"""

import os

_requested = os.environ.get("REGBENCH_KERNELS", "").strip().lower()

if _requested == "python":
    from . import pyfallback as _impl
    BACKEND = "python"
else:
    try:
        from . import _native as _impl
        BACKEND = "native"
    except ImportError:
        if _requested == "native":
            raise
        from . import pyfallback as _impl
        BACKEND = "python"

ray_cast = _impl.ray_cast
spfh_pair_features = _impl.spfh_pair_features


def backend_name() -> str:
    return BACKEND
