"""Kernel selection: the compiled extension when built, numpy otherwise.

Set ``SINGMOD_PURE_PYTHON=1`` to force the fallback.
"""

import os

BACKEND = "python"

if os.environ.get("SINGMOD_PURE_PYTHON") != "1":
    try:
        from singmod._kernels import form_stats

        BACKEND = "cython"
    except ImportError:  # extension not built
        from singmod._kernels_py import form_stats
else:
    from singmod._kernels_py import form_stats

__all__ = ["BACKEND", "form_stats"]
