"""Backend selection for the two hot kernels (SGD epochs, LDA E-steps).

The compiled Cython extension is used when available; the pure-numpy
reference implementation is the fallback.  Set ``WEBLEARN_PURE=1`` to
force the fallback (useful for debugging and for the backend benchmark).
Both backends implement the same update rules in the same order; within a
backend results are bit-reproducible, across backends they agree to
floating-point accumulation error.
"""

from __future__ import annotations

import os

from weblearn._backend import pyref

_FORCED_PURE = os.environ.get("WEBLEARN_PURE", "").strip() not in ("", "0")

if _FORCED_PURE:
    _impl = pyref
else:
    try:
        from weblearn._backend import _ext as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = pyref

sgd_epoch = _impl.sgd_epoch
lda_e_step = _impl.lda_e_step

LOSS_IDS = {"hinge": 0, "squared_hinge": 1, "logistic": 2}


def backend_name() -> str:
    return "compiled" if _impl is not pyref else "pure"


def get_backend(name: str):
    """Return the named backend module ('pure' or 'compiled');
    raises ImportError when the compiled extension is unavailable."""
    if name == "pure":
        return pyref
    if name == "compiled":
        from weblearn._backend import _ext

        return _ext
    raise ValueError(f"unknown backend {name!r}")
