"""Hot-loop kernels, compiled when available.

The Cython extension ``underest._core`` is used when it was built at install
time; otherwise the numpy implementation in ``underest._fallback`` is used.
Setting ``UNDEREST_PURE=1`` forces the fallback.

Both backends expose::

    best_split(X, order, target, min_leaf, criterion) -> (column, threshold, gain)
    apply_tree(X, feature, threshold, left, right) -> leaf index per row

``criterion`` is ``GINI`` (binary targets) or ``SSE`` (real targets). ``gain``
is the impurity decrease in count units: for Gini it is
``n * gini(parent) - nL * gini(left) - nR * gini(right)``, for squared error
the reduction in the sum of squared deviations.
"""
import os

import numpy as np

from underest import _fallback

GINI = 0
SSE = 1

_compiled = None
if os.environ.get("UNDEREST_PURE", "") not in ("1", "true", "yes"):
    try:
        from underest import _core as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "numpy"
_impl = _compiled if _compiled is not None else _fallback


def best_split(X, order, target, min_leaf, criterion):
    X = np.ascontiguousarray(X, dtype=np.float64)
    order = np.ascontiguousarray(order, dtype=np.intp)
    target = np.ascontiguousarray(target, dtype=np.float64)
    return _impl.best_split(X, order, target, int(min_leaf), int(criterion))


def apply_tree(X, feature, threshold, left, right):
    return _impl.apply_tree(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(feature, dtype=np.intp),
        np.ascontiguousarray(threshold, dtype=np.float64),
        np.ascontiguousarray(left, dtype=np.intp),
        np.ascontiguousarray(right, dtype=np.intp),
    )
