"""Hot-loop kernels, compiled when available.

The Cython build (``_speedups``) is used unless it is missing or the
environment variable ``KGTK_PURE_PYTHON`` is set to a non-empty value, in
which case the pure-Python twin in ``_pykernels`` is loaded instead.
"""
import os

if os.environ.get("KGTK_PURE_PYTHON"):
    from . import _pykernels as _impl
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        from . import _pykernels as _impl

BACKEND = _impl.BACKEND
split_lines = _impl.split_lines
join_rows = _impl.join_rows
filter_rows = _impl.filter_rows
value_kind = _impl.value_kind
row_kinds = _impl.row_kinds
fnv1a64 = _impl.fnv1a64
hash_tokens = _impl.hash_tokens
union_find = _impl.union_find
reach_many = _impl.reach_many


def implementations():
    """Every importable backend module, keyed by name (used by tests and benchmarks)."""
    from . import _pykernels
    found = {"python": _pykernels}
    try:
        from . import _speedups
        found["cython"] = _speedups
    except ImportError:
        pass
    return found
