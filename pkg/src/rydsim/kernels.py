"""Kernel backend selection.

The compiled Cython module is used when it was built; otherwise, or when the
environment variable ``RYDSIM_PURE_PYTHON`` is set to a non-empty value, the
numpy/Python fallback in :mod:`rydsim._pykernels` is used.
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

if _ckernels is not None and not os.environ.get("RYDSIM_PURE_PYTHON"):
    _active = _ckernels
    BACKEND = "cython"
else:
    _active = _pykernels
    BACKEND = "python"


def available_backends():
    names = ["python"]
    if _ckernels is not None:
        names.append("cython")
    return names


def get_backend(name=None):
    """Return the kernel module called ``name`` (default: the active one)."""
    if name is None:
        return _active
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not available")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def interaction_diagonal(V):
    return _active.interaction_diagonal(V)


def mis_scan(adj):
    return _active.mis_scan(adj)


def route_greedy(pairs, dist, nxt, n_phys):
    return _active.route_greedy(pairs, dist, nxt, n_phys)
