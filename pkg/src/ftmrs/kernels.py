"""Backend selection for the graph kernels.

The compiled extension is used when it imports; otherwise the pure-Python
versions take over. Set ``FTMRS_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("FTMRS_PURE_PYTHON") == "1":
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

shortest_path = _impl.shortest_path
bfs_hops = _impl.bfs_hops
RELAY, ENDPOINT, EXCLUDED = _pykernels.RELAY, _pykernels.ENDPOINT, _pykernels.EXCLUDED
