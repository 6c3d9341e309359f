"""Backend selection for the per-tick swarm scan.

The compiled extension is used when it was built; set ``SWARM_SYNC_PURE=1``
to force the numpy implementation.
"""

import os

import numpy as np

from . import _scan_py

try:
    if os.environ.get("SWARM_SYNC_PURE"):
        raise ImportError("pure backend requested")
    from . import _scan as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def backends():
    out = {"python": _scan_py.swarm_scan}
    if _compiled is not None:
        out["compiled"] = _compiled.swarm_scan
    return out


def swarm_scan(pos, in_sync, number, phase, radius, period, check_address=True,
               backend=None):
    pos = np.ascontiguousarray(pos, dtype=np.float64)
    in_sync = np.ascontiguousarray(in_sync, dtype=np.uint8)
    number = np.ascontiguousarray(number, dtype=np.int64)
    phase = np.ascontiguousarray(phase, dtype=np.int64)
    fn = backends()[backend or BACKEND]
    return fn(pos, in_sync, number, phase, float(radius), int(period), bool(check_address))
