"""Pure-Python/numpy swarm scan, used when the compiled kernel is unavailable.

Returns, for ``T`` ticks and ``n`` nodes:

* ``labels[T, n]``: component index of each node, ``-1`` outside any swarm.
  Components have at least two members and are numbered by their lowest
  node index.
* ``disp[T, n]``: ``disp[t, c]`` is the largest pairwise circular phase
  distance inside component ``c``; ``-1`` where no such component exists.
* ``count[T]``: number of components.
* ``pending[T, n]``: out-of-sync nodes in range of, and audible to, an
  in-sync node.
"""

import numpy as np

_CHUNK = 4096


def _components(adj):
    n = adj.shape[0]
    labels = np.full(n, -1, dtype=np.int32)
    seen = [False] * n
    c = 0
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        members, frontier = [start], [start]
        while frontier:
            i = frontier.pop()
            for j in np.flatnonzero(adj[i]):
                if not seen[j]:
                    seen[j] = True
                    members.append(j)
                    frontier.append(j)
        if len(members) >= 2:
            labels[members] = c
            c += 1
    return labels


def swarm_scan(pos, in_sync, number, phase, radius, period, check_address):
    in_sync = np.asarray(in_sync).astype(bool)
    T, n = in_sync.shape
    labels = np.full((T, n), -1, dtype=np.int32)
    disp = np.full((T, n), -1, dtype=np.int64)
    count = np.zeros(T, dtype=np.int32)
    pending = np.zeros((T, n), dtype=np.uint8)
    r2 = radius * radius
    offdiag = ~np.eye(n, dtype=bool)
    cache = {}
    for lo in range(0, T, _CHUNK):
        hi = min(T, lo + _CHUNK)
        p = pos[lo:hi]
        dx = p[:, None, :, 0] - p[:, :, None, 0]
        dy = p[:, None, :, 1] - p[:, :, None, 1]
        link = (dx * dx + dy * dy <= r2) & offdiag
        if check_address:
            num = number[lo:hi]
            link &= num[:, :, None] != num[:, None, :]
        s = in_sync[lo:hi]
        adj = link & s[:, :, None] & s[:, None, :]
        pending[lo:hi] = (~s & (link & s[:, None, :]).any(axis=2)).astype(np.uint8)

        packed = np.packbits(adj.reshape(hi - lo, -1), axis=1)
        for k in range(hi - lo):
            key = packed[k].tobytes()
            lab = cache.get(key)
            if lab is None:
                lab = cache[key] = _components(adj[k])
            labels[lo + k] = lab
        lab = labels[lo:hi]
        count[lo:hi] = lab.max(axis=1) + 1

        ph = phase[lo:hi]
        d = np.abs(ph[:, :, None] - ph[:, None, :]) % period
        d = np.minimum(d, period - d)
        same = (lab[:, :, None] == lab[:, None, :]) & (lab[:, :, None] >= 0) & offdiag
        node_max = np.where(same, d, -1).max(axis=2)
        for c in range(int(count[lo:hi].max(initial=0))):
            disp[lo:hi, c] = np.where(lab == c, node_max, -1).max(axis=1)
    return labels, disp, count, pending
