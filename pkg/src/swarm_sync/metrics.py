"""Swarm detection and synchronization metrics over simulator output."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .kernels import swarm_scan


@dataclass(frozen=True)
class NodeView:
    position: tuple
    in_sync: bool
    phase: int = 0


@dataclass(frozen=True)
class SwarmPartition:
    timestamp: int
    components: list
    singletons: list
    pending: list = field(default_factory=list)


@dataclass
class Scan:
    labels: np.ndarray
    dispersion: np.ndarray
    count: np.ndarray
    pending: np.ndarray


def detect_swarms(snapshot, radio, assignments=None, period=2200, timestamp=0):
    """Partition one instant into swarms.

    ``snapshot`` maps node id to :class:`NodeView`; ``assignments`` maps node
    id to its :class:`~swarm_sync.addressing.AddressAssignment` (``None``
    when every node shares one address).  Two nodes are linked when they are
    within range, can hear each other and are both in sync.
    """
    ids = sorted(snapshot)
    pos = np.array([[snapshot[i].position for i in ids]], dtype=float).reshape(1, len(ids), 2)
    in_sync = np.array([[snapshot[i].in_sync for i in ids]], dtype=np.uint8)
    phase = np.array([[snapshot[i].phase for i in ids]], dtype=np.int64)
    if assignments is None:
        number = np.zeros((1, len(ids)), dtype=np.int64)
    else:
        number = np.array([[assignments[i].node_number for i in ids]], dtype=np.int64)
    labels, _, count, pending = swarm_scan(pos, in_sync, number, phase, radio.range,
                                           period, assignments is not None)
    comps = [frozenset(ids[j] for j in np.flatnonzero(labels[0] == c)) for c in range(count[0])]
    singletons = [ids[j] for j in np.flatnonzero(labels[0] < 0)]
    return SwarmPartition(timestamp, comps, singletons,
                          [ids[j] for j in np.flatnonzero(pending[0])])


def scan(result):
    sc = result.scenario
    labels, disp, count, pending = swarm_scan(
        result.positions, result.in_sync, result.node_number, result.phase,
        sc.radio.range, sc.config.period, sc.protocol_variant == "main")
    return Scan(labels, disp, count, pending)


def partition_at(result, k, sc_scan=None):
    s = sc_scan or scan(result)
    ids = result.node_ids
    comps = [frozenset(ids[j] for j in np.flatnonzero(s.labels[k] == c))
             for c in range(s.count[k])]
    return SwarmPartition(int(result.ticks[k]), comps,
                          [ids[j] for j in np.flatnonzero(s.labels[k] < 0)],
                          [ids[j] for j in np.flatnonzero(s.pending[k])])


def default_tolerance(scenario):
    return scenario.config.allowed_phase_shift + 2 * scenario.radio.latency_mean


@dataclass
class SyncReport:
    tick_ms: int
    period_ms: int
    dispersion_tolerance: float
    time_to_sync: int | None
    first_contact: int | None
    swarm_count: np.ndarray
    dispersion: np.ndarray  # [T, max components], -1 padded
    pending_count: np.ndarray
    sync_events: list
    complete: bool
    backend: str = ""

    @property
    def ticks(self):
        return np.arange(len(self.swarm_count), dtype=np.int64) * self.tick_ms

    def max_dispersion(self):
        return int(self.dispersion.max(initial=-1))

    def to_dict(self):
        return {
            "complete": self.complete,
            "timeToSyncMs": self.time_to_sync,
            "firstContactMs": self.first_contact,
            "dispersionToleranceMs": self.dispersion_tolerance,
            "periodMs": self.period_ms,
            "tickMs": self.tick_ms,
            "ticks": len(self.swarm_count),
            "maxDispersionMs": self.max_dispersion(),
            "swarmCountSeries": self.swarm_count.tolist(),
            "pendingCountSeries": self.pending_count.tolist(),
            "dispersionSeries": [[int(d) for d in row if d >= 0] for row in self.dispersion],
            "syncEvents": self.sync_events,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"), sort_keys=True) + "\n"

    def dispersion_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("t_ms", "component_id", "dispersion_ms"))
        for t, row in zip(self.ticks.tolist(), self.dispersion.tolist()):
            for c, d in enumerate(row):
                if d >= 0:
                    w.writerow((t, c, d))
        return buf.getvalue()

    def swarm_count_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("t_ms", "swarm_count", "pending_count"))
        for row in zip(self.ticks.tolist(), self.swarm_count.tolist(),
                       self.pending_count.tolist()):
            w.writerow(row)
        return buf.getvalue()


def target_indices(result):
    faulty = {f.node_id for f in result.scenario.faults}
    return [j for j, nid in enumerate(result.node_ids) if nid not in faulty]


def synced_mask(result, s, tolerance, targets=None):
    """Per tick: all target nodes share one swarm whose dispersion is within tolerance."""
    targets = target_indices(result) if targets is None else targets
    T = len(result.ticks)
    if len(targets) < 2 or T == 0:
        return np.zeros(T, dtype=bool)
    lab = s.labels[:, targets]
    first = lab[:, 0]
    same = (lab == first[:, None]).all(axis=1) & (first >= 0)
    d = s.dispersion[np.arange(T), np.maximum(first, 0)]
    return same & (d >= 0) & (d <= tolerance)


def first_sustained(mask, width):
    """First index where ``mask`` holds for ``width`` consecutive entries."""
    if width <= 0 or len(mask) < width:
        return None
    csum = np.concatenate(([0], np.cumsum(mask, dtype=np.int64)))
    runs = csum[width:] - csum[:-width]
    hits = np.flatnonzero(runs == width)
    return int(hits[0]) if len(hits) else None


def first_contact(result, targets=None):
    targets = target_indices(result) if targets is None else targets
    if len(targets) < 2:
        return None
    p = result.positions[:, targets]
    dx = p[:, None, :, 0] - p[:, :, None, 0]
    dy = p[:, None, :, 1] - p[:, :, None, 1]
    r = result.scenario.radio.range
    near = (dx * dx + dy * dy <= r * r) & ~np.eye(len(targets), dtype=bool)
    hits = np.flatnonzero(near.any(axis=(1, 2)))
    return int(result.ticks[hits[0]]) if len(hits) else None


def measure(result, tolerance=None, targets=None):
    """Compute a :class:`SyncReport` for a run.

    Time to sync is the first tick at which every target node (all nodes that
    are never faulty, by default) sits in one swarm with dispersion at most
    ``tolerance``, provided that this holds through one full period.
    """
    from .kernels import BACKEND

    sc = result.scenario
    tol = default_tolerance(sc) if tolerance is None else tolerance
    s = scan(result)
    mask = synced_mask(result, s, tol, targets)
    width = sc.config.period // sc.tick_ms + 1
    k = first_sustained(mask, width)
    faulty_cols = result.faulty
    pending = (s.pending.astype(bool) & ~faulty_cols).sum(axis=1)
    width_c = max(1, int(s.count.max(initial=0)))
    events = [{"t": e["t"], "nodeId": e["nodeId"], "kind": e["kind"]}
              for e in result.events if e["kind"] in ("syncEnter", "syncExit")]
    return SyncReport(
        tick_ms=sc.tick_ms, period_ms=sc.config.period, dispersion_tolerance=tol,
        time_to_sync=None if k is None else int(result.ticks[k]),
        first_contact=first_contact(result, targets),
        swarm_count=s.count.astype(np.int64), dispersion=s.dispersion[:, :width_c],
        pending_count=pending.astype(np.int64), sync_events=events,
        complete=bool(result.complete), backend=BACKEND)
