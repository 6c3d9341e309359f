"""Deterministic tick-driven network simulator.

Time advances on a fixed grid of ``tick_ms``.  A node whose next step would
only advance its phase is not stepped until something can change (a delivery,
a due beacon, a sync timeout, a redraw, a zero crossing or a fault boundary);
skipping those ticks yields exactly the states a per-tick loop produces,
because an idle step is a pure phase advance.  Messages travel through a
timestamped queue and are handed to receivers on the first tick at or after
their delivery time, ordered by ``(delivery time, sequence number)``.
"""

from __future__ import annotations

import heapq
import json
import zlib
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .addressing import assignment_for, can_hear, draw_node_number, maybe_redraw
from .protocol import (PhaseMessage, baseline_fire_at_zero_step, initial_state,
                       node_step)

EVENT_KINDS = ("send", "deliver", "drop", "adopt", "syncEnter", "syncExit", "redraw")

_STREAMS = {"offset": 1, "phase": 2, "address": 3, "broadcast": 4, "radio": 5,
            "fault": 6, "group": 7, "fire": 8}


def stream(seed, name, key):
    """Independent generator per (purpose, node) so draws never shift each other."""
    return np.random.default_rng([seed, _STREAMS[name], key])


def group_key(label):
    return zlib.crc32(str(label).encode())


@lru_cache(maxsize=4096)
def _assignment(number, n):
    return assignment_for(number, n)


def deliver(msg, sender_id, sender_pos, send_time, receivers, radio, rng,
            address_count=None):
    """Work out who gets ``msg`` and when.

    ``receivers`` is an iterable of ``(node_id, (x, y), node_number)``.
    Returns ``(deliveries, drops)``: a list of ``(node_id, delivery_time)``
    and a list of ``(node_id, reason)`` for in-range nodes that missed it.
    The radio is a closed disc: distance equal to the range still delivers.
    Pass ``address_count=None`` to bypass the address scheme.
    """
    sx, sy = sender_pos
    r2 = radio.range * radio.range
    deliveries, drops = [], []
    for node_id, (x, y), number in receivers:
        if node_id == sender_id:
            continue
        dx, dy = x - sx, y - sy
        if dx * dx + dy * dy > r2:
            continue
        if address_count is not None and not can_hear(
                _assignment(msg.sender_address, address_count),
                _assignment(number, address_count)):
            drops.append((node_id, "address"))
            continue
        if radio.loss_probability > 0 and rng.random() < radio.loss_probability:
            drops.append((node_id, "loss"))
            continue
        latency = radio.latency_mean
        if radio.latency_jitter > 0:
            latency += rng.uniform(-radio.latency_jitter, radio.latency_jitter)
        deliveries.append((node_id, send_time + max(1, int(round(latency)))))
    return deliveries, drops


def inject_fault(fault, node_number, now, rng, cfg):
    """Message a faulty node emits at ``now``, or None outside its window."""
    if not fault.active(now):
        return None
    if fault.kind == "randomPhase":
        phase = int(rng.integers(0, cfg.period))
    elif fault.kind == "stuckPhase":
        phase = fault.phase
    else:
        phase = 0
    return PhaseMessage(phase, node_number)


@dataclass
class RunResult:
    scenario: object
    node_ids: list
    ticks: np.ndarray
    phase: np.ndarray
    in_sync: np.ndarray
    node_number: np.ndarray
    faulty: np.ndarray
    positions: np.ndarray
    events: list = field(default_factory=list)
    complete: bool = True

    def log_lines(self):
        return "".join(json.dumps(e, separators=(",", ":")) + "\n" for e in self.events)

    def snapshot_rows(self, stride=1):
        for k in range(0, len(self.ticks), stride):
            t = int(self.ticks[k])
            for j, node_id in enumerate(self.node_ids):
                x, y = self.positions[k, j]
                yield (t, node_id, int(self.in_sync[k, j]), int(self.phase[k, j]),
                       int(self.node_number[k, j]), int(self.faulty[k, j]),
                       f"{x:.3f}", f"{y:.3f}")

    def truncated(self, until):
        """Copy holding only ticks before ``until``, flagged incomplete."""
        keep = self.ticks < until
        return replace(
            self, ticks=self.ticks[keep], phase=self.phase[keep],
            in_sync=self.in_sync[keep], node_number=self.node_number[keep],
            faulty=self.faulty[keep], positions=self.positions[keep],
            events=[e for e in self.events if e["t"] < until], complete=False)

    def index(self, node_id):
        return self.node_ids.index(node_id)


SNAPSHOT_HEADER = ("t_ms", "node_id", "in_sync", "phase", "node_number", "faulty", "x", "y")


def run(scenario, until=None):
    """Simulate ``scenario``; stop early at ``until`` ms (result marked incomplete)."""
    return _Simulation(scenario.check()).run(until)


class _Simulation:
    def __init__(self, sc):
        self.sc = sc
        self.cfg = cfg = sc.config
        self.ids = sc.node_ids
        self.n = len(self.ids)
        self.main = sc.protocol_variant == "main"
        self.address_count = cfg.address_count if self.main else None
        self.events = []
        self.queue = []
        self.seq = 0

        self.offsets, self.states = [], []
        self.addr_rng, self.fire_rng, self.radio_rng, self.fault_rng = [], [], [], []
        group_phase = {}
        for spec in sc.nodes:
            nid = spec.id
            offset = spec.clock_offset
            if offset is None:
                offset = int(stream(sc.seed, "offset", nid).integers(0, 10 * cfg.period))
            phase = 0
            if spec.in_sync:
                if spec.phase is not None:
                    phase = spec.phase
                elif spec.phase_group is not None:
                    key = spec.phase_group
                    if key not in group_phase:
                        group_phase[key] = int(stream(sc.seed, "group", group_key(key))
                                               .integers(0, cfg.period))
                    phase = group_phase[key]
                else:
                    phase = int(stream(sc.seed, "phase", nid).integers(0, cfg.period))
            addr = stream(sc.seed, "address", nid)
            if not self.main:
                number = 1
            elif spec.node_number is not None:
                number = spec.node_number
            else:
                number = draw_node_number(addr, cfg.address_count)
            bo = spec.broadcast_offset
            if bo is None:
                bo = int(stream(sc.seed, "broadcast", nid).integers(0, cfg.broadcast_interval))
            self.offsets.append(offset)
            self.states.append(initial_state(offset, number, cfg, in_sync=spec.in_sync,
                                             phase=phase, broadcast_offset=bo))
            self.addr_rng.append(addr)
            self.fire_rng.append(stream(sc.seed, "fire", nid))
            self.radio_rng.append(stream(sc.seed, "radio", nid))
            self.fault_rng.append(stream(sc.seed, "fault", nid))

        self.faults = [sorted((f for f in sc.faults if f.node_id == nid),
                              key=lambda f: f.start_time) for nid in self.ids]
        self.faulty_now = [False] * self.n
        self.fault_next = [0] * self.n
        self.checkpoints = [[] for _ in range(self.n)]
        self.index = {nid: k for k, nid in enumerate(self.ids)}

    def grid(self, t):
        tick = self.sc.tick_ms
        return -(-t // tick) * tick

    def log(self, t, kind, j, phase, address, **extra):
        e = {"t": t, "kind": kind, "nodeId": self.ids[j], "phase": phase, "address": address}
        e.update(extra)
        self.events.append(e)

    def run(self, until=None):
        sc = self.sc
        end = sc.duration_ms if until is None else min(until, sc.duration_ms)
        wake = [0] * self.n
        while True:
            t = min(wake)
            if self.queue:
                t = min(t, self.grid(self.queue[0][0]))
            if t >= end:
                break
            inbox = {}
            while self.queue and self.queue[0][0] <= t:
                _, _, k, msg, src, sent = heapq.heappop(self.queue)
                self.log(t, "deliver", k, msg.phase, msg.sender_address,
                         src=self.ids[src], sentAt=sent)
                inbox.setdefault(k, []).append(msg)
            for j in range(self.n):
                if wake[j] <= t or j in inbox:
                    wake[j] = self.step(j, t, inbox.get(j, []))
        return self.snapshots(end, complete=end >= sc.duration_ms)

    def active_fault(self, j, t):
        for f in self.faults[j]:
            if f.active(t):
                return f
        return None

    def next_fault_start(self, j, t):
        starts = [f.start_time for f in self.faults[j] if f.start_time > t]
        return self.grid(min(starts)) if starts else None

    def step(self, j, t, inbox):
        cfg = self.cfg
        local = t + self.offsets[j]
        prev = self.states[j]
        fault = self.active_fault(j, t)

        if fault is not None:
            if not self.faulty_now[j]:
                self.faulty_now[j] = True
                self.fault_next[j] = t
                if prev.in_sync:
                    self.log(t, "syncExit", j, 0, prev.node_number)
                self.states[j] = initial_state(local, prev.node_number, cfg)
            if self.fault_next[j] <= t:
                msg = inject_fault(fault, self.states[j].node_number, t, self.fault_rng[j], cfg)
                self.send(j, t, msg, fault=fault.kind)
                gap = self.sc.tick_ms if fault.kind == "floodZero" else cfg.broadcast_interval
                self.fault_next[j] = t + gap
            self.checkpoint(j, t)
            return max(t + self.sc.tick_ms, self.grid(min(self.fault_next[j], fault.end_time)))

        if self.faulty_now[j]:
            self.faulty_now[j] = False
            prev = initial_state(local, prev.node_number, cfg)

        if self.main:
            res = node_step(prev, local, inbox, cfg)
            state = maybe_redraw(res.state, local, self.addr_rng[j], cfg)
        else:
            res = baseline_fire_at_zero_step(prev, local, inbox, cfg, rng=self.fire_rng[j])
            state = res.state
        self.states[j] = state

        if prev.in_sync and not res.state.in_sync:
            self.log(t, "syncExit", j, 0, prev.node_number)
        if state.adopt_count > prev.adopt_count:
            self.log(t, "adopt", j, state.phase, state.node_number,
                     count=state.adopt_count - prev.adopt_count)
        if not prev.in_sync and state.in_sync:
            self.log(t, "syncEnter", j, state.phase, state.node_number)
        for msg in res.outbox:
            self.send(j, t, msg)
        if state.last_redraw_time != res.state.last_redraw_time:
            self.log(t, "redraw", j, state.phase, state.node_number)
        self.checkpoint(j, t)

        nxt = self.next_wake(j, state, t)
        fs = self.next_fault_start(j, t)
        return nxt if fs is None else min(nxt, fs)

    def next_wake(self, j, st, t):
        cfg = self.cfg
        if self.main:
            due = [st.last_broadcast_time + cfg.broadcast_interval]
            if st.in_sync:
                due.append(st.last_receive_time + cfg.time_to_out_of_sync)
            else:
                due.append(st.last_redraw_time + cfg.redraw_interval)
        elif st.in_sync:
            due = [st.last_time_check + cfg.period - st.phase,
                   st.last_receive_time + cfg.time_to_out_of_sync]
        else:
            due = [st.next_fire_time]
        return max(self.grid(min(due) - self.offsets[j]), t + self.sc.tick_ms)

    def send(self, j, t, msg, **extra):
        sc = self.sc
        self.log(t, "send", j, msg.phase, msg.sender_address, **extra)
        receivers = [(self.ids[k], sc.trace.position(self.ids[k], t), self.states[k].node_number)
                     for k in range(self.n) if k != j]
        deliveries, drops = deliver(msg, self.ids[j], sc.trace.position(self.ids[j], t), t,
                                    receivers, sc.radio, self.radio_rng[j], self.address_count)
        index = self.index
        for nid, reason in drops:
            self.log(t, "drop", index[nid], msg.phase, msg.sender_address,
                     src=self.ids[j], reason=reason)
        for nid, when in deliveries:
            self.seq += 1
            heapq.heappush(self.queue, (when, self.seq, index[nid], msg, j, t))

    def checkpoint(self, j, t):
        s = self.states[j]
        cps = self.checkpoints[j]
        row = (t, s.phase, s.in_sync, s.node_number, self.faulty_now[j])
        if cps and cps[-1][0] == t:
            cps[-1] = row
        else:
            cps.append(row)

    def snapshots(self, end, complete):
        sc = self.sc
        period = self.cfg.period
        ticks = np.arange(0, end, sc.tick_ms, dtype=np.int64)
        shape = (len(ticks), self.n)
        phase = np.zeros(shape, dtype=np.int64)
        in_sync = np.zeros(shape, dtype=bool)
        number = np.zeros(shape, dtype=np.int64)
        faulty = np.zeros(shape, dtype=bool)
        for j, cps in enumerate(self.checkpoints):
            if not cps:
                continue
            arr = np.array([(c[0], c[1], c[2], c[3], c[4]) for c in cps], dtype=np.int64)
            k = np.searchsorted(arr[:, 0], ticks, side="right") - 1
            ct, cp, cs = arr[k, 0], arr[k, 1], arr[k, 2].astype(bool)
            phase[:, j] = np.where(cs, (cp + ticks - ct) % period, 0)
            in_sync[:, j] = cs
            number[:, j] = arr[k, 3]
            faulty[:, j] = arr[k, 4].astype(bool)
        positions = sc.trace.positions(self.ids, ticks)
        return RunResult(scenario=sc, node_ids=list(self.ids), ticks=ticks, phase=phase,
                         in_sync=in_sync, node_number=number, faulty=faulty,
                         positions=positions, events=self.events, complete=complete)
