"""Node oscillator state machine and phase arithmetic.

Every function here is pure: it takes a :class:`NodeState` and returns a new
one.  Timestamps are node-local integer milliseconds; nothing depends on a
shared clock, only on differences between a node's own timestamps.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace
from typing import NamedTuple

from .config import ProtocolConfig

WIRE_FORMAT = struct.Struct("<IB")


@dataclass(frozen=True)
class PhaseMessage:
    phase: int
    sender_address: int

    def encode(self) -> bytes:
        return WIRE_FORMAT.pack(self.phase, self.sender_address)

    @classmethod
    def decode(cls, data: bytes) -> "PhaseMessage":
        phase, address = WIRE_FORMAT.unpack(data)
        return cls(phase, address)


@dataclass(frozen=True)
class NodeState:
    in_sync: bool
    phase: int
    last_time_check: int
    last_receive_time: int | None
    node_number: int
    last_broadcast_time: int
    last_redraw_time: int
    # fire-at-zero variant only: when an out-of-sync node fires next
    next_fire_time: int | None = None
    adopt_count: int = 0
    error_count: int = 0


def initial_state(now, node_number, cfg, *, in_sync=False, phase=0,
                  broadcast_offset=0):
    """State of a node powered on at local time ``now``.

    An in-sync node is treated as having just heard a peer, so it keeps
    oscillating for ``time_to_out_of_sync`` before it needs a delivery.
    The first broadcast happens ``broadcast_offset`` ms after power-on.
    """
    if not in_sync:
        phase = 0
    return NodeState(
        in_sync=in_sync,
        phase=phase % cfg.period,
        last_time_check=now,
        last_receive_time=now if in_sync else None,
        node_number=node_number,
        last_broadcast_time=now - cfg.broadcast_interval + broadcast_offset,
        last_redraw_time=now,
    )


class StepResult(NamedTuple):
    state: NodeState
    outbox: list
    amplitude: float


def compute_phase_shift(a: int, b: int, period: int) -> int:
    """Circular distance between two phases, in ``[0, period // 2]``."""
    d = abs(a - b) % period
    return min(d, period - d)


def is_behind(own: int, other: int, period: int) -> bool:
    """True when ``own`` trails ``other`` going forward around the cycle.

    Exactly antipodal phases fall back to plain integer order so that every
    pair of distinct phases has exactly one leader.
    """
    d = (other - own) % period
    if 2 * d == period:
        return other > own
    return 0 < 2 * d < period


def update_phase(state: NodeState, now: int, period: int):
    if state.in_sync:
        phase = (state.phase + (now - state.last_time_check)) % period
    else:
        phase = 0
    return replace(state, phase=phase, last_time_check=now), phase


def valid_message(msg, cfg: ProtocolConfig) -> bool:
    p = getattr(msg, "phase", None)
    return isinstance(p, int) and not isinstance(p, bool) and 0 <= p < cfg.period


def sync_alive(state: NodeState, now: int, cfg: ProtocolConfig) -> bool:
    return (state.last_receive_time is not None
            and now - state.last_receive_time < cfg.time_to_out_of_sync)


def handle_message(state: NodeState, msg: PhaseMessage, now: int,
                   cfg: ProtocolConfig):
    """Apply one received phase message; returns ``(state, adopted)``."""
    if not valid_message(msg, cfg):
        return replace(state, error_count=state.error_count + 1), False
    was_in_sync = state.in_sync
    state, phase = update_phase(state, now, cfg.period)
    state = replace(state, last_receive_time=now, in_sync=True)

    if was_in_sync:
        adopt = (is_behind(phase, msg.phase, cfg.period)
                 and compute_phase_shift(phase, msg.phase, cfg.period)
                 > cfg.allowed_phase_shift)
    else:
        # phase is pinned at 0, so any message is at or ahead of it
        adopt = True
    if not adopt:
        return state, False
    new_phase = (msg.phase + cfg.expected_latency) % cfg.period
    return replace(state, phase=new_phase, last_time_check=now,
                   adopt_count=state.adopt_count + 1), True


def amplitude_sinusoidal(phase: int, cfg: ProtocolConfig) -> float:
    if phase == 0:
        return float(cfg.hi_amplitude)
    half = (cfg.hi_amplitude - cfg.lo_amplitude) / 2
    return (math.cos(2 * math.pi * phase / cfg.period) + 1) * half + cfg.lo_amplitude


def amplitude_piecewise(phase: int, cfg: ProtocolConfig) -> float:
    hi, lo, period = cfg.hi_amplitude, cfg.lo_amplitude, cfg.period
    # slope chosen so the two segments meet LO at period/2 and HI at 0/period
    k = 2 * (hi - lo) / period
    if 2 * phase < period:
        return hi - k * phase
    return lo + k * (phase - period / 2)


def amplitude(phase: int, cfg: ProtocolConfig) -> float:
    if cfg.amplitude_shape == "piecewise":
        return amplitude_piecewise(phase, cfg)
    return amplitude_sinusoidal(phase, cfg)


def _light(state, cfg):
    if not state.in_sync:
        return float(cfg.hi_amplitude)
    return amplitude(state.phase, cfg)


def node_step(state: NodeState, now: int, inbox, cfg: ProtocolConfig) -> StepResult:
    """One pass of the main loop at local time ``now``.

    The node broadcasts when its beacon is due or immediately after adopting
    a phase, so that neighbours out of range of the original sender follow.
    """
    state = replace(state, in_sync=sync_alive(state, now, cfg))
    state, _ = update_phase(state, now, cfg.period)

    adopted_any = False
    for msg in inbox:
        state, adopted = handle_message(state, msg, now, cfg)
        adopted_any = adopted_any or adopted

    outbox = []
    if adopted_any or now - state.last_broadcast_time >= cfg.broadcast_interval:
        outbox.append(PhaseMessage(state.phase, state.node_number))
        state = replace(state, last_broadcast_time=now)
    return StepResult(state, outbox, _light(state, cfg))


def baseline_fire_at_zero_step(state: NodeState, now: int, inbox,
                               cfg: ProtocolConfig, rng=None) -> StepResult:
    """Episodic alternative: fire only when the phase passes through zero.

    A receiver resets its phase to ``expected_latency``.  A reset that moves
    the phase by more than the allowed shift, or that pulls the node into
    sync, counts as passing through zero and fires as well.  Out-of-sync
    nodes fire at random intervals in ``[broadcast_interval,
    2 * broadcast_interval]`` drawn from ``rng`` (midpoint if ``rng`` is None).
    Addressing is not used by this variant.
    """
    period = cfg.period
    was_in_sync = state.in_sync
    elapsed = now - state.last_time_check
    in_sync = sync_alive(state, now, cfg)
    wrapped = was_in_sync and in_sync and state.phase + elapsed >= period
    state = replace(state, in_sync=in_sync)
    state, _ = update_phase(state, now, period)

    reset_fire = False
    for msg in inbox:
        if not valid_message(msg, cfg):
            state = replace(state, error_count=state.error_count + 1)
            continue
        before_sync, before = state.in_sync, state.phase
        new_phase = cfg.expected_latency % period
        state = replace(state, in_sync=True, phase=new_phase,
                        last_time_check=now, last_receive_time=now,
                        next_fire_time=None)
        if (not before_sync
                or compute_phase_shift(before, new_phase, period) > cfg.allowed_phase_shift):
            reset_fire = True
            state = replace(state, adopt_count=state.adopt_count + 1)

    outbox = []
    if state.in_sync:
        fire = wrapped or reset_fire
    else:
        if state.next_fire_time is None:
            state = replace(state, next_fire_time=now + _fire_gap(cfg, rng))
        fire = now >= state.next_fire_time
        if fire:
            state = replace(state, next_fire_time=now + _fire_gap(cfg, rng))
    if fire:
        outbox.append(PhaseMessage(state.phase, state.node_number))
        state = replace(state, last_broadcast_time=now)
    return StepResult(state, outbox, _light(state, cfg))


def _fire_gap(cfg, rng):
    bi = cfg.broadcast_interval
    if rng is None:
        return bi + bi // 2
    return int(rng.integers(bi, 2 * bi + 1))
