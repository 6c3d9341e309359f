"""Protocol constants and validation errors.

Only the period (2200 ms) comes from the prototype; every other default is a
tunable chosen for the simulator and can be overridden per scenario.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, asdict

AMPLITUDE_SHAPES = ("sinusoidal", "piecewise")


class ValidationError(ValueError):
    """Raised when a config or scenario violates one or more invariants.

    ``violations`` is a list of ``(field, message)`` pairs so callers can
    report every problem at once instead of only the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        text = "; ".join(f"{f}: {m}" for f, m in self.violations)
        super().__init__(text or "invalid")

    @property
    def fields(self):
        return [f for f, _ in self.violations]


@dataclass(frozen=True)
class ProtocolConfig:
    period: int = 2200
    hi_amplitude: float = 255.0
    lo_amplitude: float = 40.0
    allowed_phase_shift: int = 60
    expected_latency: int = 15
    time_to_out_of_sync: int = 3000
    broadcast_interval: int = 250
    address_count: int = 6
    redraw_interval: int = 1000
    amplitude_shape: str = "sinusoidal"

    def violations(self, prefix="config"):
        out = []

        def bad(name, msg):
            out.append((f"{prefix}.{_CAMEL[name]}", msg))

        for name in ("period", "allowed_phase_shift", "expected_latency",
                     "time_to_out_of_sync", "broadcast_interval",
                     "address_count", "redraw_interval"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                bad(name, f"must be an integer, got {v!r}")
        for name in ("hi_amplitude", "lo_amplitude"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                bad(name, f"must be a number, got {v!r}")
        if out:
            return out

        if self.period <= 0:
            bad("period", "must be > 0")
        if not 0 < self.lo_amplitude < self.hi_amplitude:
            bad("lo_amplitude", "requires 0 < loAmplitude < hiAmplitude")
        if not 0 <= self.allowed_phase_shift < self.period / 2:
            bad("allowed_phase_shift", "requires 0 <= allowedPhaseShift < period/2")
        if self.expected_latency < 0:
            bad("expected_latency", "must be >= 0")
        if self.expected_latency >= self.allowed_phase_shift:
            bad("expected_latency", "requires expectedLatency < allowedPhaseShift")
        if self.broadcast_interval <= 0:
            bad("broadcast_interval", "must be > 0")
        if self.time_to_out_of_sync <= self.broadcast_interval:
            bad("time_to_out_of_sync", "requires timeToOutOfSync > broadcastInterval")
        if self.address_count < 2:
            bad("address_count", "requires addressCount >= 2")
        if self.redraw_interval <= 0:
            bad("redraw_interval", "must be > 0")
        if self.amplitude_shape not in AMPLITUDE_SHAPES:
            bad("amplitude_shape", f"must be one of {AMPLITUDE_SHAPES}")
        return out

    def check(self):
        v = self.violations()
        if v:
            raise ValidationError(v)
        return self

    def to_dict(self):
        return {_CAMEL[k]: v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data, prefix="config"):
        unknown = sorted(set(data) - set(_SNAKE))
        if unknown:
            raise ValidationError([(f"{prefix}.{k}", "unknown field") for k in unknown])
        return cls(**{_SNAKE[k]: v for k, v in data.items()})


def _camel(name):
    head, *rest = name.split("_")
    return head + "".join(p.title() for p in rest)


_CAMEL = {f.name: _camel(f.name) for f in fields(ProtocolConfig)}
_SNAKE = {v: k for k, v in _CAMEL.items()}

CONFIG_FIELDS = tuple(_SNAKE)
