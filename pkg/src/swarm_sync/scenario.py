"""Scenario description: nodes, mobility, radio, faults and their JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .config import ProtocolConfig, ValidationError

VARIANTS = ("main", "fireAtZero")
FAULT_KINDS = ("randomPhase", "stuckPhase", "floodZero")
TOP_LEVEL_KEYS = ("protocolVariant", "config", "nodes", "trace", "radio",
                  "faults", "seed", "durationMs", "tickMs")


@dataclass(frozen=True)
class RadioModel:
    range: float = 30.0
    latency_mean: float = 15.0
    latency_jitter: float = 0.0
    loss_probability: float = 0.0

    def violations(self):
        out = []
        for key, attr in _RADIO_KEYS.items():
            v = getattr(self, attr)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                out.append((f"radio.{key}", f"must be a finite number, got {v!r}"))
        if out:
            return out
        if self.range <= 0:
            out.append(("radio.range", "must be > 0"))
        if self.latency_mean < 0:
            out.append(("radio.latencyMean", "must be >= 0"))
        if self.latency_jitter < 0:
            out.append(("radio.latencyJitter", "must be >= 0"))
        if not 0 <= self.loss_probability < 1:
            out.append(("radio.lossProbability", "requires 0 <= lossProbability < 1"))
        return out

    def to_dict(self):
        return {k: getattr(self, a) for k, a in _RADIO_KEYS.items()}


_RADIO_KEYS = {"range": "range", "latencyMean": "latency_mean",
               "latencyJitter": "latency_jitter", "lossProbability": "loss_probability"}


class MobilityTrace:
    """Piecewise-linear waypoints per node; position is held after the last one."""

    def __init__(self, waypoints):
        self.waypoints = {int(k): [tuple(w) for w in v] for k, v in waypoints.items()}
        self._arrays = {k: np.asarray(v, dtype=float).reshape(-1, 3)
                        for k, v in self.waypoints.items()}

    def violations(self):
        out = []
        for node_id, wps in self.waypoints.items():
            if not wps:
                out.append((f"trace.{node_id}", "needs at least one waypoint"))
                continue
            if any(len(w) != 3 for w in wps):
                out.append((f"trace.{node_id}", "waypoints are [t_ms, x, y]"))
                continue
            times = [w[0] for w in wps]
            if any(b <= a for a, b in zip(times, times[1:])):
                out.append((f"trace.{node_id}", "waypoint times must be strictly increasing"))
        return out

    def position(self, node_id, t):
        a = self._arrays[node_id]
        return (float(np.interp(t, a[:, 0], a[:, 1])),
                float(np.interp(t, a[:, 0], a[:, 2])))

    def positions(self, node_ids, times):
        times = np.asarray(times, dtype=float)
        out = np.empty((len(times), len(node_ids), 2))
        for j, node_id in enumerate(node_ids):
            a = self._arrays[node_id]
            out[:, j, 0] = np.interp(times, a[:, 0], a[:, 1])
            out[:, j, 1] = np.interp(times, a[:, 0], a[:, 2])
        return out

    def to_dict(self):
        return {str(k): [list(w) for w in v] for k, v in sorted(self.waypoints.items())}


@dataclass(frozen=True)
class FaultSpec:
    node_id: int
    kind: str
    start_time: int
    end_time: int
    phase: int | None = None  # emitted phase for stuckPhase

    def active(self, t):
        return self.start_time <= t < self.end_time

    def to_dict(self):
        return {"nodeId": self.node_id, "kind": self.kind, "startTime": self.start_time,
                "endTime": self.end_time, "phase": self.phase}


@dataclass(frozen=True)
class NodeSpec:
    """Initial conditions of one node; ``None`` fields are drawn from the seed."""

    id: int
    in_sync: bool = False
    phase: int | None = None
    phase_group: str | None = None
    node_number: int | None = None
    clock_offset: int | None = None
    broadcast_offset: int | None = None

    def to_dict(self):
        return {"id": self.id, "inSync": self.in_sync, "phase": self.phase,
                "phaseGroup": self.phase_group, "nodeNumber": self.node_number,
                "clockOffset": self.clock_offset, "broadcastOffset": self.broadcast_offset}


_NODE_KEYS = {"id": "id", "inSync": "in_sync", "phase": "phase", "phaseGroup": "phase_group",
              "nodeNumber": "node_number", "clockOffset": "clock_offset",
              "broadcastOffset": "broadcast_offset"}
_FAULT_KEYS = {"nodeId": "node_id", "kind": "kind", "startTime": "start_time",
               "endTime": "end_time", "phase": "phase"}


@dataclass(frozen=True)
class Scenario:
    nodes: tuple
    trace: MobilityTrace
    config: ProtocolConfig = field(default_factory=ProtocolConfig)
    radio: RadioModel = field(default_factory=RadioModel)
    faults: tuple = ()
    protocol_variant: str = "main"
    seed: int = 0
    duration_ms: int = 10000
    tick_ms: int = 1
    name: str | None = None

    @property
    def node_ids(self):
        return [n.id for n in self.nodes]

    def with_seed(self, seed):
        return replace(self, seed=seed)

    def violations(self):
        out = []
        if self.protocol_variant not in VARIANTS:
            out.append(("protocolVariant", f"must be one of {VARIANTS}"))
        out += self.config.violations()
        out += self.radio.violations()
        out += self.trace.violations()
        if not _is_int(self.seed) or self.seed < 0:
            out.append(("seed", "must be a non-negative integer"))
        if not _is_int(self.tick_ms) or self.tick_ms < 1:
            out.append(("tickMs", "requires tickMs >= 1"))
        if not _is_int(self.duration_ms) or self.duration_ms <= 0:
            out.append(("durationMs", "must be a positive integer"))
        ids = self.node_ids
        if not ids:
            out.append(("nodes", "at least one node is required"))
        if len(set(ids)) != len(ids):
            out.append(("nodes", "node ids must be unique"))
        cfg_ok = not self.config.violations()
        for i, n in enumerate(self.nodes):
            where = f"nodes[{i}]"
            if not _is_int(n.id) or n.id < 0:
                out.append((f"{where}.id", "must be a non-negative integer"))
            elif n.id not in self.trace.waypoints:
                out.append((f"trace.{n.id}", "missing waypoints for node"))
            if not isinstance(n.in_sync, bool):
                out.append((f"{where}.inSync", "must be a boolean"))
            if n.phase is not None:
                if not _is_int(n.phase) or (cfg_ok and not 0 <= n.phase < self.config.period):
                    out.append((f"{where}.phase", "must be an integer in [0, period)"))
            if n.node_number is not None:
                if not _is_int(n.node_number) or (
                        cfg_ok and not 1 <= n.node_number <= self.config.address_count):
                    out.append((f"{where}.nodeNumber", "must be an integer in 1..addressCount"))
            if n.clock_offset is not None and (not _is_int(n.clock_offset) or n.clock_offset < 0):
                out.append((f"{where}.clockOffset", "must be a non-negative integer"))
            if n.broadcast_offset is not None:
                if not _is_int(n.broadcast_offset) or n.broadcast_offset < 0 or (
                        cfg_ok and n.broadcast_offset >= self.config.broadcast_interval):
                    out.append((f"{where}.broadcastOffset",
                                "must be an integer in [0, broadcastInterval)"))
        extra = sorted(set(self.trace.waypoints) - set(ids))
        for node_id in extra:
            out.append((f"trace.{node_id}", "waypoints for unknown node"))
        for i, f in enumerate(self.faults):
            where = f"faults[{i}]"
            if f.node_id not in ids:
                out.append((f"{where}.nodeId", f"unknown node {f.node_id!r}"))
            if f.kind not in FAULT_KINDS:
                out.append((f"{where}.kind", f"must be one of {FAULT_KINDS}"))
            if not (_is_int(f.start_time) and _is_int(f.end_time)) or f.start_time >= f.end_time:
                out.append((f"{where}.startTime", "requires integer startTime < endTime"))
            if f.kind == "stuckPhase":
                if not _is_int(f.phase) or (cfg_ok and not 0 <= f.phase < self.config.period):
                    out.append((f"{where}.phase", "stuckPhase needs a phase in [0, period)"))
        return out

    def check(self):
        v = self.violations()
        if v:
            raise ValidationError(v)
        return self

    def to_dict(self):
        return {
            "protocolVariant": self.protocol_variant,
            "config": self.config.to_dict(),
            "nodes": [n.to_dict() for n in self.nodes],
            "trace": self.trace.to_dict(),
            "radio": self.radio.to_dict(),
            "faults": [f.to_dict() for f in self.faults],
            "seed": self.seed,
            "durationMs": self.duration_ms,
            "tickMs": self.tick_ms,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data, check=True):
        if not isinstance(data, dict):
            raise ValidationError([("scenario", "top level must be an object")])
        errors = []
        unknown = sorted(set(data) - set(TOP_LEVEL_KEYS) - {"name"})
        errors += [(k, "unknown field") for k in unknown]
        for key in ("nodes", "trace"):
            if key not in data:
                errors.append((key, "required field missing"))
        if errors:
            raise ValidationError(errors)

        config = _sub(errors, "config", data.get("config", {}), ProtocolConfig.from_dict)
        radio = _sub(errors, "radio", data.get("radio", {}),
                     lambda d: RadioModel(**_rename(d, _RADIO_KEYS, "radio")))
        nodes = []
        if not isinstance(data["nodes"], list):
            errors.append(("nodes", "must be a list"))
        else:
            for i, n in enumerate(data["nodes"]):
                node = _sub(errors, f"nodes[{i}]", n,
                            lambda d, i=i: NodeSpec(**_rename(d, _NODE_KEYS, f"nodes[{i}]")))
                if node is not None:
                    nodes.append(node)
        faults = []
        for i, f in enumerate(data.get("faults", []) or []):
            fault = _sub(errors, f"faults[{i}]", f,
                         lambda d, i=i: FaultSpec(**_rename(d, _FAULT_KEYS, f"faults[{i}]")))
            if fault is not None:
                faults.append(fault)
        trace = None
        try:
            trace = MobilityTrace(data["trace"])
        except (TypeError, ValueError, AttributeError) as exc:
            errors.append(("trace", f"malformed waypoints ({exc})"))
        if errors:
            raise ValidationError(errors)

        scenario = cls(
            nodes=tuple(nodes), trace=trace, config=config, radio=radio,
            faults=tuple(faults),
            protocol_variant=data.get("protocolVariant", "main"),
            seed=data.get("seed", 0), duration_ms=data.get("durationMs", 10000),
            tick_ms=data.get("tickMs", 1), name=data.get("name"),
        )
        return scenario.check() if check else scenario

    @classmethod
    def from_json(cls, text, check=True):
        return cls.from_dict(json.loads(text), check=check)

    @classmethod
    def load(cls, path, check=True):
        with open(path) as fh:
            return cls.from_json(fh.read(), check=check)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _rename(d, keys, prefix):
    if not isinstance(d, dict):
        raise ValidationError([(prefix, "must be an object")])
    unknown = sorted(set(d) - set(keys))
    if unknown:
        raise ValidationError([(f"{prefix}.{k}", "unknown field") for k in unknown])
    return {keys[k]: v for k, v in d.items()}


def _sub(errors, where, d, build):
    if not isinstance(d, dict):
        errors.append((where, "must be an object"))
        return None
    try:
        return build(d)
    except ValidationError as exc:
        errors.extend(exc.violations)
    except TypeError as exc:
        errors.append((where, str(exc)))
    return None
