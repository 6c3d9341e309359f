"""Built-in scenarios covering forming, chaining, merging, leaving and faults.

Speeds are bicycle-like (5 m/s) with a 30 m radio range.  Unless noted, the
radio has no jitter and no loss, and nodes carry distinct node numbers, so
that timing bounds can be checked exactly.  ``conflict2`` exercises number
collisions on purpose; ``passing`` and ``faultyNeighbor`` draw numbers from
the seed.
"""

from __future__ import annotations

from dataclasses import replace

from .config import ProtocolConfig
from .scenario import FaultSpec, MobilityTrace, NodeSpec, RadioModel, Scenario


def _still(x, y=0.0):
    return [(0, x, y)]


def approach2(seed=0):
    """Two riders meet, ride together for a while, then split up."""
    trace = {
        1: [(0, 0.0, 0.0), (3300, 16.5, 0.0), (12000, 16.5, 0.0), (20000, -23.5, 0.0)],
        2: [(0, 36.0, 0.0), (3300, 19.5, 0.0), (12000, 19.5, 0.0), (20000, 59.5, 0.0)],
    }
    nodes = (NodeSpec(1, in_sync=True, node_number=1), NodeSpec(2, in_sync=True, node_number=2))
    return Scenario(nodes=nodes, trace=MobilityTrace(trace), seed=seed,
                    duration_ms=20000, name="approach2")


def chain3(seed=0):
    """Node 2 rolls in between nodes 1 and 3, which cannot hear each other."""
    trace = {
        1: _still(0.0),
        2: [(0, 25.0, 20.0), (4000, 25.0, 0.0)],
        3: _still(50.0),
    }
    nodes = tuple(NodeSpec(i, in_sync=True, node_number=i) for i in (1, 2, 3))
    return Scenario(nodes=nodes, trace=MobilityTrace(trace), seed=seed,
                    duration_ms=12000, name="chain3")


def merge2x3(seed=0):
    """A moving swarm of three catches up with a waiting swarm of three."""
    trace = {}
    for k, i in enumerate((1, 2, 3)):
        x0 = -30.0 + 5 * k
        trace[i] = [(0, x0, 0.0), (12000, x0 + 60.0, 0.0)]
    for k, i in enumerate((4, 5, 6)):
        trace[i] = _still(45.0 + 5 * k)
    nodes = tuple(NodeSpec(i, in_sync=True, phase_group="A", node_number=i) for i in (1, 2, 3)) + \
        tuple(NodeSpec(i, in_sync=True, phase_group="B", node_number=i) for i in (4, 5, 6))
    return Scenario(nodes=nodes, trace=MobilityTrace(trace), seed=seed,
                    duration_ms=20000, name="merge2x3")


def departure(seed=0):
    """Node 3 leaves a synced swarm of three at t=5 s and never comes back."""
    trace = {
        1: _still(0.0),
        2: _still(5.0),
        3: [(0, 10.0, 0.0), (5000, 10.0, 0.0), (15000, 60.0, 0.0)],
    }
    nodes = tuple(NodeSpec(i, in_sync=True, phase_group="S", node_number=i) for i in (1, 2, 3))
    return Scenario(nodes=nodes, trace=MobilityTrace(trace), seed=seed,
                    duration_ms=18000, name="departure")


def passing(seed=0):
    """Two pairs ride past each other in opposite directions; lossy radio."""
    trace = {
        1: [(0, -100.0, 0.0), (20000, 100.0, 0.0)],
        2: [(0, -105.0, 0.0), (20000, 95.0, 0.0)],
        3: [(0, 100.0, 5.0), (20000, -100.0, 5.0)],
        4: [(0, 105.0, 5.0), (20000, -95.0, 5.0)],
    }
    nodes = (NodeSpec(1, in_sync=True, phase_group="east"),
             NodeSpec(2, in_sync=True, phase_group="east"),
             NodeSpec(3, in_sync=True, phase_group="west"),
             NodeSpec(4, in_sync=True, phase_group="west"))
    radio = RadioModel(latency_jitter=3.0, loss_probability=0.05)
    return Scenario(nodes=nodes, trace=MobilityTrace(trace), radio=radio, seed=seed,
                    duration_ms=20000, name="passing")


def conflict2(seed=0, address_count=6):
    """Two idle nodes in range that start on the same node number."""
    trace = {1: _still(0.0), 2: _still(10.0)}
    nodes = (NodeSpec(1, node_number=1), NodeSpec(2, node_number=1))
    cfg = ProtocolConfig(address_count=address_count)
    return Scenario(nodes=nodes, trace=MobilityTrace(trace), config=cfg, seed=seed,
                    duration_ms=12000, name="conflict2")


def faulty_neighbor(seed=0):
    """Swarm A has a random-phase broadcaster next to it; swarm B is far away."""
    trace = {1: _still(0.0), 2: _still(5.0), 3: _still(10.0),
             7: _still(5.0, 10.0),
             4: _still(200.0), 5: _still(205.0), 6: _still(210.0)}
    nodes = tuple(NodeSpec(i, in_sync=True, phase_group="A") for i in (1, 2, 3)) + \
        tuple(NodeSpec(i, in_sync=True, phase_group="B") for i in (4, 5, 6)) + \
        (NodeSpec(7),)
    faults = (FaultSpec(7, "randomPhase", 0, 20000),)
    return Scenario(nodes=nodes, trace=MobilityTrace(trace), faults=faults, seed=seed,
                    duration_ms=20000, name="faultyNeighbor")


def baseline_compare(seed=0):
    """``approach2`` run with the fire-at-zero protocol."""
    return replace(approach2(seed), protocol_variant="fireAtZero", name="baselineCompare")


CANNED = {
    "approach2": approach2,
    "chain3": chain3,
    "merge2x3": merge2x3,
    "departure": departure,
    "passing": passing,
    "conflict2": conflict2,
    "faultyNeighbor": faulty_neighbor,
    "baselineCompare": baseline_compare,
}


def canned_scenario(name, seed=0):
    try:
        build = CANNED[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(CANNED)}") from None
    return build(seed)
