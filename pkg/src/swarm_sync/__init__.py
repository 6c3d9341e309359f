"""Decentralized light synchronization for bike swarms, plus a network simulator."""

from .config import ProtocolConfig, ValidationError
from .protocol import (NodeState, PhaseMessage, amplitude_piecewise, amplitude_sinusoidal,
                       baseline_fire_at_zero_step, compute_phase_shift, handle_message,
                       node_step, update_phase)
from .addressing import AddressAssignment, assignment_for, can_hear, draw_node_number, maybe_redraw
from .scenario import FaultSpec, MobilityTrace, NodeSpec, RadioModel, Scenario
from .netsim import RunResult, deliver, inject_fault, run
from .metrics import SyncReport, SwarmPartition, detect_swarms, measure
from .canned import canned_scenario

__version__ = "0.1.0"
