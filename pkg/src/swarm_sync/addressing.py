"""N-address broadcast/listen scheme.

A node with number ``i`` transmits on address ``i`` and listens on the other
``n - 1`` addresses, so two nodes hear each other unless they drew the same
number.  Out-of-sync nodes periodically redraw to escape such conflicts.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .config import ValidationError


@dataclass(frozen=True)
class AddressAssignment:
    node_number: int
    broadcast_address: int
    listen_addresses: frozenset


def draw_node_number(rng, n: int) -> int:
    if n < 2:
        raise ValidationError([("config.addressCount", f"need at least 2 addresses, got {n}")])
    return int(rng.integers(1, n + 1))


def assignment_for(node_number: int, n: int) -> AddressAssignment:
    if not 1 <= node_number <= n:
        raise ValueError(f"node number {node_number} outside 1..{n}")
    listen = frozenset(a for a in range(1, n + 1) if a != node_number)
    return AddressAssignment(node_number, node_number, listen)


def can_hear(sender: AddressAssignment, receiver: AddressAssignment) -> bool:
    if sender is receiver:
        return False
    return sender.broadcast_address in receiver.listen_addresses


def maybe_redraw(state, now, rng, cfg):
    """Redraw the node number of an out-of-sync node once per interval.

    The redraw is a plain uniform draw, so it may return the same number.
    """
    if state.in_sync or now - state.last_redraw_time < cfg.redraw_interval:
        return state
    return replace(state, node_number=draw_node_number(rng, cfg.address_count),
                   last_redraw_time=now)
