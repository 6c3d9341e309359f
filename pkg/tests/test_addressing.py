import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from swarm_sync.addressing import assignment_for, can_hear, draw_node_number, maybe_redraw
from swarm_sync.config import ProtocolConfig, ValidationError
from swarm_sync.protocol import NodeState

CFG = ProtocolConfig()


def state(in_sync, number=1, last_redraw=0):
    return NodeState(in_sync=in_sync, phase=0, last_time_check=0,
                     last_receive_time=0 if in_sync else None, node_number=number,
                     last_broadcast_time=0, last_redraw_time=last_redraw)


def test_draw_reproducible():
    a = [draw_node_number(np.random.default_rng(42), 6) for _ in range(3)]
    assert a[0] == a[1] == a[2] and 1 <= a[0] <= 6


def test_draw_binomial():
    rng = np.random.default_rng(7)
    ones = sum(draw_node_number(rng, 2) == 1 for _ in range(10000))
    # Binomial(10000, 1/2): mean 5000, sigma 50
    assert abs(ones - 5000) <= 3 * 50


def test_draw_covers_range():
    rng = np.random.default_rng(0)
    assert {draw_node_number(rng, 6) for _ in range(500)} == set(range(1, 7))


def test_draw_rejects_degenerate():
    with pytest.raises(ValidationError):
        draw_node_number(np.random.default_rng(0), 1)


class TestAssignment:
    def test_first(self):
        a = assignment_for(1, 3)
        assert a.broadcast_address == 1 and a.listen_addresses == {2, 3}

    def test_last(self):
        a = assignment_for(3, 3)
        assert a.broadcast_address == 3 and a.listen_addresses == {1, 2}

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            assignment_for(4, 3)

    @given(st.integers(2, 40).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))))
    def test_invariants(self, args):
        n, i = args
        a = assignment_for(i, n)
        assert a.broadcast_address == i
        assert len(a.listen_addresses) == n - 1 and i not in a.listen_addresses


class TestCanHear:
    def test_distinct(self):
        a, b = assignment_for(1, 6), assignment_for(2, 6)
        assert can_hear(a, b) and can_hear(b, a)

    def test_same_number(self):
        assert not can_hear(assignment_for(4, 6), assignment_for(4, 6))

    def test_self(self):
        a = assignment_for(2, 6)
        assert not can_hear(a, a)

    @given(st.integers(1, 8), st.integers(1, 8))
    def test_symmetric(self, i, j):
        a, b = assignment_for(i, 8), assignment_for(j, 8)
        assert can_hear(a, b) == can_hear(b, a) == (i != j)


def test_conflict_probability():
    rng = np.random.default_rng(11)
    n, trials = 6, 30000
    hits = sum(draw_node_number(rng, n) == draw_node_number(rng, n) for _ in range(trials))
    sigma = math.sqrt(trials * (1 / n) * (1 - 1 / n))
    assert abs(hits - trials / n) <= 3 * sigma


class TestRedraw:
    def test_out_of_sync_due(self):
        s = maybe_redraw(state(False, last_redraw=0), CFG.redraw_interval,
                         np.random.default_rng(3), CFG)
        assert s.last_redraw_time == CFG.redraw_interval
        assert 1 <= s.node_number <= CFG.address_count

    def test_in_sync_never(self):
        s = state(True)
        assert maybe_redraw(s, 10 * CFG.redraw_interval, np.random.default_rng(3), CFG) is s

    def test_throttled(self):
        s = state(False)
        assert maybe_redraw(s, CFG.redraw_interval - 1, np.random.default_rng(3), CFG) is s

    def test_may_repeat_number(self):
        rng = np.random.default_rng(5)
        same = 0
        for _ in range(600):
            s = maybe_redraw(state(False, number=3), CFG.redraw_interval, rng, CFG)
            same += s.node_number == 3
        assert 0 < same < 200  # about 1/6 of 600


def test_eventual_resolution():
    """Two conflicting idle nodes redrawing in lockstep: P(still stuck after k) = (1/N)^k."""
    n, trials, kmax = 6, 3000, 3
    cfg = ProtocolConfig(address_count=n)
    stuck = np.zeros(kmax + 1, dtype=int)
    for trial in range(trials):
        ra, rb = np.random.default_rng([trial, 0]), np.random.default_rng([trial, 1])
        a, b = state(False, 1), state(False, 1)
        for k in range(1, kmax + 1):
            t = k * cfg.redraw_interval
            a, b = maybe_redraw(a, t, ra, cfg), maybe_redraw(b, t, rb, cfg)
            if a.node_number == b.node_number:
                stuck[k] += 1
            else:
                break
    for k in range(1, kmax + 1):
        p = n ** -k
        sigma = math.sqrt(trials * p * (1 - p))
        assert abs(stuck[k] - trials * p) <= 3.5 * sigma + 1
