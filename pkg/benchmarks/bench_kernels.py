"""Time the compiled swarm scan against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Inputs are taken from real simulator runs so that the adjacency structure
(and hence the fallback's component cache hit rate) is realistic, plus one
synthetic worst case where the topology changes every tick.
"""

import argparse
import time

import numpy as np

from swarm_sync.canned import canned_scenario
from swarm_sync.kernels import backends
from swarm_sync.netsim import run


def _inputs_from(name, seed=0):
    r = run(canned_scenario(name, seed))
    sc = r.scenario
    return (np.ascontiguousarray(r.positions), r.in_sync.astype(np.uint8),
            r.node_number.astype(np.int64), r.phase.astype(np.int64),
            sc.radio.range, sc.config.period, sc.protocol_variant == "main")


def _random_inputs(ticks=20000, n=12, seed=0):
    rng = np.random.default_rng(seed)
    pos = rng.uniform(0, 90, size=(ticks, n, 2))
    in_sync = (rng.random((ticks, n)) < 0.85).astype(np.uint8)
    number = rng.integers(1, 7, size=(ticks, n))
    phase = rng.integers(0, 2200, size=(ticks, n))
    return pos, in_sync, number, phase, 30.0, 2200, True


def _best(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    opts = p.parse_args(argv)

    cases = {name: _inputs_from(name) for name in ("merge2x3", "faultyNeighbor", "passing")}
    cases["random-12x20000"] = _random_inputs()
    kernels = backends()
    if "compiled" not in kernels:
        print("compiled extension not built; only the numpy fallback is available")

    print(f"{'case':<18}{'ticks':>7}{'nodes':>6}" + "".join(f"{k:>12}" for k in kernels)
          + ("    speedup" if len(kernels) > 1 else ""))
    for name, args in cases.items():
        times, outs = {}, {}
        for k, fn in kernels.items():
            times[k], outs[k] = _best(fn, args, opts.repeat)
        if len(outs) > 1:
            ref = outs["python"]
            for other in outs.values():
                assert all(np.array_equal(a, b) for a, b in zip(ref, other)), name
        ticks, n = args[1].shape
        line = f"{name:<18}{ticks:>7}{n:>6}" + "".join(f"{times[k] * 1e3:>10.1f}ms"
                                                       for k in kernels)
        if "compiled" in times:
            line += f"{times['python'] / times['compiled']:>10.1f}x"
        print(line)


if __name__ == "__main__":
    main()
