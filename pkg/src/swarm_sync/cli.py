"""Command-line entry point: ``swarm-sync {run,sweep,validate}``.

Exit codes: 0 success, 1 validation failure, 2 runtime or I/O failure.
Every error is also printed to stderr as one ``key=value`` line.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import statistics
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from .canned import CANNED, canned_scenario
from .config import ValidationError, _SNAKE
from .metrics import measure
from .netsim import SNAPSHOT_HEADER, run
from .scenario import _RADIO_KEYS, Scenario

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
FORMATS = ("json", "csv")
PARAM_ALIASES = {"N": "addressCount", "T": "period"}


class CliError(Exception):
    def __init__(self, code, field, message):
        super().__init__(message)
        self.code, self.field, self.message = code, field, message


def _error_line(code, field, message):
    return f"swarm-sync: error code={code} field={field} msg={json.dumps(message)}"


def _report(exc):
    if isinstance(exc, ValidationError):
        for f, m in exc.violations:
            print(_error_line(EXIT_INVALID, f, m), file=sys.stderr)
        return EXIT_INVALID
    print(_error_line(exc.code, exc.field, exc.message), file=sys.stderr)
    return exc.code


def load_scenario(ref, seed=None):
    if ref in CANNED:
        sc = canned_scenario(ref, seed=0 if seed is None else seed)
    else:
        try:
            with open(ref) as fh:
                text = fh.read()
        except OSError as exc:
            raise CliError(EXIT_RUNTIME, "scenario", f"cannot read {ref}: {exc.strerror}")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_RUNTIME, "scenario",
                           f"{ref}:{exc.lineno}:{exc.colno}: {exc.msg}")
        sc = Scenario.from_dict(data)
        if seed is not None:
            sc = sc.with_seed(seed)
    return sc.check()


def _coerce(name, raw, current):
    if isinstance(raw, str):
        try:
            if isinstance(current, bool):
                raise ValueError
            if isinstance(current, int):
                return int(raw)
            if isinstance(current, float):
                return float(raw)
        except ValueError:
            raise ValidationError([(name, f"expected {type(current).__name__}, got {raw!r}")])
    return raw


def apply_param(sc, name, value):
    """Return ``sc`` with one parameter overridden (sweep and ``--set``)."""
    name = PARAM_ALIASES.get(name, name)
    key = name.split(".", 1)[1] if name.startswith("config.") else name
    if key in _SNAKE:
        attr = _SNAKE[key]
        cfg = replace(sc.config, **{attr: _coerce(name, value, getattr(sc.config, attr))})
        return replace(sc, config=cfg)
    if name.startswith("radio.") and name[6:] in _RADIO_KEYS:
        attr = _RADIO_KEYS[name[6:]]
        radio = replace(sc.radio, **{attr: _coerce(name, value, getattr(sc.radio, attr))})
        return replace(sc, radio=radio)
    simple = {"protocolVariant": "protocol_variant", "durationMs": "duration_ms",
              "tickMs": "tick_ms", "seed": "seed"}
    if name in simple:
        attr = simple[name]
        return replace(sc, **{attr: _coerce(name, value, getattr(sc, attr))})
    raise ValidationError([(name, "unknown parameter")])


def _atomic_write(path, text):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _snapshot_csv(result, stride):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SNAPSHOT_HEADER)
    w.writerows(result.snapshot_rows(stride))
    return buf.getvalue()


def _out_dir(opts):
    out = opts.out or os.environ.get("SWARM_SYNC_OUT") or "swarm_sync_out"
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_RUNTIME, "out", f"cannot create {out}: {exc.strerror}")
    if not os.access(out, os.W_OK):
        raise CliError(EXIT_RUNTIME, "out", f"{out} is not writable")
    return out


def _formats(text):
    fmts = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in fmts if f not in FORMATS]
    if bad or not fmts:
        raise ValidationError([("format", f"choose from {','.join(FORMATS)}")])
    return fmts


def _overrides(sc, pairs):
    for item in pairs or ():
        if "=" not in item:
            raise ValidationError([("set", f"expected name=value, got {item!r}")])
        name, value = item.split("=", 1)
        sc = apply_param(sc, name, value)
    return sc.check()


def cmd_run(opts):
    fmts = _formats(opts.format)
    sc = _overrides(load_scenario(opts.scenario, opts.seed), opts.set)
    out = _out_dir(opts)
    try:
        result = run(sc)
        report = measure(result)
    except ValidationError:
        raise
    except Exception as exc:  # surfaced as a runtime failure, exit 2
        raise CliError(EXIT_RUNTIME, "run", f"{type(exc).__name__}: {exc}")
    _atomic_write(os.path.join(out, "scenario.json"), sc.to_json() + "\n")
    _atomic_write(os.path.join(out, "events.ndjson"), result.log_lines())
    if "json" in fmts:
        _atomic_write(os.path.join(out, "report.json"), report.to_json())
    if "csv" in fmts:
        _atomic_write(os.path.join(out, "snapshots.csv"),
                      _snapshot_csv(result, opts.snapshot_stride))
        _atomic_write(os.path.join(out, "dispersion.csv"), report.dispersion_csv())
        _atomic_write(os.path.join(out, "swarm_count.csv"), report.swarm_count_csv())
    tts = report.time_to_sync
    print(f"scenario={sc.name or opts.scenario} seed={sc.seed} "
          f"timeToSyncMs={'none' if tts is None else tts} "
          f"maxDispersionMs={report.max_dispersion()} out={out}")
    return EXIT_OK


def _sweep_one(args):
    sc, value, seed = args
    report = measure(run(sc))
    return value, seed, report.time_to_sync, report.first_contact


def cmd_sweep(opts):
    values = [v.strip() for v in (opts.values or "").split(",") if v.strip()]
    if not values:
        raise ValidationError([("values", "sweep needs at least one value")])
    if opts.seeds < 1:
        raise ValidationError([("seeds", "must be >= 1")])
    base = load_scenario(opts.scenario, opts.seed)
    base = _overrides(base, opts.set)
    base_seed = base.seed
    jobs = []
    for value in values:
        sc = apply_param(base, opts.param, value).check()
        for s in range(opts.seeds):
            jobs.append((sc.with_seed(base_seed + s), value, base_seed + s))
    out = _out_dir(opts)
    try:
        if opts.workers > 1:
            with ProcessPoolExecutor(max_workers=opts.workers) as pool:
                rows = list(pool.map(_sweep_one, jobs, chunksize=8))
        else:
            rows = [_sweep_one(j) for j in jobs]
    except Exception as exc:
        raise CliError(EXIT_RUNTIME, "sweep", f"{type(exc).__name__}: {exc}")

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow((opts.param, "seed", "time_to_sync_ms", "first_contact_ms"))
    for value, seed, tts, contact in rows:
        w.writerow((value, seed, "" if tts is None else tts, "" if contact is None else contact))
    _atomic_write(os.path.join(out, "sweep_runs.csv"), buf.getvalue())

    agg = io.StringIO()
    w = csv.writer(agg, lineterminator="\n")
    w.writerow((opts.param, "runs", "synced", "mean_time_to_sync_ms", "std_time_to_sync_ms"))
    for value in values:
        times = [r[2] for r in rows if r[0] == value and r[2] is not None]
        runs = sum(1 for r in rows if r[0] == value)
        mean = statistics.fmean(times) if times else float("nan")
        std = statistics.stdev(times) if len(times) > 1 else 0.0
        w.writerow((value, runs, len(times), f"{mean:.3f}", f"{std:.3f}"))
        print(f"{opts.param}={value} runs={runs} synced={len(times)} "
              f"meanTimeToSyncMs={mean:.1f} stdMs={std:.1f}")
    _atomic_write(os.path.join(out, "sweep_aggregate.csv"), agg.getvalue())
    return EXIT_OK


def cmd_validate(opts):
    try:
        with open(opts.path) as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EXIT_RUNTIME, "path", f"cannot read {opts.path}: {exc.strerror}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_RUNTIME, "path", f"{opts.path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    Scenario.from_dict(data)
    print(f"{opts.path}: ok")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="swarm-sync",
        description="Simulate decentralized light synchronization in bike swarms.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--scenario", required=True,
                        help=f"scenario JSON path or canned name ({', '.join(CANNED)})")
        sp.add_argument("--seed", type=int, default=None,
                        help="seed override (canned scenarios default to 0)")
        sp.add_argument("--out", default=None,
                        help="output directory (default $SWARM_SYNC_OUT or ./swarm_sync_out)")
        sp.add_argument("--set", action="append", metavar="NAME=VALUE",
                        help="override a parameter, e.g. radio.lossProbability=0.1")

    r = sub.add_parser("run", help="run one scenario and write log, snapshots and report",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    common(r)
    r.add_argument("--format", default="json,csv", help="comma list of report formats")
    r.add_argument("--snapshot-stride", type=int, default=1,
                   help="write every k-th tick to snapshots.csv")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="cross product of parameter values and seeds",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    common(s)
    s.add_argument("--param", required=True,
                   help="config field (e.g. addressCount or N), radio.<field>, protocolVariant")
    s.add_argument("--values", required=True, help="comma list of values")
    s.add_argument("--seeds", type=int, default=10, help="runs per value, seeds base..base+k-1")
    s.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="check a scenario file against all invariants")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    opts = build_parser().parse_args(argv)
    try:
        return opts.func(opts)
    except (ValidationError, CliError) as exc:
        return _report(exc)


if __name__ == "__main__":
    sys.exit(main())
