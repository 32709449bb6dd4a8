"""Command-line front end.

Subcommands: schedule, decouple-sweep, homogenize-sweep, verify, spectrum.
Every run is deterministic for a fixed seed: identical invocations produce
byte-identical output files.  Numbers are written with 17 significant
digits and '.' decimal separator.

Exit codes: 0 success, 1 acceptance failure (slope outside its window or a
failed verification), 2 usage error.

A plain-text config file (``--config``, ``key=value`` per line, '#'
comments) supplies defaults for any long flag name; explicit flags win.
The environment variable BDD_THREADS caps the sweep worker pool.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import IO, Sequence

import numpy as np

from . import dyson, evolution, pauli_basis, schedules, spin_boson
from .symplectic import ModeLayout

SLOPE_MARGIN = (0.7, 1.5)  # accepted slope window is [N+0.7, N+1.5]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _workers() -> int:
    raw = os.environ.get("BDD_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _load_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {line!r}")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _merge_config(args: argparse.Namespace, defaults: dict) -> argparse.Namespace:
    """Fill unset (None) arguments from the config file, then from defaults."""
    config = {}
    if getattr(args, "config", None):
        config = _load_config(args.config)
    for key, fallback in defaults.items():
        if getattr(args, key, None) is None:
            if key in config:
                raw = config[key]
                caster = type(fallback) if fallback is not None else str
                if caster is bool:
                    setattr(args, key, raw.lower() in ("1", "true", "yes"))
                else:
                    setattr(args, key, caster(raw))
            else:
                setattr(args, key, fallback)
    return args


def _open_out(path: str | None) -> IO[str]:
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


def _t_grid(tmin: float, tmax: float, points: int) -> tuple[float, ...]:
    if not (0 < tmin < tmax) or points < 2:
        raise ValueError("need 0 < tmin < tmax and at least two grid points")
    return tuple(np.logspace(math.log10(tmin), math.log10(tmax), points))


def _slope_window(order: int) -> tuple[float, float]:
    return order + SLOPE_MARGIN[0], order + SLOPE_MARGIN[1]


def _write_sweep_csv(result: evolution.SweepResult, stream: IO[str]) -> None:
    stream.write("T,residual,omega,bound,floor\n")
    for i, T in enumerate(result.times):
        omega = _fmt(result.omegas[i]) if result.omegas is not None else ""
        bound = _fmt(result.bounds[i]) if result.bounds is not None else ""
        stream.write(f"{_fmt(T)},{_fmt(result.residuals[i])},{omega},{bound},"
                     f"{int(result.floor_flags[i])}\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_schedule(args: argparse.Namespace) -> int:
    _merge_config(args, {"scheme": "decoupling", "N": 1, "m": 1, "nS": 1,
                         "out": None})
    if args.N < 1:
        print("error: N must be >= 1", file=sys.stderr)
        return 2
    try:
        if args.scheme == "decoupling":
            sched = schedules.decoupling_schedule(args.N, args.nS)
        elif args.scheme == "qubit-nudd":
            sched = schedules.qubit_nudd_schedule(args.N, args.m)
        elif args.scheme == "homogenization":
            sched = schedules.homogenization_schedule(args.N, args.m)
        else:
            print(f"error: unknown scheme {args.scheme!r}", file=sys.stderr)
            return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    stream = _open_out(args.out)
    try:
        schedules.write_schedule(sched, stream)
    finally:
        if stream is not sys.stdout:
            stream.close()
    return 0


def cmd_decouple_sweep(args: argparse.Namespace) -> int:
    _merge_config(args, {"seed": 0, "N": 2, "nS": 1, "nE": 1, "tmin": 1e-3,
                         "tmax": 1e-1, "points": 10, "tol": 1e-12,
                         "degree": 0, "scale_ss": 1.0, "scale_se": 1.0,
                         "scale_ee": 1.0, "out": None})
    if args.N < 1 or args.nS < 1 or args.nE < 0:
        print("error: invalid N/nS/nE", file=sys.stderr)
        return 2
    try:
        grid = _t_grid(args.tmin, args.tmax, args.points)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    layout = ModeLayout(n_system=args.nS, n_env=args.nE)
    gen = evolution.random_generator(layout, seed=args.seed,
                                     scale_ss=args.scale_ss,
                                     scale_se=args.scale_se,
                                     scale_ee=args.scale_ee,
                                     degree=args.degree)
    cfg = evolution.PropagatorConfig(tolerance=args.tol)
    result = evolution.order_sweep(gen, "decoupling", args.N, grid, cfg,
                                   workers=_workers())
    stream = _open_out(args.out)
    try:
        _write_sweep_csv(result, stream)
    finally:
        if stream is not sys.stdout:
            stream.close()
    if args.scale_se == 0.0:
        # nothing to suppress; CSV carries the floor flags, no slope claim
        return 0
    lo, hi = _slope_window(args.N)
    if result.slope is None or not lo <= result.slope <= hi:
        print(f"slope acceptance failed: slope={result.slope} window=[{lo},{hi}]",
              file=sys.stderr)
        return 1
    return 0


def cmd_homogenize_sweep(args: argparse.Namespace) -> int:
    _merge_config(args, {"seed": 0, "N": 1, "m": 1, "nS": None, "nE": 1,
                         "tmin": 1e-3, "tmax": 1e-1, "points": 10,
                         "tol": 1e-12, "degree": 0, "out": None})
    if args.N < 1 or args.m < 0:
        print("error: invalid N/m", file=sys.stderr)
        return 2
    if args.nS is not None and args.nS != 2 ** args.m:
        print(f"error: homogenization needs nS = 2^m = {2 ** args.m}, got {args.nS}",
              file=sys.stderr)
        return 2
    try:
        grid = _t_grid(args.tmin, args.tmax, args.points)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    layout = ModeLayout(n_system=2 ** args.m, n_env=args.nE)
    gen = evolution.random_generator(layout, seed=args.seed, scale_ss=1.0,
                                     scale_se=0.0, scale_ee=1.0,
                                     degree=args.degree)
    cfg = evolution.PropagatorConfig(tolerance=args.tol)
    result = evolution.order_sweep(gen, "homogenization", args.N, grid, cfg,
                                   m=args.m, workers=_workers())
    stream = _open_out(args.out)
    try:
        _write_sweep_csv(result, stream)
    finally:
        if stream is not sys.stdout:
            stream.close()
    lo, hi = _slope_window(args.N)
    if result.slope is None or not lo <= result.slope <= hi:
        print(f"slope acceptance failed: slope={result.slope} window=[{lo},{hi}]",
              file=sys.stderr)
        return 1
    return 0


_VERIFY_CHECKS = ("basis", "udd", "nudd", "homogenization", "correspondence")


def cmd_verify(args: argparse.Namespace) -> int:
    _merge_config(args, {"N": 2, "m": 1, "tol": 1e-10, "out": None,
                         "mutate": False})
    if not args.check:
        print("error: select at least one check "
              f"(--check {{{','.join(_VERIFY_CHECKS)},all}})", file=sys.stderr)
        return 2
    selected = set(args.check)
    if "all" in selected:
        selected = set(_VERIFY_CHECKS)
    unknown = selected - set(_VERIFY_CHECKS)
    if unknown:
        print(f"error: unknown checks {sorted(unknown)}", file=sys.stderr)
        return 2

    rows: list[tuple[str, str, str, str, float, bool, bool]] = []
    all_pass = True

    def add_report(check: str, report: dyson.ConditionReport) -> None:
        nonlocal all_pass
        all_pass &= report.passed
        for row in report.rows:
            ok = abs(row.value) <= report.tol if row.required_zero else True
            rows.append((check, str(row.s),
                         ";".join(str(r) for r in row.powers),
                         dyson.format_labels(row.labels),
                         row.value, row.required_zero, ok))

    try:
        if "basis" in selected:
            count_ok = len(pauli_basis.gamma_set(args.m)) == \
                2 * 2 ** (2 * args.m) + 2 ** args.m
            adj = pauli_basis.verify_adjoint_action(args.m, tol=args.tol)
            ok = count_ok and adj.passed
            all_pass &= ok
            rows.append(("basis", "-", "-", f"m={args.m}", adj.max_deviation,
                         True, ok))
        if "udd" in selected:
            add_report("udd", dyson.check_udd_condition(args.N, tol=args.tol))
        if "nudd" in selected:
            add_report("nudd", dyson.check_qubit_nudd_condition(
                args.N, args.m, tol=args.tol))
        if "homogenization" in selected:
            if args.mutate:
                report = _mutated_homogenization_report(args.N, args.m, args.tol)
            else:
                report = dyson.check_homogenization_condition(
                    args.N, args.m, tol=args.tol)
            add_report("homogenization", report)
        if "correspondence" in selected:
            corr = dyson.verify_qubit_bosonic_correspondence(args.N, args.m)
            all_pass &= corr.passed
            rows.append(("correspondence", "-", "-",
                         f"N={args.N};m={args.m}", float(len(corr.mismatches)),
                         True, corr.passed))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    stream = _open_out(args.out)
    try:
        stream.write("check,s,r,labels,value,required_zero,pass\n")
        for check, s, r, labels, value, required, ok in rows:
            stream.write(f"{check},{s},{r},{labels},{_fmt(value)},"
                         f"{int(required)},{int(ok)}\n")
    finally:
        if stream is not sys.stdout:
            stream.close()
    return 0 if all_pass else 1


def _mutated_homogenization_report(order: int, m: int, tol: float) -> dyson.ConditionReport:
    """Self-test aid: flip one pulse of the homogenization schedule and
    re-run the condition check (expected to fail)."""
    if m < 1:
        raise ValueError("the mutation self-test needs m >= 1")
    sched = schedules.homogenization_schedule(order, m)
    first = sched.entries[0]
    flipped = (first.pulse[0],
               (first.pulse[1][0] ^ 1, first.pulse[1][1])) + tuple(first.pulse[2:])
    entries = (schedules.PulseEntry(first.delta, flipped, first.sign),) + sched.entries[1:]
    mutated = schedules.PulseSchedule(scheme="bosonic-homogenization-mutated",
                                      order=sched.order, entries=entries,
                                      m=sched.m, n_system=sched.n_system)
    return dyson.check_homogenization_condition_for(mutated, order, m, tol=tol)


def _seeded_bath(seed: int, n_modes: int, beta: float,
                 coupling_scale: float) -> spin_boson.BathSpec:
    """Deterministic bath with max frequency normalized to 1."""
    rng = np.random.default_rng(seed)
    om = rng.uniform(0.2, 1.0, n_modes)
    om /= om.max()
    lam = coupling_scale * rng.uniform(0.5, 1.0, n_modes)
    return spin_boson.BathSpec(couplings=tuple(lam), frequencies=tuple(om),
                               beta=beta)


def cmd_spectrum(args: argparse.Namespace) -> int:
    _merge_config(args, {"seed": 0, "nE": 3, "beta": 1.0, "L": 2,
                         "coupling_scale": 0.3, "tmin": 0.05, "tmax": 2.0,
                         "points": 20, "cross_validate": False, "out": None})
    if args.L < 2 or args.L % 2:
        print("error: the pulse count L must be even and >= 2", file=sys.stderr)
        return 2
    if args.nE < 1:
        print("error: need at least one bath line", file=sys.stderr)
        return 2
    try:
        grid = _t_grid(args.tmin, args.tmax, args.points)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    bath = _seeded_bath(args.seed, args.nE, args.beta, args.coupling_scale)
    trains = {
        "udd": spin_boson.even_flip_train(args.L),
        "periodic": tuple((j + 1) / args.L for j in range(args.L)),
    }
    w_max = max(bath.frequencies)
    stream = _open_out(args.out)
    try:
        header = "T"
        for name in trains:
            header += f",x_{name},y_{name},yL2_{name}"
            if args.cross_validate:
                header += f",dev_{name}"
        stream.write(header + "\n")
        for T in grid:
            fields = [_fmt(T)]
            for name, deltas in trains.items():
                fields.append(_fmt(spin_boson.shear_parameter(T, bath, deltas)))
                fields.append(_fmt(spin_boson.added_noise(T, bath, deltas)))
                fields.append(_fmt(abs(spin_boson.y_filter(w_max * T, deltas)) ** 2))
                if args.cross_validate:
                    report = spin_boson.cross_validate(bath, deltas, T)
                    fields.append(_fmt(report.max_deviation))
            stream.write(",".join(fields) + "\n")
    finally:
        if stream is not sys.stdout:
            stream.close()
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosonic-dd",
        description="Bosonic dynamical-decoupling schedules, symplectic "
                    "evolution sweeps and condition verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("schedule", help="emit a pulse schedule file")
    common(p)
    p.add_argument("--scheme", choices=("decoupling", "qubit-nudd",
                                        "homogenization"))
    p.add_argument("--N", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--nS", type=int)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("decouple-sweep", help="decoupling residual order sweep")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--nS", type=int)
    p.add_argument("--nE", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--scale-ss", dest="scale_ss", type=float)
    p.add_argument("--scale-se", dest="scale_se", type=float)
    p.add_argument("--scale-ee", dest="scale_ee", type=float)
    p.set_defaults(func=cmd_decouple_sweep)

    p = sub.add_parser("homogenize-sweep", help="homogenization order sweep")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--nS", type=int)
    p.add_argument("--nE", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_homogenize_sweep)

    p = sub.add_parser("verify", help="basis, Dyson-condition and "
                                      "correspondence checks")
    common(p)
    p.add_argument("--check", action="append", default=[],
                   help=f"one of {','.join(_VERIFY_CHECKS)} or 'all' (repeatable)")
    p.add_argument("--N", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--mutate", action="store_true", default=None,
                   help="self-test: flip one pulse and expect failure")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("spectrum", help="filter-function and channel sweep")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--nE", type=int, help="number of bath lines")
    p.add_argument("--beta", type=float)
    p.add_argument("--L", type=int, help="pulse count (even)")
    p.add_argument("--coupling-scale", dest="coupling_scale", type=float)
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--cross-validate", dest="cross_validate",
                   action="store_true", default=None)
    p.set_defaults(func=cmd_spectrum)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:  # pragma: no cover
        return 0


def entry_point() -> None:  # pragma: no cover
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
