"""``wfsim`` command line.

Subcommands: run, sweep, w-state, fusion-demo, export, classical-bound.
Every subcommand takes ``--format json|csv|text`` and ``--schema`` (print the
JSON schema of its output and exit).  Sampling commands without ``--seed``
fall back to ``$WFSIM_SEED`` and then to a fresh random seed, which is echoed
on stderr and recorded in the output.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import re
import secrets
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import __version__
from .analysis import (
    CLASSICAL_BOUND,
    InequalityReport,
    analytic_correlators,
    analytic_report,
    correlator_from_counts,
    deterministic_strategy_values,
    sampled_report,
    simulated_report,
    theta_sweep,
)
from .circuits import SETTINGS, W_METHODS, MeasurementSetting, export_qasm, scenario_circuit
from .errors import WfsimError
from .sampling import (
    MODES,
    OUTCOMES,
    RunConfig,
    check_seed,
    outcome_label,
    run_exact,
    run_fusion_demo,
    run_sampled,
    run_w_state,
)
from .schema import SCHEMAS

SEED_ENV = "WFSIM_SEED"
_MODE_ALIASES = {"exact": "exact_postselect", "physical": "physical_rejection"}
_ANGLE = re.compile(r"^([+-]?)(\d+(?:/\d+)?)?\s*\*?\s*pi(?:\s*/\s*(\d+))?$")


def parse_angle(text: str) -> float:
    """``pi/4``, ``-3pi/8``, ``2*pi/3``, ``1/2pi`` or a plain decimal, in radians.

    Symbolic forms are reduced to an exact fraction of pi before the single
    multiplication by ``math.pi``.
    """
    t = text.strip().lower().replace("π", "pi")
    m = _ANGLE.match(t)
    if m:
        sign, coef, den = m.groups()
        frac = Fraction(coef) if coef else Fraction(1)
        if den:
            if int(den) == 0:
                raise argparse.ArgumentTypeError(f"zero denominator in angle {text!r}")
            frac /= int(den)
        if sign == "-":
            frac = -frac
        return float(frac) * math.pi
    try:
        value = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"angle must be finite, got {text!r}")
    return value


def parse_grid(text: str) -> list[float]:
    """``start:stop:count``, inclusive of both ends."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:count, got {text!r}")
    start, stop = parse_angle(parts[0]), parse_angle(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid count must be an integer, got {parts[2]!r}") from None
    if count < 1:
        raise argparse.ArgumentTypeError("grid count must be at least 1")
    if count == 1:
        return [start]
    return [float(x) for x in np.linspace(start, stop, count)]


def _setting(text: str) -> MeasurementSetting:
    try:
        return MeasurementSetting.parse(text)
    except WfsimError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _mode(text: str) -> str:
    mode = _MODE_ALIASES.get(text, text)
    if mode not in MODES:
        raise argparse.ArgumentTypeError(f"mode must be exact or physical, got {text!r}")
    return mode


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _seed(text: str) -> int:
    try:
        return check_seed(int(text))
    except (ValueError, WfsimError):
        raise argparse.ArgumentTypeError(f"seed must be an integer in [0, 2**64), got {text!r}") from None


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env:
        seed = _seed(env)
    else:
        seed = secrets.randbits(63)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


# -- output helpers ----------------------------------------------------------

def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


CSV_SWEEP_HEADER = ["theta", "I", "sigma_I"] + [f"E_{s.key}" for s in SETTINGS]


def _report_row(r: InequalityReport) -> list:
    return [repr(r.theta), repr(r.I), repr(r.sigma_I)] + [repr(e) for e in r.correlators.values()]


def _report_text(r: InequalityReport) -> str:
    lines = [f"theta = {r.theta:.6f}   mode = {r.mode}"
             + (f"   shots = {r.shots}   seed = {r.seed}" if r.shots else "")]
    if r.tables:
        header = f"{'':8}" + "".join(f"{outcome_label(o):>7}" for o in OUTCOMES) + f"{'E':>10}{'sigma':>9}"
        lines.append(header)
        for t in r.tables:
            entry = r.correlators[t.setting]
            lines.append(f"{t.setting.label:8}" + "".join(f"{n:>7}" for n in t.row())
                         + f"{entry.E:>10.4f}{entry.sigma:>9.4f}")
    else:
        lines.append(f"{'':8}{'E':>10}")
        for s in SETTINGS:
            lines.append(f"{s.label:8}{round(r.correlators[s].E, 6) + 0.0:>10.6f}")  # no "-0.000000"
    verdict = "violated" if r.violated else "not violated"
    lines.append(f"I = {r.I:.6f} +/- {r.sigma_I:.6f}   (classical bound {CLASSICAL_BOUND:g}: {verdict})")
    return "\n".join(lines) + "\n"


def _emit(text: str, args) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------

def _make_report(args, theta: float) -> InequalityReport:
    if args.analytic:
        return analytic_report(theta)
    if args.exact_dist:
        return simulated_report(theta, args.w_method, phase_correction=args.phase_correction)
    return sampled_report(theta, args.shots, args.seed, args.mode, args.w_method,
                          phase_correction=args.phase_correction, workers=args.workers)


def _needs_seed(args) -> bool:
    return not (getattr(args, "analytic", False) or getattr(args, "exact_dist", False))


def cmd_run(args) -> int:
    if args.setting is not None:
        return _run_single(args)
    report = _make_report(args, args.theta)
    if args.format == "json":
        _emit(_json({"kind": "run", "report": report.to_dict()}), args)
    elif args.format == "csv":
        _emit(_csv(CSV_SWEEP_HEADER, [_report_row(report)]), args)
    else:
        _emit(_report_text(report), args)
    return 0


def _run_single(args) -> int:
    s = args.setting
    probs = table = None
    if args.analytic:
        e, sigma, n = analytic_correlators(args.theta)[s].E, 0.0, None
    elif args.exact_dist:
        probs = run_exact(args.theta, s, args.w_method, phase_correction=args.phase_correction)
        e, sigma, n = sum(o[0] * o[1] * o[2] * p for o, p in probs.items()), 0.0, None
    else:
        cfg = RunConfig(args.theta, s, args.shots, args.seed, args.mode, args.w_method,
                        args.phase_correction)
        table = run_sampled(cfg, args.workers)
        (e, sigma), n = correlator_from_counts(table), table.valid_shots
    labels = [outcome_label(o) for o in OUTCOMES]
    doc = {
        "kind": "setting",
        "schema": "v1",
        "theta": args.theta,
        "setting": s.label,
        "mode": "analytic" if args.analytic else ("exact" if args.exact_dist else args.mode),
        "shots": args.shots if table else None,
        "seed": args.seed if table else None,
        "E": e,
        "sigma_E": sigma,
        "n": n,
        "probabilities": dict(zip(labels, (probs[o] for o in OUTCOMES))) if probs else None,
        "counts": dict(zip(labels, table.row())) if table else None,
        "valid_shots": table.valid_shots if table else None,
        "attempted_shots": table.attempted_shots if table else None,
    }
    if args.format == "json":
        _emit(_json(doc), args)
    elif args.format == "csv":
        row = [repr(args.theta), s.label, repr(e), repr(sigma), "" if n is None else n]
        if table:
            row += table.row()
        elif probs:
            row += [repr(probs[o]) for o in OUTCOMES]
        header = ["theta", "setting", "E", "sigma_E", "n"] + (labels if (table or probs) else [])
        _emit(_csv(header, [row]), args)
    else:
        text = f"{s.label} at theta = {args.theta:.6f}: E = {round(e, 6) + 0.0:.6f}"
        if table:
            text += f" +/- {sigma:.6f} over {n} valid shots\n  "
            text += "  ".join(f"{lab}:{c}" for lab, c in zip(labels, table.row()))
        _emit(text + "\n", args)
    return 0


def cmd_sweep(args) -> int:
    if args.analytic or args.shots is None:
        reports = theta_sweep(args.grid)
    else:
        template = RunConfig(args.grid[0], SETTINGS[0], args.shots, args.seed, args.mode,
                             args.w_method, args.phase_correction)
        reports = theta_sweep(args.grid, template, workers=args.workers)
    if args.format == "json":
        _emit(_json({"kind": "sweep", "reports": [r.to_dict() for r in reports]}), args)
    elif args.format == "csv":
        _emit(_csv(CSV_SWEEP_HEADER, [_report_row(r) for r in reports]), args)
    else:
        lines = [f"{'theta':>10} {'I':>10} {'sigma_I':>10}"]
        lines += [f"{r.theta:>10.6f} {r.I:>10.6f} {r.sigma_I:>10.6f}" for r in reports]
        _emit("\n".join(lines) + "\n", args)
    return 0


def _histogram_doc(kind: str, h, analytic: bool) -> dict:
    bins = []
    for bits, p in h.exact.items():
        entry = {"bits": bits, "exact": p}
        if not analytic:
            entry["count"] = h.counts[bits]
            entry["frequency"] = h.counts[bits] / h.valid_shots if h.valid_shots else 0.0
        bins.append(entry)
    return {
        "kind": kind,
        "schema": "v1",
        "wires": list(h.wires),
        "method": h.method,
        "shots": None if analytic else h.attempted_shots,
        "seed": None if analytic else h.seed,
        "valid_shots": None if analytic else h.valid_shots,
        "bins": bins,
    }


def _histogram_out(doc: dict, args, extra_text: str = "") -> None:
    analytic = doc["shots"] is None
    if args.format == "json":
        _emit(_json(doc), args)
    elif args.format == "csv":
        header = ["bits", "exact"] + ([] if analytic else ["count", "frequency"])
        rows = [[b["bits"], repr(b["exact"])] + ([] if analytic else [b["count"], repr(b["frequency"])])
                for b in doc["bins"]]
        _emit(_csv(header, rows), args)
    else:
        wires = ",".join(doc["wires"])
        lines = [f"{wires:>12} {'exact':>9}" + ("" if analytic else f" {'count':>7} {'freq':>9}")]
        for b in doc["bins"]:
            line = f"{b['bits']:>12} {b['exact']:>9.6f}"
            if not analytic:
                line += f" {b['count']:>7} {b['frequency']:>9.6f}"
            lines.append(line)
        _emit("\n".join(lines) + "\n" + extra_text, args)


def cmd_w_state(args) -> int:
    h = run_w_state(args.method, args.shots, 0 if args.analytic else args.seed, args.workers)
    _histogram_out(_histogram_doc("w-state", h, args.analytic), args)
    return 0


def cmd_fusion_demo(args) -> int:
    h = run_fusion_demo(args.shots, args.seed, args.w_method, args.workers)
    doc = _histogram_doc("fusion-demo", h, False)
    doc["attempted_shots"] = h.attempted_shots
    doc["success_ratio"] = h.success_ratio
    doc["success_probability"] = h.success_probability
    extra = (f"valid {h.valid_shots} of {h.attempted_shots} attempts "
             f"(ratio {h.success_ratio:.4f}, exact {h.success_probability:.4f})\n")
    # CSV carries the histogram only; the ratio follows from valid/attempted
    _histogram_out(doc, args, extra)
    return 0


def cmd_export(args) -> int:
    circuit = scenario_circuit(args.theta, args.setting, args.w_method, args.phase_correction)
    text = export_qasm(circuit)
    data = text.encode("utf-8")
    if args.path is None:
        if args.format == "json":
            sys.stdout.write(_json({"kind": "export", "schema": "v1", "path": None, "qasm": text}))
        else:
            sys.stdout.write(text)
        return 0
    try:
        with open(args.path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        print(f"wfsim export: cannot write {args.path}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    digest = hashlib.sha256(data).hexdigest()
    if args.format == "json":
        sys.stdout.write(_json({"kind": "export", "schema": "v1", "path": args.path,
                                "bytes": len(data), "sha256": digest}))
    elif args.format == "csv":
        sys.stdout.write(_csv(["path", "bytes", "sha256"], [[args.path, len(data), digest]]))
    else:
        sys.stdout.write(f"wrote {args.path} ({len(data)} bytes, sha256 {digest[:12]})\n")
    return 0


def cmd_classical_bound(args) -> int:
    values = deterministic_strategy_values()
    best = max(values.values())
    if args.format == "json":
        _emit(_json({
            "kind": "classical-bound",
            "schema": "v1",
            "strategies": len(values),
            "max_I": best,
            "distinct_values": sorted(set(values.values())),
        }), args)
    elif args.format == "csv":
        rows = [list(k) + [repr(v)] for k, v in values.items()]
        _emit(_csv(["A0", "A1", "B0", "B1", "C0", "C1", "I"], rows), args)
    else:
        _emit(f"maximum I over {len(values)} deterministic strategies: {best:g}\n", args)
    return 0


# -- parser ------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, *, output: bool = True) -> None:
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--schema", action="store_true", help="print the JSON schema of this command's output")
    if output:
        p.add_argument("-o", "--output", help="write to this file instead of stdout")


def _sampling(p: argparse.ArgumentParser, *, shots: int | None) -> None:
    p.add_argument("--shots", type=_positive, default=shots)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--workers", type=_positive, default=1)


def _scenario(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", type=_mode, default="exact_postselect",
                   help="exact (sample the postselected distribution) or physical (sample and reject)")
    p.add_argument("--w-method", choices=W_METHODS, default="rotation")
    p.add_argument("--no-phase-correction", dest="phase_correction", action="store_false",
                   help="fuse with the bare CNOT + postselection (local Z frame)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wfsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wfsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="all eight settings (or one) at a single angle")
    p.add_argument("--theta", type=parse_angle, default=math.pi / 4)
    p.add_argument("--setting", type=_setting)
    _sampling(p, shots=10_000)
    _scenario(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--analytic", action="store_true", help="closed-form correlators, no sampling")
    src.add_argument("--exact", dest="exact_dist", action="store_true",
                     help="exact circuit distribution, no sampling")
    _common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="inequality value over a grid of angles")
    p.add_argument("grid", type=parse_grid, nargs="?", help="start:stop:count, e.g. 0:pi/2:5")
    _sampling(p, shots=None)
    _scenario(p)
    p.add_argument("--analytic", action="store_true")
    p.set_defaults(exact_dist=False)
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("w-state", help="W-preparation histogram over abc")
    p.add_argument("--method", choices=W_METHODS, default="rotation")
    p.add_argument("--analytic", action="store_true")
    _sampling(p, shots=8192)
    _common(p)
    p.set_defaults(func=cmd_w_state)

    p = sub.add_parser("fusion-demo", help="single-lab fusion with postselection")
    p.add_argument("--w-method", choices=W_METHODS, default="rotation")
    _sampling(p, shots=8192)
    _common(p)
    p.set_defaults(func=cmd_fusion_demo)

    p = sub.add_parser("export", help="write a scenario circuit as OpenQASM 2.0")
    p.add_argument("path", nargs="?", help="destination .qasm file (default: stdout)")
    p.add_argument("--theta", type=parse_angle, default=math.pi / 4)
    p.add_argument("--setting", type=_setting, default=SETTINGS[-1])
    p.add_argument("--w-method", choices=W_METHODS, default="rotation")
    p.add_argument("--no-phase-correction", dest="phase_correction", action="store_false")
    _common(p, output=False)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("classical-bound", help="maximum I over the 64 deterministic strategies")
    _common(p)
    p.set_defaults(func=cmd_classical_bound)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.schema:
        sys.stdout.write(_json(SCHEMAS[args.command]))
        return 0
    if args.command == "sweep" and args.grid is None:
        parser.error("sweep: the grid argument is required")
    if args.command in ("run", "sweep", "w-state", "fusion-demo"):
        sampled = _needs_seed(args) and not (args.command == "sweep" and args.shots is None)
        args.seed = resolve_seed(args.seed) if sampled else args.seed
    try:
        return args.func(args)
    except WfsimError as exc:
        print(f"wfsim {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"wfsim {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
