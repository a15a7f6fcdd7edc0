"""Command-line front end.

Every command writes plain CSV or text to ``--out`` (stdout if omitted).
Exit codes: 0 success, 1 usage error, 2 property violation.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analysis as an
from . import experiments as ex
from .sim import Circuit, NoiseModel, correct_spam, distribution_csv, read_distribution_csv

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2
RESULT_HEADER = "key,yield,pop00,pop01,pop10,pop11"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_noise(text: str) -> NoiseModel:
    """``zero``, ``fitted`` or ``file=PATH`` (key=value lines)."""
    if text == "zero":
        return NoiseModel.zero()
    if text == "fitted":
        return NoiseModel.fitted()
    if text.startswith("file="):
        path = Path(text[5:])
        try:
            return NoiseModel.from_text(path.read_text())
        except OSError as e:
            raise UsageError(f"cannot read noise file: {e}") from None
    raise UsageError(f"--noise must be zero, fitted or file=PATH, got {text!r}")


def _fmt(v: float) -> str:
    return f"{float(v):.12g}"


def result_row(key: str, rep: ex.SelectionReport) -> str:
    pops = ["nan"] * 4 if rep.undefined else [_fmt(p) for p in rep.logical_pops]
    return ",".join([key, _fmt(rep.yield_)] + pops)


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _sibling(out: str, suffix: str) -> Path:
    p = Path(out)
    return p.with_name(p.stem + suffix + ".csv")


def _plan(args, require_stabilizer=False) -> ex.ExperimentPlan:
    stab = args.stabilizer
    if require_stabilizer and stab in (None, "none"):
        stab = "Sz"
    return ex.ExperimentPlan(args.state, stab, args.basis, parse_noise(args.noise), alpha=args.alpha)


def cmd_encode(args, require_stabilizer=False) -> int:
    plan = _plan(args, require_stabilizer)
    observed = plan.observed_distribution()
    rep = ex.postselect(observed, plan.meas_basis, plan.stabilizer is not None)
    corrected = correct_spam(observed, plan.noise.spam)
    crep = ex.postselect(corrected, plan.meas_basis, plan.stabilizer is not None)
    text = RESULT_HEADER + "\n" + result_row(plan.key, rep) + "\n" \
        + result_row(plan.key + "_corrected", crep) + "\n"
    _emit(args, text)
    if args.out:
        _sibling(args.out, "_raw").write_text(distribution_csv(observed))
        _sibling(args.out, "_corrected").write_text(distribution_csv(corrected))
    return EXIT_OK


def cmd_ftcheck(args) -> int:
    if args.circuit:
        circ = Circuit.from_text(Path(args.circuit).read_text())
        follow = None if args.stabilizer in (None, "none") else ex.build_stabilizer(args.stabilizer)
        runs = [(circ.name or Path(args.circuit).stem, circ, follow, b) for b in ("Z", "X")]
    else:
        runs = ex.certification_suite()
    lines, bad = [], []
    for name, circ, follow, basis in runs:
        rep = ex.enumerate_single_faults(circ, follow, basis)
        c = rep.counts
        lines.append(f"{name} [{basis}] locations={len(rep.outcomes)} detected: {c['detected']} "
                     f"benign: {c['benign']} lb_error: {c['lb_error']} la_error: {c['la_error']}")
        for o in rep.of_kind("la_error"):
            bad.append(f"  la_error in {name} [{basis}]: {o.letter} on qubit {o.qubit} at slot {o.slot}")
    verdict = "FAIL" if bad else "PASS"
    _emit(args, "\n".join(lines + bad + [f"fault tolerance of L_a: {verdict}"]) + "\n")
    return EXIT_VIOLATION if bad else EXIT_OK


def _injection_csv(rows) -> str:
    out = ["config,p_a,p_f_a,p_f_b,p_f_any"]
    for key, r in rows.items():
        out.append(",".join([key, _fmt(r.p_a), _fmt(r.p_f_a), _fmt(r.p_f_b), _fmt(r.p_f_any)]))
    return "\n".join(out) + "\n"


def cmd_inject(args) -> int:
    noise = parse_noise(args.noise)
    if args.error:
        configs = args.error
    else:
        configs = [c.pauli for c in an.ConfigScheme.build(args.scheme, args.seed).configs]
    _emit(args, _injection_csv(ex.run_injection_campaign(configs, noise)))
    return EXIT_OK


def cmd_sweep_error(args) -> int:
    grid = an.parse_grid(args.p_grid)
    scheme = an.ConfigScheme.build(args.scheme, args.seed)
    _emit(args, an.curve_csv(an.sweep_error(grid, scheme, parse_noise(args.noise))))
    return EXIT_OK


def cmd_sweep_miscal(args) -> int:
    grid = an.parse_grid(args.alpha_grid)
    points = ex.run_miscal_sweep(grid, parse_noise(args.noise), args.state)
    out = ["alpha,stabilizer,yield,pop00,pop01,pop10,pop11,err_a,err_b"]
    for pt in points:
        for stab in ("Sx", "Sz"):
            out.append(",".join([_fmt(pt.alpha), stab, _fmt(pt.yields[stab])]
                                + [_fmt(v) for v in pt.pops[stab]]
                                + [_fmt(pt.error_a[stab]), _fmt(pt.error_b[stab])]))
    _emit(args, "\n".join(out) + "\n")
    return EXIT_OK


def cmd_fit(args) -> int:
    noise = parse_noise(args.noise)
    plans = {p.key: p for p in ex.table1_plans(noise)}
    if args.observed:
        targets = []
        for item in args.observed:
            key, sep, path = item.partition("=")
            if not sep or key not in plans:
                raise UsageError(f"--observed expects KEY=FILE with KEY in {sorted(plans)}")
            targets.append((plans[key], read_distribution_csv(Path(path).read_text())))
    else:
        # synthetic round trip: observations simulated under --noise
        targets = [(p, p.observed_distribution()) for p in plans.values()]
    res = an.fit_noise_params(targets, base=noise, seed=args.seed)
    _emit(args, res.report_text())
    return EXIT_OK


def cmd_table1(args) -> int:
    noise = parse_noise(args.noise)
    header = RESULT_HEADER
    if args.compare:
        header += ",ref_yield,ref_pop00,ref_pop01,ref_pop10,ref_pop11"
    out = [header]
    for plan, row in zip(ex.table1_plans(noise), ex.TABLE1):
        line = result_row(plan.key, plan.report())
        if args.compare:
            line += "," + ",".join(_fmt(v / 100) for v in (row[3], *row[4]))
        out.append(line)
    _emit(args, "\n".join(out) + "\n")
    return EXIT_OK


COMMANDS = {
    "encode": cmd_encode,
    "stabilize": lambda a: cmd_encode(a, require_stabilizer=True),
    "ftcheck": cmd_ftcheck,
    "inject": cmd_inject,
    "sweep-error": cmd_sweep_error,
    "sweep-miscal": cmd_sweep_miscal,
    "fit": cmd_fit,
    "table1": cmd_table1,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--noise", default="zero", help="zero, fitted or file=PATH")
    common.add_argument("--seed", type=int, default=an.DEFAULT_SEED)
    common.add_argument("--out", help="output file (default: stdout)")

    plan = _Parser(add_help=False)
    plan.add_argument("--state", default="00L")
    plan.add_argument("--stabilizer", default="none", choices=["none", "Sx", "Sz"])
    plan.add_argument("--basis", default="Z", choices=["Z", "X"])
    plan.add_argument("--alpha", type=float, default=None)

    scheme = _Parser(add_help=False)
    scheme.add_argument("--scheme", default="orbit", choices=an.SCHEMES)

    p = _Parser(prog="fourtwotwo", description="[[4,2,2]] error-detection simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("encode", parents=[common, plan], help="prepare a logical state and read it out")
    sub.add_parser("stabilize", parents=[common, plan], help="prepare, measure a stabilizer, read out")
    ft = sub.add_parser("ftcheck", parents=[common], help="certify single-fault tolerance of L_a")
    ft.add_argument("--circuit", help="check a circuit file instead of the built-in suite")
    ft.add_argument("--stabilizer", default="none", choices=["none", "Sx", "Sz"])
    inj = sub.add_parser("inject", parents=[common, scheme], help="injected data-error campaign")
    inj.add_argument("--error", action="append", help="Pauli on the data qubits (repeatable)")
    se = sub.add_parser("sweep-error", parents=[common, scheme], help="logical error curves vs p")
    se.add_argument("--p-grid", default="0:0.3:0.01")
    sm = sub.add_parser("sweep-miscal", parents=[common], help="XX miscalibration sweep")
    sm.add_argument("--alpha-grid", default="0,0.02,0.05,0.1")
    sm.add_argument("--state", default="00L")
    fit = sub.add_parser("fit", parents=[common], help="fit the three gate-error rates")
    fit.add_argument("--observed", action="append", help="KEY=FILE distribution CSV (repeatable)")
    t1 = sub.add_parser("table1", parents=[common], help="all 19 state/stabilizer/basis rows")
    t1.add_argument("--compare", action="store_true", help="append the measured reference values")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if hasattr(args, "state"):
            args.state = ex.normalize_label(args.state)
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, KeyError, OSError) as e:
        print(f"fourtwotwo: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
