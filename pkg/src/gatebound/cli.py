"""Command-line front end.

Commands::

    gatebound verify                       run the identity suite
    gatebound bound --qubits N             closed-form floor 1/(4 n^2)
    gatebound bound --mean-photons X       closed-form floor 1/(16 <N>)
    gatebound bound --chain M S            closed-form floor 1/(4 m^3 s^2)
    gatebound chain --gates M --size S     same floor, as its own command
    gatebound sweep --sizes 2,3,4          optimize per size, emit the table
    gatebound bosonic --mean-photons 1,4   coherent-ancilla sweep
    gatebound optimize --ancilla-qubits K  one optimization run

Exit codes: 0 all checks pass, 1 at least one check failed, 2 usage error.
Given identical arguments and seed, every emission is byte deterministic.
"""

from __future__ import annotations

import argparse
import sys

from .bounds import bosonic_bound, chain_bound, qubit_size_bound
from .channel import SearchConfig
from .optimize import (
    FockAncilla,
    OptimizationProblem,
    QubitAncilla,
    SweepSpec,
    bosonic_sweep,
    optimize_implementation,
    sweep_sizes,
)
from .report import CheckRecord, Report, render_report, render_table
from .verify import run_identity_suite

__all__ = ["main"]

SWEEP_HEADER = ("size", "n_params", "best_infidelity", "bound", "ratio",
                "converged", "seed")
BOSONIC_HEADER = ("mean_photons", "trunc", "n_params", "best_infidelity",
                  "bound", "deltaL3_cap", "converged", "seed")


class UsageError(Exception):
    pass


def _emit(payload: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _common_flags(sub):
    sub.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    sub.add_argument("--out", default=None, metavar="PATH",
                     help="write the output to PATH instead of stdout")
    sub.add_argument("--format", default="text", choices=("json", "csv", "text"),
                     dest="fmt", help="output format (default text)")
    sub.add_argument("--tolerance", type=float, default=None,
                     help="override the default check tolerances")


def _parse_float_list(text: str, what: str):
    try:
        values = [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise UsageError(f"could not parse {what} list {text!r}")
    if not values:
        raise UsageError(f"empty {what} list")
    return values


def _parse_int_list(text: str, what: str):
    values = _parse_float_list(text, what)
    if any(v != int(v) for v in values):
        raise UsageError(f"{what} entries must be integers, got {text!r}")
    return [int(v) for v in values]


def cmd_verify(args) -> int:
    rep = run_identity_suite(seed=args.seed, tolerance=args.tolerance)
    _emit(render_report(rep, args.fmt), args.out)
    return 0 if rep.all_passed else 1


def cmd_bound(args) -> int:
    records = []
    if args.qubits is not None:
        try:
            value = qubit_size_bound(args.qubits)
        except ValueError as exc:
            raise UsageError(str(exc))
        records.append(CheckRecord(f"qubit_size_bound(n={args.qubits})",
                                   None, value, 0.0, True))
    if args.mean_photons is not None:
        try:
            value = bosonic_bound(args.mean_photons)
        except ValueError as exc:
            raise UsageError(str(exc))
        records.append(CheckRecord(f"bosonic_bound(meanN={args.mean_photons:g})",
                                   None, value, 0.0, True))
    if args.chain is not None:
        m, s = args.chain
        if m != int(m):
            raise UsageError(f"gate count must be an integer, got {m!r}")
        try:
            value = chain_bound(int(m), s)
        except ValueError as exc:
            raise UsageError(str(exc))
        records.append(CheckRecord(f"chain_bound(m={int(m)},s={s:g})",
                                   None, value, 0.0, True))
    if not records:
        raise UsageError("bound requires one of --qubits, --mean-photons, --chain")
    rep = Report(command="bound", records=records)
    _emit(render_report(rep, args.fmt), args.out)
    return 0


def cmd_chain(args) -> int:
    try:
        value = chain_bound(args.gates, args.size)
    except ValueError as exc:
        raise UsageError(str(exc))
    rep = Report(command="chain", records=[
        CheckRecord(f"chain_bound(m={args.gates},s={args.size:g})",
                    None, value, 0.0, True)])
    _emit(render_report(rep, args.fmt), args.out)
    return 0


def _row_tuple(row, header):
    return tuple(getattr(row, h) for h in header)


def cmd_sweep(args) -> int:
    sizes = _parse_int_list(args.sizes, "size")
    if any(n < 2 for n in sizes):
        raise UsageError("sweep sizes must be >= 2")
    slack = 1e-9 if args.tolerance is None else args.tolerance
    spec = SweepSpec(sizes=tuple(sizes), restarts=args.restarts, master_seed=args.seed)
    rows = sweep_sizes(spec, SearchConfig(seed=args.seed))
    ok = all(r.best_infidelity >= r.bound - slack for r in rows)
    if args.plot:
        from .plots import sweep_figure
        sweep_figure(rows, args.plot)
    if args.fmt == "json":
        records = [CheckRecord(f"sweep size={r.size}", r.bound, r.best_infidelity,
                               slack, r.best_infidelity >= r.bound - slack)
                   for r in rows]
        payload = render_report(Report("sweep", records), "json")
    else:
        payload = render_table(SWEEP_HEADER,
                               [_row_tuple(r, SWEEP_HEADER) for r in rows], args.fmt)
    _emit(payload, args.out)
    return 0 if ok else 1


def cmd_bosonic(args) -> int:
    mean_list = _parse_float_list(args.mean_photons, "mean photon")
    if any(not v > 0 for v in mean_list):
        raise UsageError("mean photon numbers must be positive")
    slack = 1e-6 if args.tolerance is None else args.tolerance
    rows = bosonic_sweep(mean_list, SearchConfig(seed=args.seed, restarts=args.restarts))
    ok = all(r.best_infidelity >= r.bound - slack for r in rows)
    if args.plot:
        from .plots import bosonic_figure
        bosonic_figure(rows, args.plot)
    if args.fmt == "json":
        records = [CheckRecord(f"bosonic meanN={r.mean_photons:g}", r.bound,
                               r.best_infidelity, slack,
                               r.best_infidelity >= r.bound - slack)
                   for r in rows]
        payload = render_report(Report("bosonic", records), "json")
    else:
        payload = render_table(BOSONIC_HEADER,
                               [_row_tuple(r, BOSONIC_HEADER) for r in rows], args.fmt)
    _emit(payload, args.out)
    return 0 if ok else 1


def cmd_optimize(args) -> int:
    if (args.ancilla_qubits is None) == (args.fock is None):
        raise UsageError("optimize requires exactly one of --ancilla-qubits, --fock")
    if args.ancilla_qubits is not None:
        if args.ancilla_qubits < 0:
            raise UsageError("ancilla qubit count must be >= 0")
        ancilla = QubitAncilla(args.ancilla_qubits)
    else:
        trunc, alpha = args.fock
        if trunc != int(trunc) or int(trunc) < 2:
            raise UsageError("Fock truncation must be an integer >= 2")
        ancilla = FockAncilla(int(trunc), alpha)
    objective = {"basis": "min_basis_fidelity",
                 "worst": "worst_case_fidelity"}[args.objective]
    problem = OptimizationProblem(ancilla, objective=objective,
                                  optimize_ancilla_state=args.optimize_ancilla)
    cfg = SearchConfig(seed=args.seed, restarts=args.restarts)
    result = optimize_implementation(problem, cfg)
    slack = 1e-9 if args.tolerance is None else args.tolerance
    rep = result.bound_report
    records = [
        CheckRecord("best_fidelity", None, result.best_fidelity, 0.0, True),
        CheckRecord("infidelity_vs_lower_bound", rep.lower_bound,
                    result.infidelity, slack,
                    result.infidelity >= rep.lower_bound - slack),
        CheckRecord("floor_infidelity_vs_lower_bound", rep.lower_bound,
                    result.floor_infidelity, slack,
                    result.floor_infidelity >= rep.lower_bound - slack),
        CheckRecord("delta_L3_prime", None, rep.delta_L3_prime, 0.0, True),
        CheckRecord("implementation_size", None, rep.size, 0.0, True),
        CheckRecord("cb_lower_bound", None, rep.measured_cb_lower, 0.0, True),
        CheckRecord("converged", None, 1.0 if result.converged else 0.0, 0.0, True),
    ]
    out = Report(command="optimize", records=records)
    if args.plot:
        from .plots import trace_figure
        trace_figure(result.trace, args.plot)
    _emit(render_report(out, args.fmt), args.out)
    return 0 if out.all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gatebound",
        description="Conservation-law limits on controlled-NOT implementations: "
                    "verification suite, closed-form bounds, optimization sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the identity and inequality suite")
    _common_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bound", help="closed-form lower bounds")
    _common_flags(p)
    p.add_argument("--qubits", type=int, default=None, metavar="N",
                   help="total qubit count for the 1/(4 n^2) floor")
    p.add_argument("--mean-photons", type=float, default=None, metavar="X",
                   help="mean photon number for the 1/(16 <N>) floor")
    p.add_argument("--chain", type=float, nargs=2, default=None,
                   metavar=("M", "S"), help="gate count and size for 1/(4 m^3 s^2)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("chain", help="universal-gate-set chain floor")
    _common_flags(p)
    p.add_argument("--gates", type=int, required=True, metavar="M")
    p.add_argument("--size", type=float, required=True, metavar="S")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("sweep", help="optimize CNOT infidelity per qubit count")
    _common_flags(p)
    p.add_argument("--sizes", required=True, help="comma list of total qubit counts")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--plot", default=None, metavar="PATH",
                   help="also render the sweep curve to PATH")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bosonic", help="coherent-ancilla sweep")
    _common_flags(p)
    p.add_argument("--mean-photons", required=True,
                   help="comma list of mean photon numbers")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--plot", default=None, metavar="PATH")
    p.set_defaults(func=cmd_bosonic)

    p = sub.add_parser("optimize", help="single optimization run")
    _common_flags(p)
    p.add_argument("--ancilla-qubits", type=int, default=None, metavar="K")
    p.add_argument("--fock", type=float, nargs=2, default=None,
                   metavar=("TRUNC", "ALPHA"))
    p.add_argument("--objective", choices=("basis", "worst"), default="basis")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--optimize-ancilla", action="store_true",
                   help="co-optimize the ancilla state")
    p.add_argument("--plot", default=None, metavar="PATH",
                   help="render the optimization trace to PATH")
    p.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
