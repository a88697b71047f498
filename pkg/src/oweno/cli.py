"""Command-line front end.

Exit codes: 0 on success, 1 on runtime failure (blow-up, Newton failure,
insufficient precision), 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from oweno.claw import (
    BlowUp,
    Discretization,
    NoConvergence,
    NonPhysicalState,
    PostShock,
    StepControl,
    get_problem,
    rates,
    solve,
    write_solution,
)
from oweno.config import ConfigError, RunConfig, apply_overrides, load_config
from oweno.core import DiagnosticWriter, Variant
from oweno.orderlab import (
    PrecisionInsufficient,
    reports_to_csv,
    reports_to_markdown,
    run_discontinuous_order_study,
    run_smooth_order_study,
)
from oweno.tables import DataMode, UnsupportedOrder, build_tables, dump_tables

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

#: order and PDE convergence studies use this epsilon for every variant
STUDY_EPS = 1e-100


class UsageError(ValueError):
    pass


# {{{ argument parsing


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _variants(text: str) -> tuple[Variant, ...]:
    return tuple(Variant.parse(tok) for tok in text.replace(",", " ").split())


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="INI file with a [run] section")
    p.add_argument("--r", type=int)
    p.add_argument("--variants", type=_variants, help="comma-separated: js,z,yc,oweno")
    p.add_argument("--s1", type=int)
    p.add_argument("--s2", type=Fraction)
    p.add_argument("--eps", type=float)
    p.add_argument("--abs-mode", dest="abs_mode", action="store_const", const=True)
    p.add_argument("--output-dir", "-o", dest="output_dir", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oweno", description="WENO reconstruction experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", help="dump exact coefficient tables")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--mode", type=DataMode.parse, default=DataMode.POINT)
    p.add_argument("--output-dir", "-o", dest="output_dir", type=Path, default=Path("."))
    p.add_argument("--stdout", action="store_true", help="print instead of writing a file")

    for name, label in (("order-study", "k"), ("disc-study", "theta")):
        p = sub.add_parser(name, help=f"single-point order study over {label}")
        _add_common(p)
        p.add_argument("--mode", type=DataMode.parse)
        p.add_argument("--backend", help="f64, dd or mpNN")
        p.add_argument("--levels", type=int)
        p.add_argument(f"--{label}", dest=label, type=_ints)
        p.add_argument("--trace", type=Path, help="append per-call diagnostics to this CSV")

    for name in ("solve", "convergence"):
        p = sub.add_parser(name, help="run the conservation-law solver" if name == "solve"
                           else "grid-refinement study with rate tables")
        _add_common(p)
        p.add_argument("--problem")
        p.add_argument("--N", dest="N", type=_ints)
        p.add_argument("--cfl", type=float)
        p.add_argument("--T", dest="T", type=float)

    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    keys = ("r", "mode", "variants", "s1", "s2", "eps", "abs_mode", "backend", "output_dir",
            "levels", "k", "theta", "problem", "N", "cfl", "T", "trace")
    overrides = {k: getattr(args, k) for k in keys if hasattr(args, k)}
    return apply_overrides(base, overrides)


# }}}


# {{{ commands


def cmd_tables(args: argparse.Namespace, out: io.TextIOBase) -> int:
    text = dump_tables(build_tables(args.r, args.mode))
    if args.stdout:
        out.write(text)
        return EXIT_OK
    args.output_dir.mkdir(parents=True, exist_ok=True)
    path = args.output_dir / f"tables_r{args.r}_{args.mode.value}.txt"
    path.write_text(text)
    out.write(f"{path}\n")
    return EXIT_OK


def _order_study(config: RunConfig, out: io.TextIOBase, discontinuous: bool) -> int:
    field = config.field()
    r = config.r
    if discontinuous:
        values = config.theta if config.theta is not None else tuple(range(-r + 2, r))
        runner, stem = run_discontinuous_order_study, "disc_study"
    else:
        values = config.k if config.k is not None else tuple(range(2 * r - 2))
        runner, stem = run_smooth_order_study, "order_study"

    trace_stream = None
    observer = None
    if config.trace is not None:
        trace_stream = open(config.trace, "a", newline="")
        observer = DiagnosticWriter(trace_stream, r).write

    reports = []
    status = EXIT_OK
    try:
        for variant in config.variants:
            params = config.params(variant, default_eps=STUDY_EPS)
            for value in values:
                try:
                    reports.append(runner(r, config.mode, variant, value, config.levels,
                                          field, params, observer=observer))
                except PrecisionInsufficient as exc:
                    print(f"error: {exc}", file=sys.stderr)
                    status = EXIT_RUNTIME
    finally:
        if trace_stream is not None:
            trace_stream.close()

    config.output_dir.mkdir(parents=True, exist_ok=True)
    (config.output_dir / f"{stem}.csv").write_text(reports_to_csv(reports, field))
    markdown = reports_to_markdown(reports)
    (config.output_dir / f"{stem}.md").write_text(markdown)
    out.write(markdown)
    return status


def cmd_order_study(args: argparse.Namespace, out: io.TextIOBase) -> int:
    return _order_study(resolve_config(args), out, discontinuous=False)


def cmd_disc_study(args: argparse.Namespace, out: io.TextIOBase) -> int:
    return _order_study(resolve_config(args), out, discontinuous=True)


def _problem(config: RunConfig):
    kwargs = {}
    if config.cfl is not None:
        kwargs["cfl"] = config.cfl
    if config.T is not None:
        kwargs["T"] = config.T
    return get_problem(config.problem, **kwargs)


def _solve_labelled(problem, N: int, disc: Discretization, variant: Variant,
                    control: StepControl = StepControl()):
    try:
        return solve(problem, problem.grid(N), disc, control)
    except BlowUp as exc:
        raise BlowUp(exc.t, exc.cell, f"{variant.value}, N={N}: {exc}") from exc


def cmd_solve(args: argparse.Namespace, out: io.TextIOBase) -> int:
    config = resolve_config(args)
    problem = _problem(config)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    timing_path = config.output_dir / "timing.csv"
    new_timing = not timing_path.exists()

    with open(timing_path, "a", newline="") as timing:
        tw = csv.writer(timing, lineterminator="\n")
        if new_timing:
            tw.writerow(["problem", "variant", "N", "steps", "wall_time_s", "l1", "linf"])
        for variant in config.variants:
            disc = Discretization.make(config.r, config.params(variant))
            for N in config.N:
                res = _solve_labelled(problem, N, disc, variant)
                path = config.output_dir / f"solve_{problem.name}_{variant.value}_N{N}.dat"
                write_solution(path, res)
                l1 = "" if res.l1 is None else f"{res.l1:.16e}"
                linf = "" if res.linf is None else f"{res.linf:.16e}"
                tw.writerow([problem.name, variant.value, N, res.state.steps, f"{res.wall_time:.6f}", l1, linf])
                out.write(f"{path}  steps={res.state.steps}  wall={res.wall_time:.3f}s"
                          + (f"  L1={l1}  Linf={linf}" if l1 else "") + "\n")
    return EXIT_OK


def convergence_table(problem_name: str, results) -> str:
    """Rate CSV: ``problem,variant,N,l1,l1_rate,linf,linf_rate``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["problem", "variant", "N", "l1", "l1_rate", "linf", "linf_rate"])
    for variant, runs in results:
        r1 = rates([r.l1 for r in runs])
        ri = rates([r.linf for r in runs])
        for run, a, b in zip(runs, r1, ri):
            w.writerow([problem_name, variant.value, run.N, f"{run.l1:.16e}",
                        "" if a is None else f"{a:.16e}", f"{run.linf:.16e}",
                        "" if b is None else f"{b:.16e}"])
    return buf.getvalue()


def cmd_convergence(args: argparse.Namespace, out: io.TextIOBase) -> int:
    config = resolve_config(args)
    problem = _problem(config)
    if problem.exact is None:
        raise UsageError(f"problem {problem.name!r} has no exact solution")
    Ns = sorted(config.N)
    control = StepControl(h_ref=problem.grid(Ns[0]).h)
    results = []
    for variant in config.variants:
        disc = Discretization.make(config.r, config.params(variant, default_eps=STUDY_EPS))
        results.append((variant, [_solve_labelled(problem, N, disc, variant, control) for N in Ns]))

    text = convergence_table(problem.name, results)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    (config.output_dir / f"convergence_{problem.name}.csv").write_text(text)

    out.write(f"{'variant':8s} {'N':>6s} {'L1':>12s} {'rate':>6s} {'Linf':>12s} {'rate':>6s}\n")
    for variant, runs in results:
        r1 = rates([r.l1 for r in runs])
        ri = rates([r.linf for r in runs])
        for run, a, b in zip(runs, r1, ri):
            fa = "---" if a is None else f"{a:.2f}"
            fb = "---" if b is None else f"{b:.2f}"
            out.write(f"{variant.name:8s} {run.N:6d} {run.l1:12.3e} {fa:>6s} {run.linf:12.3e} {fb:>6s}\n")
    return EXIT_OK


COMMANDS = {
    "tables": cmd_tables,
    "order-study": cmd_order_study,
    "disc-study": cmd_disc_study,
    "solve": cmd_solve,
    "convergence": cmd_convergence,
}


# }}}


def main(argv: Sequence[str] | None = None, out: io.TextIOBase | None = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        return COMMANDS[args.command](args, out)
    except (UnsupportedOrder, ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BlowUp, NoConvergence, PostShock, NonPhysicalState, PrecisionInsufficient) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        # bad problem names, invalid weight parameters and the like
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
