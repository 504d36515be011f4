"""
Martinet Engine - Command Line

    python cli.py invariants ex/omega0.frm --json
    python cli.py equiv ex/omega0.frm ex/omega1.frm --category R
    python cli.py moser-verify ex/darboux0.frm ex/darboux1.frm --grid 5 --steps 200

Exit codes: 0 for a definite result, 2 for inconclusive / open / failed
verification, 1 for errors (reported as 'error: CODE: message' on stderr).
"""

import argparse
import logging
import sys
import time
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from config import (
    CONTACT_DEGREE_BOUND,
    DEFAULT_JET_ORDER,
    DEFAULT_SEED,
    EXAMPLES_DIR,
    HARNESS_JET_ORDER,
    HARNESS_TRIALS,
    MOSER_BOX,
    MOSER_GRID,
    MOSER_STEPS,
    MOSER_TOL,
    seed_from_env,
)
from dsl import FormFile, load_frm, parse_frm
from errors import ChartMismatchError, DegreeError, HarnessFailure, MartinetError, PreconditionError
from harness import invariance_suite
from invariants import Regime, classify_sigma220, full_report, martinet
from moser import Bridge, build_problem, grid_samples, integrate_and_verify, summarize
from normal_form import (
    Category,
    Outcome,
    RealizationStatus,
    decide_equivalence,
    decompose,
    from_volume,
    realizability,
)
from report import build_report, dumps, render_text, validate_report
from response import ErrorCodes

# --- Logging ---
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNDECIDED = 2


class CommandResult:
    """Report pieces of one command plus its exit code."""

    def __init__(self, exit_code: int = EXIT_OK, error: Optional[str] = None, **pieces: Any):
        self.exit_code = exit_code
        self.error = error
        self.pieces = pieces


# --- Input ---


def read_form(path: str, jet_order: int) -> FormFile:
    if path == "-":
        return parse_frm(sys.stdin.read(), jet_order)
    return load_frm(path, jet_order)


def read_pair(path0: str, path1: str, jet_order: int):
    if path0 == "-" and path1 == "-":
        raise PreconditionError("only one form can be read from stdin")
    file0, file1 = read_form(path0, jet_order), read_form(path1, jet_order)
    if file0.chart != file1.chart:
        raise ChartMismatchError(f"chart {file0.chart.vars} != {file1.chart.vars}")
    return file0, file1


def input_echo(files: Sequence[FormFile], jet_order: int, seed: Optional[int] = None) -> Dict[str, Any]:
    chart = files[0].chart
    echo: Dict[str, Any] = {
        "chart": list(chart.vars),
        "weights": list(chart.weights) if chart.weights else None,
        "jet_order": jet_order,
        "forms": [f.expression for f in files],
    }
    if seed is not None:
        echo["seed"] = seed
    return echo


def require_two_form(form_file: FormFile, what: str):
    if form_file.form.degree != 2:
        raise DegreeError(f"{what} must be a 2-form, got degree {form_file.form.degree}")
    return form_file.form


# --- Commands ---


def cmd_invariants(args) -> CommandResult:
    form_file = read_form(args.file, args.jet)
    omega = require_two_form(form_file, "ω")
    report = full_report(omega, seed=args.seed)
    return CommandResult(input=input_echo([form_file], args.jet, args.seed), report=report)


def cmd_equiv(args) -> CommandResult:
    file0, file1 = read_pair(args.file0, args.file1, args.jet)
    verdict = decide_equivalence(
        require_two_form(file0, "ω₀"), require_two_form(file1, "ω₁"), Category(args.category), args.seed
    )
    code = EXIT_UNDECIDED if verdict.outcome is Outcome.INCONCLUSIVE else EXIT_OK
    echo = input_echo([file0, file1], args.jet, args.seed)
    echo["category"] = args.category
    return CommandResult(code, input=echo, verdict=verdict)


def cmd_decompose(args) -> CommandResult:
    form_file = read_form(args.file, args.jet)
    d = decompose(require_two_form(form_file, "ω"))
    result = {
        "normal_var": d.normal_var,
        "chart_moved": d.chart_map is not None,
        "alpha": d.alpha,
        "sigma": d.sigma,
        "theta": d.theta,
        "residual_order": d.residual_order,
    }
    return CommandResult(input=input_echo([form_file], args.jet), result=result)


def cmd_realize(args) -> CommandResult:
    form_file = read_form(args.file, args.jet)
    realization = realizability(require_two_form(form_file, "σ"), args.degree)
    result: Dict[str, Any] = {"status": realization.status, "rank_sigma_0": realization.rank}
    if realization.status is RealizationStatus.REALIZABLE:
        result.update(alpha=realization.alpha, omega=realization.omega, degree=realization.degree)
    code = EXIT_UNDECIDED if realization.status is RealizationStatus.OPEN else EXIT_OK
    return CommandResult(code, input=input_echo([form_file], args.jet), result=result)


def cmd_from_volume(args) -> CommandResult:
    form_file = read_form(args.file, args.jet)
    if form_file.form.degree != 0:
        raise DegreeError(f"from-volume expects a function, got degree {form_file.form.degree}")
    omega = from_volume(form_file.form.coeff(()))
    result = {"omega": omega, "half_dim": form_file.chart.dim // 2}
    return CommandResult(input=input_echo([form_file], args.jet), result=result)


def choose_bridge(omega0, omega1, box: float) -> Bridge:
    """sing for singular Σ₂, otherwise the relative Darboux path when it applies, else 4-dim(b)."""
    data = martinet(omega0)
    if data.regime is Regime.SINGULAR:
        return Bridge.SING
    try:
        build_problem(omega0, omega1, Bridge.REL_DARBOUX, box)
        return Bridge.REL_DARBOUX
    except MartinetError as exc:
        logger.info(f"moser: rel_darboux unavailable ({exc}), using fourdim_b")
        return Bridge.FOURDIM_B


def cmd_moser_verify(args) -> CommandResult:
    file0, file1 = read_pair(args.file0, args.file1, args.jet)
    omega0, omega1 = require_two_form(file0, "ω₀"), require_two_form(file1, "ω₁")
    bridge = choose_bridge(omega0, omega1, args.box) if args.bridge == "auto" else Bridge(args.bridge)
    problem = build_problem(omega0, omega1, bridge, args.box)
    samples = grid_samples(problem.dim, args.box, args.grid)
    if args.random:
        rng = np.random.default_rng(args.seed)
        samples = np.vstack([samples, rng.uniform(-args.box, args.box, size=(args.random, problem.dim))])
    flow = integrate_and_verify(problem, samples, args.steps, args.tol)
    summary = summarize(flow, args.steps, args.tol)
    result: Dict[str, Any] = {
        "bridge": bridge,
        "box": args.box,
        "grid": args.grid,
        "random_samples": args.random,
        "scaling": problem.scaling,
        "summary": summary,
        "ok": summary.ok,
    }
    code = EXIT_OK if summary.ok else EXIT_UNDECIDED
    return CommandResult(code, input=input_echo([file0, file1], args.jet, args.seed), result=result)


def cmd_classify(args) -> CommandResult:
    form_file = read_form(args.file, args.jet)
    data = martinet(require_two_form(form_file, "ω"))
    if not data.structurally_smooth:
        raise PreconditionError(
            f"classification needs a structurally smooth Σ₂, regime is {data.regime.value}"
        )
    classification = classify_sigma220(data.sigma)
    result = {
        "label": classification.label,
        "discriminant": classification.discriminant,
        "template": classification.template,
        "sigma": data.sigma,
    }
    return CommandResult(input=input_echo([form_file], args.jet), result=result)


def cmd_harness(args) -> CommandResult:
    path = args.file or str(EXAMPLES_DIR / "omega0.frm")
    form_file = read_form(path, max(args.jet, HARNESS_JET_ORDER))
    suite = invariance_suite(require_two_form(form_file, "ω"), args.trials, args.seed, HARNESS_JET_ORDER)
    error = None
    try:
        suite.raise_for_failures()
    except HarnessFailure as exc:
        error = f"{exc.code}: {exc}"
    code = EXIT_OK if suite.ok else EXIT_ERROR
    echo = input_echo([form_file], HARNESS_JET_ORDER, args.seed)
    return CommandResult(code, error, input=echo, result=suite.summary())


COMMANDS = {
    "invariants": cmd_invariants,
    "equiv": cmd_equiv,
    "decompose": cmd_decompose,
    "realize": cmd_realize,
    "from-volume": cmd_from_volume,
    "moser-verify": cmd_moser_verify,
    "classify": cmd_classify,
    "harness": cmd_harness,
}


# --- Parser ---


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jet", type=int, default=DEFAULT_JET_ORDER, help="Working jet order")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Seed (MARTINET_SEED overrides it)")
    common.add_argument("--json", action="store_true", help="Write the JSON report")
    common.add_argument("--timings", action="store_true", help="Include wall-clock timings")
    common.add_argument("--verbose", action="store_true", help="Log engine progress to stderr")

    parser = argparse.ArgumentParser(prog="martinet", description="Singular symplectic form germs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invariants", parents=[common], help="Invariant report of a closed 2-form")
    p.add_argument("file", help=".frm file, or - for stdin")

    p = sub.add_parser("equiv", parents=[common], help="Decide equivalence of two forms")
    p.add_argument("file0")
    p.add_argument("file1")
    p.add_argument("--category", choices=["C", "R"], default="R")

    p = sub.add_parser("decompose", parents=[common], help="ω = d(p·π*α) + π*σ + d(p²θ)")
    p.add_argument("file")

    p = sub.add_parser("realize", parents=[common], help="Realize σ as the restriction of a form")
    p.add_argument("file")
    p.add_argument("--degree", type=int, default=CONTACT_DEGREE_BOUND, help="Annihilator degree bound")

    p = sub.add_parser("from-volume", parents=[common], help="Closed form with ω^n = f·Ω")
    p.add_argument("file", help=".frm file holding the function f")

    p = sub.add_parser("moser-verify", parents=[common], help="Numerically verify a Moser path")
    p.add_argument("file0")
    p.add_argument("file1")
    p.add_argument("--bridge", choices=["auto"] + [b.value for b in Bridge], default="auto")
    p.add_argument("--grid", type=int, default=MOSER_GRID, help="Points per axis")
    p.add_argument("--steps", type=int, default=MOSER_STEPS, help="RK4 steps")
    p.add_argument("--tol", type=float, default=MOSER_TOL, help="Pullback residual tolerance")
    p.add_argument("--box", type=float, default=MOSER_BOX, help="Half-width of the sample box")
    p.add_argument("--random", type=int, default=0, help="Extra uniformly random samples")

    p = sub.add_parser("classify", parents=[common], help="Σ₂₂₀ / Σ₂₂₁ type at 0")
    p.add_argument("file")

    p = sub.add_parser("harness", parents=[common], help="Randomized invariance suite")
    p.add_argument("file", nargs="?", help="Form to test (default ex/omega0.frm)")
    p.add_argument("--trials", type=int, default=HARNESS_TRIALS)
    return parser


# --- Entry point ---


def emit(command: str, outcome: CommandResult, as_json: bool, timings: Optional[Dict[str, float]]) -> None:
    document = build_report(command, timings=timings, **outcome.pieces)
    if as_json:
        validate_report(document)
        sys.stdout.write(dumps(document) + "\n")
    else:
        sys.stdout.write(render_text(document))


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", force=True
    )
    args.seed = seed_from_env(args.seed)
    started = time.perf_counter()
    try:
        outcome = COMMANDS[args.command](args)
        timings = {"total_seconds": time.perf_counter() - started} if args.timings else None
        emit(args.command, outcome, args.json, timings)
        if outcome.error:
            sys.stderr.write(f"error: {outcome.error}\n")
        return outcome.exit_code
    except MartinetError as exc:
        sys.stderr.write(f"error: {exc.code}: {exc}\n")
        return EXIT_ERROR
    except OSError as exc:
        sys.stderr.write(f"error: {ErrorCodes.PARSE_ERROR}: {exc}\n")
        return EXIT_ERROR
    except Exception as exc:
        logger.exception("cli: unexpected failure", extra={"command": args.command})
        sys.stderr.write(f"error: {ErrorCodes.INTERNAL_ERROR}: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
