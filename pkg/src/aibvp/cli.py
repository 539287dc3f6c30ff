"""``aibvp`` command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 configuration or flag error,
3 numerical or I/O failure.  Logs go to stderr; data files hold data only.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    DEFAULT_SEED,
    SEED_ENV,
    build_scenario,
    load_config,
    shipped_scenarios,
)
from .errors import AIBVPError, ConfigError
from .models import DTParams, GridSpec, build_diffusion_transport, build_heat_1d, state_norms
from .oracles import (
    CONVERGENCE_SCENARIOS,
    DEFAULT_SWEEP,
    VerificationReport,
    convergence_study,
    run_identity_suite,
    run_oracle_suite,
    run_sweep_suite,
    stability_sweep,
)
from .semigroup import integrated_problem_residual, solve_homogeneous, solve_inhomogeneous

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("aibvp")


class UsageError(Exception):
    """Bad flag value detected after argparse."""


# ---------------------------------------------------------------------------
# output helpers


def fmt(x) -> str:
    """17 significant digits; round-trip exact for doubles."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return format(float(x), ".17g")


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def prepare_out(out) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise OSError(f"output directory {path} is not writable")
    return path


def parse_values(text: str, flag: str) -> list[float]:
    """Comma list ``a,b,c`` or inclusive range ``lo:hi:step``."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            lo, hi, step = parts
            if step <= 0 or hi < lo:
                raise UsageError(f"{flag}: empty range {text!r}")
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            values = [lo + i * step for i in range(count)]
        else:
            values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{flag}: cannot parse {text!r}") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise UsageError(f"{flag}: empty or non-finite value list")
    return values


def effective_seed(flag_seed) -> int:
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    return DEFAULT_SEED if flag_seed is None else flag_seed


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    scenario = build_scenario(cfg)
    buffer = io.StringIO()
    handler = logging.StreamHandler(buffer)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.addHandler(handler)
    try:
        log.info("scenario %s: model=%s n_nodes=%d feedback=%s", scenario.name, cfg.model, scenario.grid.n_nodes, scenario.feedback)
        triple = scenario.triple
        if scenario.psi.is_zero:
            traj = solve_homogeneous(triple, scenario.f, scenario.g, scenario.times, feedback=scenario.feedback)
        else:
            traj = solve_inhomogeneous(
                triple, scenario.f, scenario.g, scenario.psi, scenario.times, scenario.n_panels, feedback=scenario.feedback
            )
        residual = integrated_problem_residual(triple, traj, scenario.g, scenario.psi, feedback=scenario.feedback)
        log.info("integrated residual %.3e", residual)
        out = prepare_out(args.out)
        header = ["t"] + [f"u_{i + 1}" for i in range(triple.p)] + [f"v_{j + 1}" for j in range(triple.m)]
        rows = (np.concatenate([[t], s]) for t, s in zip(traj.times, traj.states))
        report = {
            "scenario": scenario.name,
            "model": cfg.model,
            "seed": cfg.seed,
            "n_nodes": scenario.grid.n_nodes,
            "p": triple.p,
            "m": triple.m,
            "feedback": scenario.feedback,
            "t_end": scenario.t_end,
            "n_steps": cfg.n_steps,
            "n_panels": scenario.n_panels if not scenario.psi.is_zero else None,
            "integrated_residual": residual,
            "final_state": state_norms(traj.u[-1], scenario.grid.h),
            "final_trace": traj.v[-1].tolist(),
            "config": cfg.raw,
        }
        atomic_write(out / "trajectory.csv", csv_text(header, rows))
        atomic_write(out / "report.json", json_text(report))
        log.info("wrote %s", out / "trajectory.csv")
        atomic_write(out / "run.log", buffer.getvalue())
    finally:
        log.removeHandler(handler)
    return EXIT_OK


def _identity_triples(args):
    models = ["heat", "diffusion_transport"] if args.model == "all" else [args.model]
    grid = GridSpec(args.n)
    for model in models:
        if model == "heat":
            yield build_heat_1d(grid)
        else:
            yield build_diffusion_transport(grid, DTParams(args.k, args.c, args.d))


def cmd_verify(args) -> int:
    if args.tol_scale <= 0 or not math.isfinite(args.tol_scale):
        raise UsageError("--tol-scale must be positive")
    if args.tol is not None and (args.tol < 0 or not math.isfinite(args.tol)):
        raise UsageError("--tol must be a nonnegative number")
    seed = effective_seed(args.seed)
    reports: list[VerificationReport] = []
    suites = ["identities", "oracle", "sweep"] if args.suite == "all" else [args.suite]
    for suite in suites:
        if suite == "identities":
            for triple in _identity_triples(args):
                rep = run_identity_suite(triple, seed=seed, tol_scale=args.tol_scale, tol_override=args.tol)
                rep.suite = f"identities:{triple.name}"
                reports.append(rep)
        elif suite == "oracle":
            reports.append(run_oracle_suite(shipped_scenarios(), args.tol_scale, args.tol))
        else:
            sweep = stability_sweep(
                GridSpec(DEFAULT_SWEEP["n_nodes"]),
                DEFAULT_SWEEP["k_values"],
                DEFAULT_SWEEP["c_values"],
                DEFAULT_SWEEP["d_values"],
                DEFAULT_SWEEP["exclusion_band"],
            )
            reports.append(run_sweep_suite(sweep, args.tol))
    for rep in reports:
        for c in rep.checks:
            level = logging.INFO if c.passed else logging.WARNING
            log.log(level, "%s %s residual=%.3e tol=%.1e %s", rep.suite, c.check_id, c.residual, c.tolerance, "pass" if c.passed else "FAIL")
    passed = all(r.passed for r in reports)
    doc = {
        "suite": args.suite,
        "seed": seed,
        "pass": passed,
        "reports": [r.to_dict(timings=args.timings) for r in reports],
    }
    text = json_text(doc)
    if args.out:
        atomic_write(prepare_out(args.out) / "report.json", text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_convergence(args) -> int:
    if args.levels < 3:
        raise UsageError("--levels must be at least 3")
    if args.base_nodes < 5 or (args.base_nodes - 1) % 2:
        raise UsageError("--base-nodes must be odd and >= 5")
    scenario = args.scenario
    if scenario is None:
        scenario = "heat_series" if args.model == "heat" else "dirichlet_map"
    try:
        table = convergence_study(
            args.model, DTParams(args.k, args.c, args.d), args.levels, scenario, base_nodes=args.base_nodes
        )
    except ValueError as exc:
        if isinstance(exc, AIBVPError) and not isinstance(exc, ConfigError):
            raise
        raise UsageError(str(exc)) from None
    out = prepare_out(args.out)
    rows = [(r.h, r.error, r.observed_order) for r in table.rows]
    atomic_write(out / "convergence.csv", csv_text(["h", "error", "observed_order"], rows))
    for r in table.rows:
        log.info("h=%.5f error=%.3e order=%s", r.h, r.error, "" if r.observed_order is None else f"{r.observed_order:.4f}")
    return EXIT_OK if table.within(1.8, 2.2) else EXIT_VERIFY


def cmd_sweep(args) -> int:
    ks = parse_values(args.k, "--k")
    cs = parse_values(args.c, "--c")
    ds = parse_values(args.d, "--d")
    if any(k < 0 for k in ks):
        raise UsageError("--k values must be >= 0")
    if args.band <= 0:
        raise UsageError("--band must be positive")
    grid = GridSpec(args.n)
    result = stability_sweep(grid, ks, cs, ds, args.band, args.stencil)
    out = prepare_out(args.out)
    header = ["k", "c", "d", "sbound_generator", "sbound_B0", "positivity", "agreement"]
    rows = []
    for cell in result.cells:
        agreement = "excluded" if cell.excluded else fmt(cell.agreement)
        rows.append((cell.k, cell.c, cell.d, cell.sbound_generator, cell.sbound_B0, fmt(cell.positivity), agreement))
    atomic_write(out / "sweep.csv", csv_text(header, rows))
    counted = result.counted()
    log.info("sweep: %d cells, %d counted, agreement %s", len(result.cells), len(counted), result.all_agree)
    for cd in result.k_varying():
        log.warning("spectral-bound sign varies with k at (c, d) = %s", cd)
    return EXIT_OK if result.all_agree else EXIT_VERIFY


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aibvp", description="Abstract boundary value problems on finite-difference triples.")
    parser.add_argument("--version", action="version", version=f"aibvp {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a scenario and write trajectory.csv, report.json, run.log")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    def model_flags(q, allow_all: bool):
        choices = ["heat", "diffusion_transport"] + (["all"] if allow_all else [])
        q.add_argument("--model", choices=choices, default="heat")
        q.add_argument("--k", type=float, default=1.0, help="transport coefficient (diffusion_transport)")
        q.add_argument("--c", type=float, default=-2.0, help="left feedback coefficient")
        q.add_argument("--d", type=float, default=-2.0, help="right feedback coefficient")

    p = sub.add_parser("verify", help="run verification suites and write report.json")
    p.add_argument("--suite", required=True, choices=["identities", "oracle", "sweep", "all"])
    model_flags(p, allow_all=True)
    p.add_argument("--n", type=int, default=33, help="grid nodes for the identity suite")
    p.add_argument("--tol-scale", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=None, help="replace every tolerance")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--timings", action="store_true", help="include wall times (non-deterministic)")
    p.add_argument("--out", default=None, help="directory for report.json (default: stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("convergence", help="grid refinement study, writes convergence.csv")
    model_flags(p, allow_all=False)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--scenario", choices=list(CONVERGENCE_SCENARIOS), default=None)
    p.add_argument("--base-nodes", type=int, default=9)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("sweep", help="feedback stability sweep, writes sweep.csv")
    p.add_argument("--k", default="0,1,4")
    p.add_argument("--c", default="-6,-4,-2,-0.5,0.5,2")
    p.add_argument("--d", default="-6,-4,-2,-0.5,0.5,2")
    p.add_argument("--n", type=int, default=129)
    p.add_argument("--band", type=float, default=0.05)
    p.add_argument("--stencil", choices=["two_point", "three_point"], default="two_point")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="aibvp: %(levelname)s %(message)s",
        force=True,
    )
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"aibvp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        if isinstance(exc, AIBVPError):
            print(f"aibvp: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"aibvp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AIBVPError, np.linalg.LinAlgError, OverflowError, FloatingPointError) as exc:
        print(f"aibvp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"aibvp: I/O failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
