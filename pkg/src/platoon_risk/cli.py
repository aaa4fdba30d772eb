"""Command-line front end: ``platoon-risk <command> --scenario FILE``.

Exit codes: 0 success, 1 instability or degeneracy, 2 input error,
3 statistical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InsufficientConditioningMassError, PlatoonError, UnstableParametersError
from .graph import spectral
from .risk import conditional_expectation, risk_profile
from .scenario import Scenario, ScenarioError, load_scenario
from .simulate import (
    empirical_conditional_expectation,
    empirical_covariance,
    simulate_platoon,
)
from .stability import mode_table, platoon_stable
from .statistics import DEFAULT_TOL, distance_covariance

EXIT_OK = 0
EXIT_UNSTABLE = 1
EXIT_INPUT = 2
EXIT_STATISTICAL = 3

VALIDATE_MAX_N = 10
Z_LIMIT = 3.0


class _Exit(Exception):
    def __init__(self, code, message=""):
        super().__init__(message)
        self.code = code


def fmt(x) -> str:
    """17 significant digits; round-trips every float64."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def matrix_csv(mat: np.ndarray) -> str:
    labels = range(1, mat.shape[0] + 1)
    lines = ["pair," + ",".join(str(k) for k in labels)]
    for k, row in zip(labels, mat):
        lines.append(f"{k}," + ",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def profile_csv(result) -> str:
    lines = ["j,rho_ji,worst_case_expectation,risk,lower_bound"]
    for e in result.entries:
        lines.append(
            ",".join(fmt(v) for v in (e.j, e.rho_ji, e.worst_case_expectation, e.risk, result.lower_bound))
        )
    return "\n".join(lines) + "\n"


def _emit(text: str, out: Path | None, stdout):
    if out is None:
        stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def _sibling(out: Path, tag: str) -> Path:
    return out.with_name(f"{out.stem}_{tag}{out.suffix or '.csv'}")


def _parse_sweep(text: str):
    if "=" not in text:
        raise ScenarioError("--sweep", "expected FIELD=v1,v2,...")
    field, values = text.split("=", 1)
    try:
        parsed = [json.loads(v) for v in values.split(",") if v.strip()]
    except json.JSONDecodeError as exc:
        raise ScenarioError("--sweep", f"values must be numbers: {exc}") from None
    if not parsed:
        raise ScenarioError("--sweep", "no values given")
    return field.strip(), parsed


def _require_stable(sc: Scenario):
    spec = spectral(sc.graph)
    if not platoon_stable(spec, sc.params.tau, sc.params.beta):
        raise _Exit(EXIT_UNSTABLE, "platoon is unstable for the given tau and beta")
    return spec


def cmd_stability(sc: Scenario, args, stdout) -> int:
    spec = spectral(sc.graph)
    rows = mode_table(spec, sc.params.tau, sc.params.beta)
    stdout.write("k,lambda,s1,s2,a,a_over_tan_a,stable\n")
    for r, lam in zip(rows, spec.eigenvalues[1:]):
        stdout.write(
            ",".join(
                [str(r["k"]), fmt(lam), fmt(r["s1"]), fmt(r["s2"]), fmt(r["a"]), fmt(r["a_over_tan_a"])]
                + ["yes" if r["stable"] else "no"]
            )
            + "\n"
        )
    stable = all(r["stable"] for r in rows)
    stdout.write(f"# verdict: {'stable' if stable else 'UNSTABLE'}\n")
    return EXIT_OK if stable else EXIT_UNSTABLE


def cmd_covariance(sc: Scenario, args, stdout) -> int:
    spec = _require_stable(sc)
    stats = distance_covariance(spec, sc.params, args.tol)
    sigma_text, rho_text = matrix_csv(stats.sigma), matrix_csv(stats.rho)
    if args.out is None:
        stdout.write(sigma_text + "\n" + rho_text)
    else:
        _emit(sigma_text, args.out, stdout)
        _emit(rho_text, _sibling(args.out, "rho"), stdout)
    return EXIT_OK


def _profile(sc: Scenario, tol: float):
    spec = _require_stable(sc)
    stats = distance_covariance(spec, sc.params, tol)
    return risk_profile(stats, sc.i, sc.level, sc.ambiguity)


def cmd_risk_profile(sc: Scenario, args, stdout) -> int:
    sweep = _parse_sweep(args.sweep) if args.sweep else sc.sweep
    if sweep is None:
        result = _profile(sc, args.tol)
        _emit(profile_csv(result), args.out, stdout)
        return EXIT_UNSTABLE if _degenerate(result) else EXIT_OK
    field, values = sweep
    variants = [(v, sc.with_value(field, v)) for v in values]
    # every variant is checked before anything is written
    for _, v in variants:
        _require_stable(v)
    leaf = field.split(".")[-1]
    degenerate = False
    for value, v in variants:
        result = _profile(v, args.tol)
        degenerate |= _degenerate(result)
        text = profile_csv(result)
        if args.out is None:
            stdout.write(f"# {field}={value}\n" + text)
        else:
            _emit(text, _sibling(args.out, f"{leaf}={value}"), stdout)
    return EXIT_UNSTABLE if degenerate else EXIT_OK


def _degenerate(result) -> bool:
    return any(e.degenerate for e in result.entries)


def cmd_simulate(sc: Scenario, args, stdout) -> int:
    _require_stable(sc)
    cfg = sc.sim_config(seed=args.seed, replicates=args.replicates)
    ens = simulate_platoon(sc.graph, sc.params, cfg)
    _emit(ens.to_csv(), args.out, stdout)
    return EXIT_OK


def cmd_validate(sc: Scenario, args, stdout) -> int:
    if sc.n > VALIDATE_MAX_N:
        raise _Exit(EXIT_INPUT, f"validate is limited to n <= {VALIDATE_MAX_N} vehicles, got {sc.n}")
    spec = _require_stable(sc)
    stats = distance_covariance(spec, sc.params, args.tol)
    sigma = stats.sigma * args.perturb_sigma
    cfg = sc.sim_config(seed=args.seed, replicates=args.replicates)
    ens = simulate_platoon(sc.graph, sc.params, cfg)
    cov, se = empirical_covariance(ens)

    buf = io.StringIO()
    buf.write("kind,a,b,analytic,empirical,std_error,z,note\n")
    worst = 0.0
    for a in range(stats.n_pairs):
        for b in range(a, stats.n_pairs):
            z = (cov[a, b] - sigma[a, b]) / se[a, b]
            worst = max(worst, abs(z))
            buf.write(
                f"covariance,{a + 1},{b + 1},{fmt(sigma[a, b])},{fmt(cov[a, b])},{fmt(se[a, b])},{fmt(z)},\n"
            )

    s = np.sqrt(np.diag(sigma))
    rho = sigma / np.outer(s, s)
    d, d_star, i = sc.params.d, sc.d_star, sc.i
    starved = False
    for j in range(1, stats.n_pairs + 1):
        if j == i:
            continue
        analytic = conditional_expectation(d, s[i - 1], s[j - 1], rho[j - 1, i - 1], d_star)
        try:
            est, err, _ = empirical_conditional_expectation(ens, i, j, d_star)
        except InsufficientConditioningMassError as exc:
            starved = True
            buf.write(
                f"conditional_expectation,{i},{j},{fmt(analytic)},nan,nan,nan,"
                f"insufficient conditioning mass (acceptance {exc.acceptance_fraction:.3g})\n"
            )
            continue
        z = (est - analytic) / err
        worst = max(worst, abs(z))
        buf.write(f"conditional_expectation,{i},{j},{fmt(analytic)},{fmt(est)},{fmt(err)},{fmt(z)},\n")

    passed = worst <= Z_LIMIT and not starved
    buf.write(f"# max |z| = {worst:.3f}; {'PASS' if passed else 'FAIL'}\n")
    _emit(buf.getvalue(), args.out, stdout)
    return EXIT_OK if passed else EXIT_STATISTICAL


COMMANDS = {
    "stability": cmd_stability,
    "covariance": cmd_covariance,
    "risk-profile": cmd_risk_profile,
    "validate": cmd_validate,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, type=Path, help="scenario JSON file")
    common.add_argument("--out", type=Path, default=None, help="output CSV (default: stdout)")
    common.add_argument("--sweep", default=None, help="FIELD=v1,v2,... e.g. risk.delta_i=1,2,3")
    common.add_argument("--seed", type=int, default=None, help="override sim.seed")
    common.add_argument("--replicates", type=int, default=None, help="override sim.replicates")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative tolerance of f(s1, s2)")
    common.add_argument("--perturb-sigma", type=float, default=1.0, help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="platoon-risk",
        description="Distributionally robust cascading risk in delayed vehicle platoons.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "stability": "per-mode stability table; exit 1 if unstable",
        "covariance": "steady-state gap covariance and correlation as CSV",
        "risk-profile": "cascading risk of every pair given a soft failure of pair i",
        "validate": "analytic vs Monte Carlo z-scores (n <= 10)",
        "simulate": "Euler-Maruyama ensemble of terminal gap vectors as CSV",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.tol <= 0:
            raise ScenarioError("--tol", "must be positive")
        if args.replicates is not None and args.replicates < 3:
            raise ScenarioError("--replicates", "must be >= 3")
        if args.seed is not None and args.seed < 0:
            raise ScenarioError("--seed", "must be non-negative")
        sc = load_scenario(args.scenario)
        return COMMANDS[args.command](sc, args, stdout)
    except _Exit as exc:
        if exc.args and exc.args[0]:
            stderr.write(f"platoon-risk: {exc.args[0]}\n")
        return exc.code
    except ScenarioError as exc:
        stderr.write(f"platoon-risk: invalid input: {exc}\n")
        return EXIT_INPUT
    except UnstableParametersError as exc:
        stderr.write(f"platoon-risk: {exc}\n")
        return EXIT_UNSTABLE
    except PlatoonError as exc:
        stderr.write(f"platoon-risk: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
