"""Delay-dependent stability region of the deterministic platoon.

A mode with Laplacian eigenvalue ``lam`` is stable iff ``(lam*tau, beta*tau)``
lies in the open set::

    S = {(s1, s2) : 0 < s1 < pi/2,  0 < s2 < a / tan(a)},   a sin(a) = s1, a in (0, pi/2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, OutOfDomainError
from .graph import SpectralData

__all__ = [
    "StabilityQuery",
    "solve_a",
    "stability_margin",
    "in_stability_region",
    "platoon_stable",
    "mode_table",
]

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class StabilityQuery:
    s1: float
    s2: float


def solve_a(s1: float, tol: float = 1e-12) -> float:
    """Unique ``a`` in ``(0, pi/2)`` with ``a * sin(a) == s1``.

    Bisection on the bracket ``[0, pi/2]`` followed by Newton polishing; the
    map ``a -> a sin a`` is strictly increasing there.
    """
    s1 = float(s1)
    if not (0.0 < s1 < HALF_PI):
        raise OutOfDomainError(f"s1 must lie in (0, pi/2), got {s1!r}")
    lo, hi = 0.0, HALF_PI
    # bisection until the bracket is narrow enough for Newton to be safe
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mid * math.sin(mid) < s1:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6 * hi:
            break
    a = 0.5 * (lo + hi)
    for _ in range(100):
        r = a * math.sin(a) - s1
        if abs(r) <= 1e-3 * tol * s1 or hi - lo <= 4 * math.ulp(hi):
            break
        if r < 0:
            lo = a
        else:
            hi = a
        a_new = a - r / (math.sin(a) + a * math.cos(a))
        if not lo < a_new < hi:
            a_new = 0.5 * (lo + hi)
        if a_new == a:
            break
        a = a_new
    return a


def stability_margin(s1: float) -> float:
    """Upper edge ``a / tan(a)`` of the admissible ``s2`` interval."""
    a = solve_a(s1)
    return a / math.tan(a)


def in_stability_region(q: StabilityQuery | tuple[float, float]) -> bool:
    """Membership of ``(s1, s2)`` in the open region ``S``; boundaries are unstable."""
    s1, s2 = (q.s1, q.s2) if isinstance(q, StabilityQuery) else q
    if not (0.0 < s1 < HALF_PI) or not s2 > 0.0:
        return False
    return bool(s2 < stability_margin(s1))


def _check_tau_beta(tau, beta):
    if not (np.isfinite(tau) and tau > 0):
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    if not (np.isfinite(beta) and beta > 0):
        raise InvalidParameterError(f"beta must be positive, got {beta}")


def platoon_stable(spec: SpectralData, tau: float, beta: float) -> bool:
    """True iff every non-consensus mode ``k = 2..n`` satisfies ``(lam_k tau, beta tau) in S``.

    The zero eigenvalue is the rigid translation of the whole platoon and
    does not affect inter-vehicle distances, so it is skipped.
    """
    _check_tau_beta(tau, beta)
    s2 = beta * tau
    return all(in_stability_region((float(lam) * tau, s2)) for lam in spec.eigenvalues[1:])


def mode_table(spec: SpectralData, tau: float, beta: float) -> list[dict]:
    """Per-mode diagnostics ``(k, s1, s2, a, a/tan a, stable)`` for ``k = 2..n``."""
    _check_tau_beta(tau, beta)
    s2 = beta * tau
    rows = []
    for k, lam in enumerate(spec.eigenvalues[1:], start=2):
        s1 = float(lam) * tau
        if 0.0 < s1 < HALF_PI:
            a = solve_a(s1)
            bound = a / math.tan(a)
        else:
            a = bound = float("nan")
        rows.append(
            {
                "k": k,
                "s1": s1,
                "s2": s2,
                "a": a,
                "a_over_tan_a": bound,
                "stable": in_stability_region((s1, s2)),
            }
        )
    return rows
