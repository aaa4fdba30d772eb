"""Distributionally robust cascading risk between pairs of vehicles.

Pair ``i`` is known to be in the soft-failure level set ``dbar_i < d*`` with
``d* = d / (delta + c)``. The risk carried over to pair ``j`` is::

    R^{ji} = d / inf_{P in M} E_P[dbar_j | dbar_i < d*] - 1

where the ambiguity set ``M`` lets ``g^2`` range over
``[(1 - eps) g0^2, (1 + eps) g0^2]``, i.e. scales the whole covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import InvalidParameterError, OutOfDomainError
from .statistics import DistanceStatistics

__all__ = [
    "SystemicLevelSet",
    "ScalarAmbiguity",
    "MatrixAmbiguity",
    "RiskEntry",
    "RiskResult",
    "systemic_threshold",
    "conditional_expectation",
    "h_eps",
    "dr_cascading_risk",
    "risk_profile",
    "loewner_within",
    "risk_lower_bound",
    "RHO_TOL",
    "DEEP_TAIL",
]

RHO_TOL = 1e-12
DEEP_TAIL = 8.0
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def systemic_threshold(d: float, delta: float, c: float) -> float:
    """Level-set threshold ``d* = d / (delta + c)``."""
    if not c > 0:
        raise InvalidParameterError(f"c must be positive, got {c}")
    if not delta >= 0:
        raise InvalidParameterError(f"delta must be non-negative, got {delta}")
    if not d > 0:
        raise InvalidParameterError(f"d must be positive, got {d}")
    return d / (delta + c)


@dataclass(frozen=True)
class SystemicLevelSet:
    """Soft-failure event ``dbar_i < d / (delta + c)``."""

    delta: float
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidParameterError(f"c must be positive, got {self.c}")
        if not self.delta >= 0:
            raise InvalidParameterError(f"delta must be non-negative, got {self.delta}")

    def d_star(self, d: float) -> float:
        return systemic_threshold(d, self.delta, self.c)


@dataclass(frozen=True)
class ScalarAmbiguity:
    """Uncertain diffusion: ``(1 - eps) g0^2 <= g^2 <= (1 + eps) g0^2``."""

    g0: float
    eps: float

    def __post_init__(self):
        if not self.g0 > 0:
            raise InvalidParameterError(f"g0 must be positive, got {self.g0}")
        if not 0 <= self.eps < 1:
            raise InvalidParameterError(f"eps must lie in [0, 1), got {self.eps}")


@dataclass(frozen=True)
class MatrixAmbiguity:
    """Loewner ball ``(1 - eps) Gamma0 <= Gamma <= (1 + eps) Gamma0`` of input covariances."""

    gamma0: np.ndarray
    eps: float

    def __post_init__(self):
        g = np.asarray(self.gamma0, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or not np.allclose(g, g.T):
            raise InvalidParameterError("gamma0 must be a symmetric matrix")
        if np.linalg.eigvalsh(g)[0] <= 0:
            raise InvalidParameterError("gamma0 must be positive definite")
        if not 0 <= self.eps < 1:
            raise InvalidParameterError(f"eps must lie in [0, 1), got {self.eps}")
        object.__setattr__(self, "gamma0", g)

    def contains(self, gamma: np.ndarray, tol: float = 1e-10) -> bool:
        return loewner_within(gamma, self.gamma0, self.eps, tol)


def _mills(x):
    """``sqrt(2/pi) exp(-x^2/2) / (1 + erf(x/sqrt 2))``, i.e. ``phi(x) / Phi(x)``.

    ``1 + erf(z)`` is taken as ``erfc(-z)`` to avoid cancellation; once
    ``-x > DEEP_TAIL`` the ratio ``exp(-z^2)/erfc(-z)`` is evaluated as
    ``1/erfcx(-z)`` since both numerator and denominator underflow.
    """
    z = x / math.sqrt(2.0)
    if -x > DEEP_TAIL:
        return _SQRT_2_OVER_PI / special.erfcx(-z)
    return _SQRT_2_OVER_PI * math.exp(-z * z) / special.erfc(-z)


def _check_sigma(name, s):
    if not (math.isfinite(s) and s > 0):
        raise InvalidParameterError(f"{name} must be positive, got {s}")


def conditional_expectation(
    d: float, sigma_i: float, sigma_j: float, rho_ji: float, d_star: float
) -> float:
    """``E[dbar_j | dbar_i < d*]`` for a bivariate normal with common mean ``d``.

    Equals ``d - rho sigma_j phi(x) / Phi(x)`` with ``x = (d* - d) / sigma_i``.
    """
    _check_sigma("sigma_i", sigma_i)
    _check_sigma("sigma_j", sigma_j)
    if not abs(rho_ji) < 1:
        raise OutOfDomainError(f"|rho_ji| must be < 1, got {rho_ji}")
    if not math.isfinite(d_star):
        if d_star > 0:
            return float(d)
        raise OutOfDomainError("d_star = -inf gives an empty conditioning event")
    if rho_ji == 0:
        return float(d)
    return d - rho_ji * sigma_j * _mills((d_star - d) / sigma_i)


def h_eps(
    eps: float, d: float, sigma_i0: float, sigma_j0: float, rho_ji: float, d_star: float
) -> float:
    """Conditional expectation after scaling the reference covariance by ``1 + eps``.

    ``eps`` may be negative (the lower edge of the ambiguity set).
    """
    if not 1 + eps > 0:
        raise OutOfDomainError(f"1 + eps must be positive, got eps={eps}")
    _check_sigma("sigma_i0", sigma_i0)
    _check_sigma("sigma_j0", sigma_j0)
    if not abs(rho_ji) < 1:
        raise OutOfDomainError(f"|rho_ji| must be < 1, got {rho_ji}")
    if rho_ji == 0:
        return float(d)
    scale = math.sqrt(1.0 + eps)
    x = (d_star - d) / (sigma_i0 * scale)
    return d - rho_ji * sigma_j0 * scale * _mills(x)


@dataclass(frozen=True)
class RiskEntry:
    j: int
    rho_ji: float
    worst_case_expectation: float
    risk: float
    degenerate: bool = False


@dataclass(frozen=True)
class RiskResult:
    """Risk profile seen from conditioning pair ``i`` (1-based labels)."""

    i: int
    entries: list[RiskEntry] = field(default_factory=list)
    lower_bound: float = float("nan")

    @property
    def j(self) -> np.ndarray:
        return np.array([e.j for e in self.entries])

    @property
    def risks(self) -> np.ndarray:
        return np.array([e.risk for e in self.entries])

    @property
    def rhos(self) -> np.ndarray:
        return np.array([e.rho_ji for e in self.entries])

    def as_dict(self) -> dict[int, float]:
        return {e.j: e.risk for e in self.entries}


def _reference_stats(stats: DistanceStatistics, amb: ScalarAmbiguity) -> DistanceStatistics:
    if stats.params is not None and stats.params.g != amb.g0:
        return stats.scaled(amb.g0)
    return stats


def _check_pair(label, n_pairs, name):
    if not (isinstance(label, (int, np.integer)) and 1 <= label <= n_pairs):
        raise InvalidParameterError(f"{name} must be a pair label in 1..{n_pairs}, got {label!r}")


def dr_cascading_risk(
    stats: DistanceStatistics,
    i: int,
    j: int,
    level: SystemicLevelSet,
    amb: ScalarAmbiguity,
) -> RiskEntry:
    """Worst-case risk of pair ``j`` given soft failure of pair ``i``.

    The conditional mean is monotone in ``g``: decreasing for ``rho > 0``,
    increasing for ``rho < 0``. Its infimum over the ambiguity set therefore
    sits at ``h(+eps)`` or ``h(-eps)`` respectively. Correlations below
    ``RHO_TOL`` in magnitude count as zero and give zero risk. A non-positive
    worst-case mean is reported as infinite risk with ``degenerate=True``.
    """
    if not isinstance(amb, ScalarAmbiguity):
        raise InvalidParameterError("dr_cascading_risk needs a scalar (diffusion) ambiguity set")
    n_pairs = stats.n_pairs
    _check_pair(i, n_pairs, "i")
    _check_pair(j, n_pairs, "j")
    if i == j:
        raise InvalidParameterError("conditioning pair i and target pair j must differ")
    ref = _reference_stats(stats, amb)
    d = float(ref.mean[j - 1])
    rho = ref.correlation(j, i)
    if abs(rho) < RHO_TOL:
        return RiskEntry(j=j, rho_ji=rho, worst_case_expectation=d, risk=0.0)
    d_star = level.d_star(d)
    eps = amb.eps if rho > 0 else -amb.eps
    h = h_eps(eps, d, ref.std(i), ref.std(j), rho, d_star)
    if h <= 0:
        return RiskEntry(j=j, rho_ji=rho, worst_case_expectation=h, risk=math.inf, degenerate=True)
    return RiskEntry(j=j, rho_ji=rho, worst_case_expectation=h, risk=d / h - 1.0)


def risk_profile(
    stats: DistanceStatistics,
    i: int,
    level: SystemicLevelSet,
    amb: ScalarAmbiguity,
) -> RiskResult:
    """``dr_cascading_risk`` for every ``j != i``, plus the eigenvalue lower bound."""
    _check_pair(i, stats.n_pairs, "i")
    entries = [
        dr_cascading_risk(stats, i, j, level, amb) for j in range(1, stats.n_pairs + 1) if j != i
    ]
    ref = _reference_stats(stats, amb)
    d = float(ref.mean[0])
    bound = risk_lower_bound(ref.sigma, amb.eps, d, level.d_star(d))
    return RiskResult(i=i, entries=entries, lower_bound=bound)


def loewner_within(sigma, sigma0, eps: float, tol: float = 1e-10) -> bool:
    """``(1 - eps) sigma0 <= sigma <= (1 + eps) sigma0`` in the Loewner order.

    ``tol`` is relative to the largest eigenvalue magnitude of ``sigma0``.
    """
    sigma = np.asarray(sigma, dtype=float)
    sigma0 = np.asarray(sigma0, dtype=float)
    if sigma.shape != sigma0.shape or sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InvalidParameterError(f"shape mismatch: {sigma.shape} vs {sigma0.shape}")
    scale = max(float(np.abs(np.linalg.eigvalsh(0.5 * (sigma0 + sigma0.T))).max()), 1e-300)
    upper = (1 + eps) * sigma0 - sigma
    lower = sigma - (1 - eps) * sigma0
    lo_up = np.linalg.eigvalsh(0.5 * (upper + upper.T))[0]
    lo_lo = np.linalg.eigvalsh(0.5 * (lower + lower.T))[0]
    return bool(lo_up >= -tol * scale and lo_lo >= -tol * scale)


def risk_lower_bound(sigma0, eps: float, d: float, d_star: float) -> float:
    """Eigenvalue lower bound ``d / f(mu_max, mu_min) - 1`` on the cascading risk.

    ``f = sqrt(mu_max (1 + eps)) / sqrt((1 + erf((d* - d) / (2 sqrt(mu_min (1 - eps))))) / 2)``
    with ``mu_min``, ``mu_max`` the extreme eigenvalues of ``sigma0``.
    """
    sigma0 = np.atleast_2d(np.asarray(sigma0, dtype=float))
    if not 0 <= eps < 1:
        raise InvalidParameterError(f"eps must lie in [0, 1), got {eps}")
    mu = np.linalg.eigvalsh(0.5 * (sigma0 + sigma0.T))
    mu_min, mu_max = float(mu[0]), float(mu[-1])
    if mu_min <= 0:
        raise InvalidParameterError("sigma0 must be positive definite")
    z = (d_star - d) / (2.0 * math.sqrt(mu_min * (1.0 - eps)))
    prob = 0.5 * special.erfc(-z)
    if prob == 0.0:
        return -1.0
    f = math.sqrt(mu_max * (1.0 + eps)) / math.sqrt(prob)
    return d / f - 1.0
