"""Steady-state distribution of inter-vehicle distances.

Each non-consensus Laplacian mode ``k`` is a scalar delayed oscillator driven
by independent white noise; its stationary position variance is::

    sigma_z[k]^2 = g^2 tau^3 / (2 pi) * f(lam_k tau, beta tau)
    f(s1, s2)    = int_R dr / ((s1 s2 - r^2 cos r)^2 + r^2 (s1 - r sin r)^2)

Gaps ``dbar = D^T Q z + d 1`` are then Gaussian with covariance
``Sigma = (D^T Q~) diag(sigma_z^2) (D^T Q~)^T`` where ``Q~`` drops the
consensus eigenvector.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import InvalidParameterError, UnstableParametersError
from .graph import SpectralData
from .stability import in_stability_region, platoon_stable

__all__ = [
    "PlatoonParams",
    "DistanceStatistics",
    "f_integrand",
    "f_integral",
    "modal_variances",
    "difference_matrix",
    "distance_covariance",
    "correlation_from_covariance",
]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class PlatoonParams:
    """Delay ``tau`` [s], position gain ``beta`` [1/s], target gap ``d`` [m], diffusion ``g``."""

    tau: float
    beta: float
    d: float
    g: float

    def __post_init__(self):
        for name in ("tau", "beta", "d", "g"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v) and v > 0):
                raise InvalidParameterError(f"{name} must be a positive finite number, got {v!r}")

    def with_g(self, g: float) -> "PlatoonParams":
        return PlatoonParams(self.tau, self.beta, self.d, g)


@dataclass(frozen=True)
class DistanceStatistics:
    """Gaussian law ``N(mean, sigma)`` of the ``n - 1`` steady-state gaps.

    ``rho[j, i] = sigma[j, i] / (s_i s_j)``; pair labels are 1-based in the
    public API, so ``std(i)`` refers to ``sigma[i-1, i-1]``.
    """

    sigma: np.ndarray
    mean: np.ndarray
    rho: np.ndarray
    params: PlatoonParams | None = None

    @property
    def n_pairs(self) -> int:
        return self.sigma.shape[0]

    @property
    def stds(self) -> np.ndarray:
        return np.sqrt(np.diag(self.sigma))

    def std(self, pair: int) -> float:
        return float(np.sqrt(self.sigma[pair - 1, pair - 1]))

    def correlation(self, j: int, i: int) -> float:
        return float(self.rho[j - 1, i - 1])

    def scaled(self, g: float) -> "DistanceStatistics":
        """Statistics for a different diffusion coefficient (Sigma scales with g^2)."""
        if self.params is None:
            raise InvalidParameterError("statistics carry no parameters to rescale")
        factor = (g / self.params.g) ** 2
        return DistanceStatistics(self.sigma * factor, self.mean, self.rho, self.params.with_g(g))


def f_integrand(r, s1: float, s2: float):
    """``1 / ((s1 s2 - r^2 cos r)^2 + r^2 (s1 - r sin r)^2)``; even in ``r``."""
    r = np.asarray(r, dtype=float)
    r2 = r * r
    a = s1 * s2 - r2 * np.cos(r)
    b = s1 - r * np.sin(r)
    return 1.0 / (a * a + r2 * b * b)


def _tail_coefficients(s1, s2):
    # den >= r^4 (1 - eta(r)),  eta(r) = c3/r + c2/r^2 + c0/r^4
    return 2.0 * s1, 2.0 * s1 * s2 + s1 * s1, (s1 * s2) ** 2


def _tail_remainder_bound(R, s1, s2):
    """Bound on ``|int_R^inf (integrand - r^-4) dr|``; ``inf`` if not yet valid."""
    c3, c2, c0 = _tail_coefficients(s1, s2)
    eta = c3 / R + c2 / R**2 + c0 / R**4
    if eta >= 0.5:
        return math.inf
    return (c3 / (4 * R**4) + c2 / (5 * R**5) + c0 / (7 * R**7)) / (1.0 - eta)


def f_integral(s1: float, s2: float, tol: float = DEFAULT_TOL) -> float:
    """Evaluate ``f(s1, s2)`` over the whole real line to relative accuracy ``tol``.

    The integrand is even, so ``2 * int_0^inf`` is computed: adaptive
    Gauss-Kronrod (QUADPACK) on fixed panels of width ``pi`` up to a cut-off
    ``R``, plus the exact ``1/(3 R^3)`` contribution of the ``r^-4`` envelope
    beyond ``R``. ``R`` is the first panel edge where the bound on the
    neglected remainder falls below ``tol / 20`` of the running value.

    Raises
    ------
    UnstableParametersError
        If ``(s1, s2)`` is outside the stability region (the integrand may
        have poles there).
    """
    if not tol > 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    if not in_stability_region((s1, s2)):
        raise UnstableParametersError(f"(s1, s2) = ({s1}, {s2}) is outside the stability region")

    # resonance of the undelayed oscillator and its half-width
    r0 = math.sqrt(s1 * s2)
    # breakpoints resolve the peak when both scales are tiny compared with pi
    w = max(r0, s1)
    candidates = (s2, 0.5 * r0, r0 - 0.5 * s1, r0 - s1, r0, r0 + 0.5 * s1, r0 + s1, 2 * r0, 10 * w, 100 * w)
    first_points = sorted({p for p in candidates if 0.0 < p < math.pi})
    args = (s1, s2)

    def panel(a, b, points=None):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            val, _ = integrate.quad(
                f_integrand, a, b, args=args, points=points, epsabs=0.0, epsrel=max(tol / 20, 1e-13), limit=400
            )
        return val

    total = panel(0.0, math.pi, first_points or None)
    edge = math.pi
    # the integrand is positive, so ``total`` is always a lower bound of the answer
    while True:
        if _tail_remainder_bound(edge, s1, s2) <= 0.05 * tol * (total + 1.0 / (3 * edge**3)):
            break
        total += panel(edge, edge + math.pi)
        edge += math.pi
    return 2.0 * (total + 1.0 / (3.0 * edge**3))


def _check_stable(spec, p):
    if not platoon_stable(spec, p.tau, p.beta):
        raise UnstableParametersError(
            f"platoon with tau={p.tau}, beta={p.beta} is unstable "
            f"(lam_max * tau = {spec.eigenvalues[-1] * p.tau:.4g})"
        )


def _unique_f(eigenvalues, p, tol, rel=1e-12):
    """``f(lam tau, beta tau)`` evaluated once per cluster of numerically equal eigenvalues."""
    out = np.empty(len(eigenvalues))
    rep = None
    val = None
    for k, lam in enumerate(eigenvalues):
        if rep is None or abs(lam - rep) > rel * max(abs(rep), 1.0):
            rep = lam
            val = f_integral(lam * p.tau, p.beta * p.tau, tol)
        out[k] = val
    return out


def modal_variances(spec: SpectralData, p: PlatoonParams, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Stationary variances ``sigma_z[k]^2`` of modes ``k = 2..n`` (length ``n - 1``)."""
    _check_stable(spec, p)
    f = _unique_f(spec.eigenvalues[1:], p, tol)
    return p.g**2 * p.tau**3 / (2.0 * math.pi) * f


def difference_matrix(n: int) -> np.ndarray:
    """``D = [e~_1 | ... | e~_{n-1}]`` with ``e~_i = e_{i+1} - e_i``; ``D^T x`` gives the gaps."""
    D = np.zeros((n, n - 1))
    idx = np.arange(n - 1)
    D[idx, idx] = -1.0
    D[idx + 1, idx] = 1.0
    return D


def correlation_from_covariance(sigma: np.ndarray) -> np.ndarray:
    s = np.sqrt(np.diag(sigma))
    rho = sigma / np.outer(s, s)
    rho = 0.5 * (rho + rho.T)
    np.fill_diagonal(rho, 1.0)
    return np.clip(rho, -1.0, 1.0)


def distance_covariance(
    spec: SpectralData, p: PlatoonParams, tol: float = DEFAULT_TOL
) -> DistanceStatistics:
    """Closed-form steady-state gap statistics.

    The consensus mode is left out: ``D^T q_1 = 0`` exactly, while
    ``f(0, s2)`` diverges.
    """
    var_z = modal_variances(spec, p, tol)
    D = difference_matrix(spec.n)
    M = D.T @ spec.eigenvectors[:, 1:]
    sigma = (M * var_z) @ M.T
    sigma = 0.5 * (sigma + sigma.T)
    mean = np.full(spec.n - 1, float(p.d))
    return DistanceStatistics(sigma=sigma, mean=mean, rho=correlation_from_covariance(sigma), params=p)
