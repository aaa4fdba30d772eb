"""Monte Carlo integration of the delayed platoon SDE.

The closed loop, written for deviations ``e = x - y`` from the formation::

    de = v dt
    dv = -L (v(t - tau) + beta e(t - tau)) dt + E dW

is integrated with Euler-Maruyama and a ring buffer holding the last
``tau / dt`` states. The default ``semi-implicit`` scheme updates ``v``
first and moves ``e`` with the new velocity (symplectic Euler); the plain
``explicit`` scheme uses the old one and over-estimates the stationary
variance by roughly ``beta * dt`` relative. History on ``[-tau, 0]`` is the formation itself
(``e = 0``, ``v = 0``). Each replicate draws from its own PCG64 stream,
seeded by ``SeedSequence(seed, spawn_key=(r,))``, so replicate ``r`` can
be regenerated on its own and results do not depend on ``workers``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numba
from numba.typed import List
import numpy as np
from scipy import sparse, stats as sps

from .errors import (
    InsufficientConditioningMassError,
    InsufficientSamplesError,
    InvalidParameterError,
    UnstableParametersError,
)
from .graph import Graph, SpectralData, laplacian, spectral
from .stability import platoon_stable
from .statistics import PlatoonParams

__all__ = [
    "SimConfig",
    "SnapshotEnsemble",
    "simulate_platoon",
    "replicate_generator",
    "default_burn_in",
    "diffusion_from_covariance",
    "empirical_covariance",
    "empirical_conditional_expectation",
    "truncated_bivariate_oracle",
    "time_averaged_covariance",
]

MIN_ACCEPTED = 100
MAX_BATCH = 64
SCHEMES = ("semi-implicit", "explicit")


@dataclass(frozen=True)
class SimConfig:
    """Integration settings.

    ``burn_in`` and ``horizon`` default to :func:`default_burn_in` and
    ``burn_in + 10 tau``; ``diffusion`` defaults to the scalar ``g`` of the
    platoon parameters and may be a full ``n x n`` matrix ``E``. ``scheme``
    is ``"semi-implicit"`` (default) or ``"explicit"``.
    """

    dt: float
    replicates: int = 1000
    seed: int = 0
    burn_in: float | None = None
    horizon: float | None = None
    diffusion: float | np.ndarray | None = None
    workers: int = 1
    scheme: str = "semi-implicit"

    def resolve(self, spec: SpectralData, p: PlatoonParams) -> "SimConfig":
        burn = default_burn_in(spec, p) if self.burn_in is None else float(self.burn_in)
        horizon = burn + 10 * p.tau if self.horizon is None else float(self.horizon)
        return replace(self, burn_in=burn, horizon=horizon)


@dataclass(frozen=True)
class SnapshotEnsemble:
    """Gap vectors, one row per replicate."""

    samples: np.ndarray
    d: float = float("nan")
    time: float = float("nan")

    @property
    def replicates(self) -> int:
        return self.samples.shape[0]

    @property
    def n_pairs(self) -> int:
        return self.samples.shape[1]

    def to_csv(self, path: str | Path | None = None) -> str:
        header = ",".join(f"d{k}" for k in range(1, self.n_pairs + 1))
        lines = [header]
        lines += [",".join(f"{v:.17g}" for v in row) for row in self.samples]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path) -> "SnapshotEnsemble":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(samples=data)


def default_burn_in(spec: SpectralData, p: PlatoonParams) -> float:
    """Heuristic settling time ``max(50 tau, 20 / (beta lam_2))``."""
    return max(50.0 * p.tau, 20.0 / (p.beta * spec.algebraic_connectivity))


def diffusion_from_covariance(gamma) -> np.ndarray:
    """A matrix ``E`` with ``E E^T = gamma`` (lower Cholesky factor)."""
    return np.linalg.cholesky(np.asarray(gamma, dtype=float))


def replicate_generator(seed: int, r: int) -> np.random.Generator:
    """Noise stream of replicate ``r``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(r,))))


@numba.njit(cache=True, nogil=True)
def _integrate(gens, indptr, indices, data, beta, E, g, diag, semi, m, nsteps, dt, snap_steps, out):
    """Advance a batch of replicates in lockstep; replicate ``r`` draws only from ``gens[r]``.

    The replicate index is the innermost array axis so the deterministic
    part vectorises; normals are drawn per replicate in blocks of ``K``
    steps, in the same order as a one-at-a-time integration would use.
    """
    n = indptr.shape[0] - 1
    B = len(gens)
    nb = m + 1
    e_buf = np.zeros((nb, n, B))
    v_buf = np.zeros((nb, n, B))
    w = np.empty((n, B))
    u = np.empty(B)
    K = max(1, 2048 // n)
    xi = np.empty((K, n, B))
    kk = K
    sqdt = math.sqrt(dt)
    s = 0
    nsnap = snap_steps.shape[0]
    # slot ``old`` holds the state tau ago and is overwritten by the new state
    cur = 0
    old = 1 % nb
    for k in range(nsteps):
        if kk == K:
            for r in range(B):
                gen = gens[r]
                for t in range(min(K, nsteps - k)):
                    for a in range(n):
                        xi[t, a, r] = gen.standard_normal()
            kk = 0
        x = xi[kk]
        kk += 1
        for a in range(n):
            for r in range(B):
                w[a, r] = v_buf[old, a, r] + beta * e_buf[old, a, r]
        for a in range(n):
            for r in range(B):
                u[r] = 0.0
            for q in range(indptr[a], indptr[a + 1]):
                c = data[q]
                b = indices[q]
                for r in range(B):
                    u[r] += c * w[b, r]
            if diag:
                for r in range(B):
                    v_buf[old, a, r] = v_buf[cur, a, r] - u[r] * dt + (g * x[a, r]) * sqdt
            else:
                for r in range(B):
                    noise = 0.0
                    for b in range(n):
                        noise += E[a, b] * x[b, r]
                    v_buf[old, a, r] = v_buf[cur, a, r] - u[r] * dt + noise * sqdt
            # semi-implicit: move with the velocity just computed
            src = old if semi else cur
            for r in range(B):
                e_buf[old, a, r] = e_buf[cur, a, r] + v_buf[src, a, r] * dt
        cur = old
        old += 1
        if old == nb:
            old = 0
        while s < nsnap and snap_steps[s] == k + 1:
            for r in range(B):
                for a in range(n - 1):
                    out[r, s, a] = e_buf[cur, a + 1, r] - e_buf[cur, a, r]
            s += 1


def _batch_size(n, m):
    # keep the two history buffers around a megabyte
    return int(min(MAX_BATCH, max(1, (1 << 16) // ((m + 1) * n))))


def _delay_steps(tau, dt):
    if not dt > 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    ratio = tau / dt
    m = int(round(ratio))
    if m < 1 or abs(ratio - m) > 1e-9 * max(ratio, 1.0):
        raise InvalidParameterError(f"tau / dt must be an integer, got {ratio!r}")
    return m


def _noise(cfg, p, n):
    """Return ``(E, g, diag)`` for the kernel."""
    D = p.g if cfg.diffusion is None else cfg.diffusion
    if np.isscalar(D):
        g = float(D)
        if not (math.isfinite(g) and g >= 0):
            raise InvalidParameterError(f"diffusion must be non-negative, got {g}")
        return np.zeros((1, 1)), g, True
    E = np.ascontiguousarray(np.asarray(D, dtype=float))
    if E.shape != (n, n):
        raise InvalidParameterError(f"diffusion matrix must be {n}x{n}, got {E.shape}")
    return E, 0.0, False


def _run(graph, p, cfg, snap_times, replicate_ids):
    spec = spectral(graph)
    if not platoon_stable(spec, p.tau, p.beta):
        raise UnstableParametersError("refusing to simulate an unstable platoon")
    cfg = cfg.resolve(spec, p)
    m = _delay_steps(p.tau, cfg.dt)
    if cfg.dt > p.tau / 10 * (1 + 1e-12):
        raise InvalidParameterError(f"dt must be <= tau/10, got dt={cfg.dt}, tau={p.tau}")
    if not cfg.horizon > cfg.burn_in:
        raise InvalidParameterError("horizon must exceed burn_in")
    if cfg.replicates < 1:
        raise InvalidParameterError("replicates must be >= 1")
    L = sparse.csr_matrix(laplacian(graph))
    E, g, diag = _noise(cfg, p, graph.n)
    if cfg.scheme not in SCHEMES:
        raise InvalidParameterError(f"scheme must be one of {SCHEMES}, got {cfg.scheme!r}")
    semi = cfg.scheme == "semi-implicit"
    snap_steps = np.array([int(round(t / cfg.dt)) for t in snap_times], dtype=np.int64)
    nsteps = int(snap_steps.max())
    ids = np.arange(cfg.replicates) if replicate_ids is None else np.asarray(replicate_ids)
    out = np.zeros((len(ids), len(snap_steps), graph.n - 1))

    B = _batch_size(graph.n, m)
    batches = [(a, min(a + B, len(ids))) for a in range(0, len(ids), B)]

    def work(batch):
        a, b = batch
        gens = List([replicate_generator(cfg.seed, int(r)) for r in ids[a:b]])
        _integrate(gens, L.indptr, L.indices, L.data, p.beta, E, g, diag, semi, m, nsteps, cfg.dt, snap_steps, out[a:b])

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            list(pool.map(work, batches))
    else:
        for batch in batches:
            work(batch)
    return cfg, out + p.d


def simulate_platoon(
    graph: Graph,
    p: PlatoonParams,
    cfg: SimConfig,
    replicate_ids=None,
) -> SnapshotEnsemble:
    """Terminal gap vector at ``cfg.horizon`` for each independent replicate.

    ``replicate_ids`` restricts the run to a subset of replicate indices; the
    rows are bitwise identical to the corresponding rows of a full run.

    Raises
    ------
    UnstableParametersError
        If the deterministic platoon is unstable (the simulation would diverge).
    InvalidParameterError
        If ``tau / dt`` is not an integer or other settings are inconsistent.
    """
    cfg = cfg.resolve(spectral(graph), p)
    cfg, out = _run(graph, p, cfg, [cfg.horizon], replicate_ids)
    return SnapshotEnsemble(samples=out[:, 0, :], d=p.d, time=cfg.horizon)


def time_averaged_covariance(graph: Graph, p: PlatoonParams, cfg: SimConfig, stride: int = 1):
    """Covariance pooled over snapshots every ``stride * dt`` between burn-in and horizon.

    Consecutive snapshots are autocorrelated, so only the point estimate is
    returned; use it as a cross-check of :func:`empirical_covariance`.
    """
    cfg = cfg.resolve(spectral(graph), p)
    k0 = int(round(cfg.burn_in / cfg.dt))
    k1 = int(round(cfg.horizon / cfg.dt))
    times = [k * cfg.dt for k in range(k0, k1 + 1, stride)]
    _, out = _run(graph, p, cfg, times, None)
    pooled = out.reshape(-1, graph.n - 1)
    return np.cov(pooled, rowvar=False)


def empirical_covariance(ens: SnapshotEnsemble | np.ndarray):
    """Unbiased sample covariance and delete-one jackknife standard errors.

    Returns
    -------
    cov, se : ndarray, shape (p, p)
    """
    x = ens.samples if isinstance(ens, SnapshotEnsemble) else np.asarray(ens, dtype=float)
    x = np.atleast_2d(x)
    N = x.shape[0]
    if N < 3:
        raise InsufficientSamplesError(f"need at least 3 replicates for jackknife errors, got {N}")
    u = x - x.mean(axis=0)
    S = u.T @ u
    cov = S / (N - 1)
    # leave-one-out: S_(-k) = S - N/(N-1) u_k u_k^T, divided by N - 2
    se = np.empty_like(cov)
    c = N / (N - 1)
    for a in range(cov.shape[0]):
        w = u[:, a : a + 1] * u[:, a:]
        loo = (S[a, a:] - c * w) / (N - 2)
        se[a, a:] = np.sqrt((N - 1) / N * ((loo - loo.mean(axis=0)) ** 2).sum(axis=0))
        se[a:, a] = se[a, a:]
    return cov, se


def empirical_conditional_expectation(
    ens: SnapshotEnsemble | np.ndarray, i: int, j: int, d_star: float
):
    """Ratio estimate of ``E[dbar_j | dbar_i < d*]`` (1-based pair labels).

    Returns
    -------
    estimate, standard_error, acceptance_fraction
        The standard error is the delta-method error of the ratio of means.

    Raises
    ------
    InsufficientConditioningMassError
        If fewer than 100 samples satisfy ``dbar_i < d*``.
    """
    x = ens.samples if isinstance(ens, SnapshotEnsemble) else np.asarray(ens, dtype=float)
    p = x.shape[1]
    if not (1 <= i <= p and 1 <= j <= p):
        raise InvalidParameterError(f"pair labels must lie in 1..{p}")
    mask = x[:, i - 1] < d_star
    k = int(mask.sum())
    frac = k / x.shape[0]
    if k < MIN_ACCEPTED:
        raise InsufficientConditioningMassError(
            f"only {k} of {x.shape[0]} samples satisfy dbar_{i} < {d_star}", frac
        )
    y = x[mask, j - 1]
    est = float(y.mean())
    se = float(np.sqrt(((y - est) ** 2).sum()) / k)
    return est, se, frac


def truncated_bivariate_oracle(
    d: float,
    sigma_i: float,
    sigma_j: float,
    rho: float,
    d_star: float,
    n_samples: int = 1_000_000,
    seed: int = 0,
    method: str = "rejection",
):
    """Monte Carlo estimate of ``E[Y_j | Y_i < d*]`` for a bivariate normal with mean ``(d, d)``.

    ``method="rejection"`` draws ``n_samples`` pairs through the two-factor
    construction ``Y_i = d + s_i Z1``,
    ``Y_j = d + s_j (rho Z1 + sqrt(1 - rho^2) Z2)`` and keeps those with
    ``Y_i < d*``. ``method="inverse-cdf"`` draws ``Z1`` directly from the
    normal truncated to ``(-inf, (d* - d)/s_i)`` so all ``n_samples`` are
    accepted; use it when the event is too rare for rejection.

    Returns
    -------
    estimate, standard_error
    """
    if n_samples < 10_000:
        raise InvalidParameterError(f"n_samples must be >= 1e4, got {n_samples}")
    if not abs(rho) <= 1:
        raise InvalidParameterError(f"rho must lie in [-1, 1], got {rho}")
    rng = np.random.default_rng(seed)
    x = (d_star - d) / sigma_i
    if method == "rejection":
        z1 = rng.standard_normal(n_samples)
        z2 = rng.standard_normal(n_samples)
        mask = z1 < x
        frac = mask.mean()
        if frac < 1e-4 or mask.sum() < 2:
            raise InsufficientConditioningMassError(
                f"acceptance fraction {frac:.3g} is below 1e-4", float(frac)
            )
        z1, z2 = z1[mask], z2[mask]
    elif method == "inverse-cdf":
        if not math.isfinite(x):
            z1 = rng.standard_normal(n_samples)
        else:
            z1 = sps.truncnorm.rvs(-np.inf, x, size=n_samples, random_state=rng)
        z2 = rng.standard_normal(n_samples)
    else:
        raise InvalidParameterError(f"unknown method {method!r}")
    yj = d + sigma_j * (rho * z1 + math.sqrt(1.0 - rho * rho) * z2)
    return float(yj.mean()), float(yj.std(ddof=1) / math.sqrt(len(yj)))
