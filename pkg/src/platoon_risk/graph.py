"""Weighted communication graphs, Laplacians and their spectra.

Vehicles carry 1-based labels in every external representation (JSON edge
lists, CLI output); internally vehicle ``i`` is row/column ``i - 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg
from scipy.sparse.csgraph import connected_components

from .errors import InvalidParameterError, NotConnectedError

__all__ = [
    "Graph",
    "SpectralData",
    "build_complete",
    "build_path",
    "build_p_cycle",
    "from_edges",
    "laplacian",
    "spectral",
]


@dataclass(frozen=True)
class Graph:
    """Undirected, simple, connected graph with non-negative feedback gains.

    Parameters
    ----------
    weights : array_like, shape (n, n)
        Symmetric matrix of gains ``k_ij`` with zero diagonal.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InvalidParameterError(f"weights must be square, got shape {w.shape}")
        if w.shape[0] < 2:
            raise InvalidParameterError("a platoon needs at least 2 vehicles")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidParameterError("weights must be finite and non-negative")
        if np.any(np.diag(w) != 0):
            raise InvalidParameterError("self-loops are not allowed (weights[i][i] must be 0)")
        if not np.array_equal(w, w.T):
            raise InvalidParameterError("weights must be symmetric")
        ncomp, _ = connected_components(w > 0, directed=False)
        if ncomp != 1:
            raise NotConnectedError(f"graph has {ncomp} connected components")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def edges(self) -> list[tuple[int, int, float]]:
        """Edge list ``(i, j, k)`` with 1-based labels and ``i < j``."""
        iu, ju = np.nonzero(np.triu(self.weights, 1))
        return [(int(i) + 1, int(j) + 1, float(self.weights[i, j])) for i, j in zip(iu, ju)]

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges()]}

    @classmethod
    def from_dict(cls, data: dict) -> "Graph":
        try:
            n = int(data["n"])
            edges = data["edges"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParameterError(f"graph JSON needs 'n' and 'edges': {exc}") from None
        return from_edges(n, edges)

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict())
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_json(cls, source: str | Path) -> "Graph":
        """Parse a graph from a JSON string or a path to a JSON file."""
        p = Path(source) if not str(source).lstrip().startswith("{") else None
        text = p.read_text() if p is not None else str(source)
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SpectralData:
    """Ascending Laplacian eigenvalues and an orthonormal eigenbasis.

    ``eigenvectors[:, 0]`` is exactly ``1 / sqrt(n)``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    laplacian: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def algebraic_connectivity(self) -> float:
        return float(self.eigenvalues[1])


def _check_weight(k):
    if not (np.isfinite(k) and k > 0):
        raise InvalidParameterError(f"edge weight must be positive, got {k}")


def build_complete(n: int, k: float = 1.0) -> Graph:
    """All-to-all topology with uniform gain ``k``."""
    if n < 2:
        raise InvalidParameterError(f"n must be >= 2, got {n}")
    _check_weight(k)
    w = np.full((n, n), float(k))
    np.fill_diagonal(w, 0.0)
    return Graph(w)


def build_path(n: int, k: float = 1.0) -> Graph:
    """Each vehicle talks only to its predecessor and successor."""
    if n < 2:
        raise InvalidParameterError(f"n must be >= 2, got {n}")
    _check_weight(k)
    w = np.zeros((n, n))
    idx = np.arange(n - 1)
    w[idx, idx + 1] = k
    w[idx + 1, idx] = k
    return Graph(w)


def build_p_cycle(n: int, p: int, k: float = 1.0) -> Graph:
    """Circulant ring where vehicle ``i`` links to ``i +/- 1, ..., i +/- p`` (mod n).

    For odd ``n`` the largest admissible ``p = (n - 1) / 2`` gives the complete
    graph; for even ``n`` it leaves exactly the antipodal pairs unlinked.
    """
    if n < 3:
        raise InvalidParameterError(f"n must be >= 3 for a cycle, got {n}")
    if not 1 <= p <= (n - 1) // 2:
        raise InvalidParameterError(f"p must lie in [1, {(n - 1) // 2}] for n={n}, got {p}")
    _check_weight(k)
    w = np.zeros((n, n))
    idx = np.arange(n)
    for m in range(1, p + 1):
        w[idx, (idx + m) % n] = k
        w[(idx + m) % n, idx] = k
    return Graph(w)


def from_edges(n: int, edges) -> Graph:
    """Build a graph from ``[[i, j, k], ...]`` with 1-based labels (``k`` defaults to 1)."""
    if n < 2:
        raise InvalidParameterError(f"n must be >= 2, got {n}")
    w = np.zeros((n, n))
    for e in edges:
        if len(e) not in (2, 3):
            raise InvalidParameterError(f"edge must be [i, j] or [i, j, k], got {e!r}")
        i, j = int(e[0]), int(e[1])
        k = float(e[2]) if len(e) == 3 else 1.0
        if not (1 <= i <= n and 1 <= j <= n):
            raise InvalidParameterError(f"edge {e!r} references a label outside 1..{n}")
        if i == j:
            raise InvalidParameterError(f"self-loop on vehicle {i}")
        _check_weight(k)
        w[i - 1, j - 1] = w[j - 1, i - 1] = k
    return Graph(w)


def laplacian(g: Graph) -> np.ndarray:
    """``L = diag(W 1) - W``."""
    w = g.weights
    return np.diag(w.sum(axis=1)) - w


def spectral(g: Graph, tol: float = 1e-10) -> SpectralData:
    """Eigen-decomposition ``L = Q diag(lam) Q^T`` with ``q_1 = 1/sqrt(n)``.

    Raises
    ------
    NotConnectedError
        If ``lam_2 <= tol * max(1, max|L|)``.
    """
    L = laplacian(g)
    lam, Q = linalg.eigh(L)
    scale = max(1.0, float(np.abs(L).max()))
    if lam[1] <= tol * scale:
        raise NotConnectedError(f"second Laplacian eigenvalue {lam[1]:.3e} is not positive")
    lam = lam.copy()
    lam[0] = 0.0
    Q = Q.copy()
    # the null vector is known exactly; re-orthogonalise the rest against it
    n = g.n
    q1 = np.full(n, 1.0 / np.sqrt(n))
    Q[:, 0] = q1
    Q[:, 1:] -= np.outer(q1, q1 @ Q[:, 1:])
    Q[:, 1:] /= np.linalg.norm(Q[:, 1:], axis=0)
    lam.setflags(write=False)
    Q.setflags(write=False)
    L.setflags(write=False)
    return SpectralData(eigenvalues=lam, eigenvectors=Q, laplacian=L)
