"""JSON scenario files driving the command-line front end.

A scenario bundles a topology, platoon parameters, a risk query and
optional simulation overrides::

    {
      "schema_version": 1,
      "topology": {"kind": "path", "n": 50, "weight": 1},
      "params": {"tau": 0.05, "beta": 4, "d": 2, "g0": 0.25},
      "risk": {"i": 25, "delta_i": 3, "c": 1, "eps": 0.2},
      "sim": {"dt": 0.0025, "replicates": 20000, "seed": 0},
      "sweep": {"field": "risk.delta_i", "values": [1, 2, 3, 4]}
    }

``kind`` is one of ``complete``, ``path``, ``pcycle`` (needs ``p``) or
``custom`` (needs ``edges`` as ``[[i, j, k], ...]`` with 1-based labels).
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import InvalidParameterError, PlatoonError
from .graph import Graph, build_complete, build_p_cycle, build_path, from_edges
from .risk import ScalarAmbiguity, SystemicLevelSet
from .simulate import SimConfig
from .statistics import PlatoonParams

__all__ = ["Scenario", "ScenarioError", "SCHEMA_VERSION", "load_scenario", "parse_scenario"]

SCHEMA_VERSION = 1
KINDS = ("complete", "path", "pcycle", "custom")


class ScenarioError(InvalidParameterError):
    """Malformed scenario; ``field`` is the dotted path of the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _get(obj: dict, key: str, path: str, required=True, default=None):
    if not isinstance(obj, dict):
        raise ScenarioError(path, "expected an object")
    if key not in obj:
        if required:
            raise ScenarioError(f"{path}.{key}" if path else key, "missing required field")
        return default
    return obj[key]


def _number(value, field, *, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(field, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioError(field, "must be finite")
    if integer and int(value) != value:
        raise ScenarioError(field, f"expected an integer, got {value!r}")
    if positive and not value > 0:
        raise ScenarioError(field, f"must be positive, got {value!r}")
    if nonneg and not value >= 0:
        raise ScenarioError(field, f"must be non-negative, got {value!r}")
    return int(value) if integer else float(value)


@dataclass(frozen=True)
class Scenario:
    raw: dict
    graph: Graph
    params: PlatoonParams
    i: int
    level: SystemicLevelSet
    ambiguity: ScalarAmbiguity
    sim: dict
    sweep: tuple[str, list] | None = None

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def d_star(self) -> float:
        return self.level.d_star(self.params.d)

    def sim_config(self, seed=None, replicates=None) -> SimConfig:
        s = self.sim
        return SimConfig(
            dt=s.get("dt", self.params.tau / 20),
            replicates=replicates if replicates is not None else s.get("replicates", 20000),
            seed=seed if seed is not None else s.get("seed", 0),
            burn_in=s.get("burn_in"),
            horizon=s.get("horizon"),
        )

    def with_value(self, field: str, value) -> "Scenario":
        """Copy of the scenario with the dotted ``field`` replaced, re-validated."""
        raw = copy.deepcopy(self.raw)
        parts = field.split(".")
        node = raw
        for key in parts[:-1]:
            if not isinstance(node.get(key), dict):
                raise ScenarioError(field, "unknown field")
            node = node[key]
        if parts[-1] not in node and parts[-1] not in _OPTIONAL_LEAVES:
            raise ScenarioError(field, "unknown field")
        node[parts[-1]] = value
        return parse_scenario(raw)


_OPTIONAL_LEAVES = {"p", "weight", "burn_in", "horizon", "replicates", "seed", "dt"}


def _parse_topology(t) -> Graph:
    kind = _get(t, "kind", "topology")
    if kind not in KINDS:
        raise ScenarioError("topology.kind", f"must be one of {KINDS}, got {kind!r}")
    n = _number(_get(t, "n", "topology"), "topology.n", integer=True)
    if n < 2:
        raise ScenarioError("topology.n", f"must be >= 2, got {n}")
    k = _number(_get(t, "weight", "topology", required=False, default=1.0), "topology.weight", positive=True)
    try:
        if kind == "complete":
            return build_complete(n, k)
        if kind == "path":
            return build_path(n, k)
        if kind == "pcycle":
            p = _number(_get(t, "p", "topology"), "topology.p", integer=True)
            return build_p_cycle(n, p, k)
        edges = _get(t, "edges", "topology")
        if not isinstance(edges, list):
            raise ScenarioError("topology.edges", "expected a list of [i, j, k] triples")
        return from_edges(n, edges)
    except ScenarioError:
        raise
    except PlatoonError as exc:
        raise ScenarioError("topology", str(exc)) from None


def parse_scenario(raw: dict[str, Any]) -> Scenario:
    """Validate a decoded scenario object; every error names its field path."""
    if not isinstance(raw, dict):
        raise ScenarioError("<root>", "expected a JSON object")
    version = _get(raw, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise ScenarioError("schema_version", f"unsupported version {version!r} (expected {SCHEMA_VERSION})")
    graph = _parse_topology(_get(raw, "topology", ""))

    pr = _get(raw, "params", "")
    vals = {k: _number(_get(pr, k, "params"), f"params.{k}", positive=True) for k in ("tau", "beta", "d", "g0")}
    params = PlatoonParams(vals["tau"], vals["beta"], vals["d"], vals["g0"])

    rk = _get(raw, "risk", "")
    i = _number(_get(rk, "i", "risk"), "risk.i", integer=True)
    if not 1 <= i <= graph.n - 1:
        raise ScenarioError("risk.i", f"pair label must lie in 1..{graph.n - 1}, got {i}")
    delta = _number(_get(rk, "delta_i", "risk"), "risk.delta_i", nonneg=True)
    c = _number(_get(rk, "c", "risk", required=False, default=1.0), "risk.c", positive=True)
    eps = _number(_get(rk, "eps", "risk"), "risk.eps", nonneg=True)
    if not eps < 1:
        raise ScenarioError("risk.eps", f"must be < 1, got {eps}")

    sim = _get(raw, "sim", "", required=False, default={}) or {}
    if not isinstance(sim, dict):
        raise ScenarioError("sim", "expected an object")
    clean = {}
    for key, kw in (
        ("dt", dict(positive=True)),
        ("burn_in", dict(nonneg=True)),
        ("horizon", dict(positive=True)),
        ("replicates", dict(positive=True, integer=True)),
        ("seed", dict(nonneg=True, integer=True)),
    ):
        if sim.get(key) is not None:
            clean[key] = _number(sim[key], f"sim.{key}", **kw)
    unknown = set(sim) - {"dt", "burn_in", "horizon", "replicates", "seed"}
    if unknown:
        raise ScenarioError(f"sim.{sorted(unknown)[0]}", "unknown field")

    sweep = None
    sw = raw.get("sweep")
    if sw is not None:
        field = _get(sw, "field", "sweep")
        values = _get(sw, "values", "sweep")
        if not isinstance(field, str) or not isinstance(values, list) or not values:
            raise ScenarioError("sweep", "needs a string 'field' and a non-empty list 'values'")
        sweep = (field, values)

    return Scenario(
        raw=raw,
        graph=graph,
        params=params,
        i=i,
        level=SystemicLevelSet(delta, c),
        ambiguity=ScalarAmbiguity(params.g, eps),
        sim=clean,
        sweep=sweep,
    )


def load_scenario(path: str | Path) -> Scenario:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError("<root>", f"invalid JSON: {exc}") from None
    except OSError as exc:
        raise ScenarioError("<file>", str(exc)) from None
    return parse_scenario(raw)
