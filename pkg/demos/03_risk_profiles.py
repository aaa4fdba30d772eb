"""
Cascading risk profiles across the platoon
==========================================

Pair 25 of a fifty-vehicle platoon falls below ``d* = d / (delta + c)``. How
much closer does every other pair get, in the worst case over a band of
noise intensities ``(1 +/- eps) g0^2``?

Prints the same numbers the ``risk-profile`` command writes as CSV.
"""

import numpy as np

from platoon_risk import (
    PlatoonParams,
    ScalarAmbiguity,
    SystemicLevelSet,
    build_complete,
    build_p_cycle,
    build_path,
    distance_covariance,
    risk_profile,
    spectral,
)

cases = {
    "complete": (build_complete(50), PlatoonParams(0.02, 1.0, 2.0, 10.0)),
    "path": (build_path(50), PlatoonParams(0.05, 4.0, 2.0, 0.25)),
    "6-cycle": (build_p_cycle(50, 6), PlatoonParams(0.01, 2.0, 2.0, 4.0)),
    "10-cycle": (build_p_cycle(50, 10), PlatoonParams(0.01, 2.0, 2.0, 4.0)),
}
stats = {name: distance_covariance(spectral(g), p) for name, (g, p) in cases.items()}


def show(name, result, width=6):
    r = result.as_dict()
    i = result.i
    near = [j for j in range(i - width, i + width + 1) if j in r]
    print(f"  {name:9s} " + " ".join(f"{r[j]:+.3f}" for j in near))


# Severity of the soft failure.
for delta in (1, 2, 3, 4):
    print(f"delta = {delta}   (pairs 19..31, pair 25 omitted)")
    for name, s in stats.items():
        show(name, risk_profile(s, 25, SystemicLevelSet(delta), ScalarAmbiguity(s.params.g, 0.2)))

# Complete graph: only the two neighbours move, and they move *apart*.
# Their correlation is -1/2, so a short gap 25 lengthens gaps 24 and 26 and the
# risk is negative.
r = risk_profile(stats["complete"], 25, SystemicLevelSet(3), ScalarAmbiguity(10.0, 0.2))
print("complete graph, non-zero entries:", {j: round(float(v), 4) for j, v in r.as_dict().items() if v != 0})

# Width of the ambiguity band.
for eps in (0.0, 0.1, 0.2, 0.4):
    s = stats["path"]
    r = risk_profile(s, 25, SystemicLevelSet(3), ScalarAmbiguity(s.params.g, eps))
    print(f"path, eps = {eps:.1f}: risk of pair 24 = {r.as_dict()[24]:.4f}, lower bound {r.lower_bound:+.4f}")

# Where the failure happens.
for i in (1, 25, 49):
    s = stats["path"]
    r = risk_profile(s, i, SystemicLevelSet(3), ScalarAmbiguity(s.params.g, 0.2)).as_dict()
    nb = [j for j in (i - 1, i + 1) if j in r]
    print(f"path, failing pair {i:2d}: neighbour risk {[round(float(r[j]), 4) for j in nb]}")

# Wider p-cycles approach the complete-graph profile (all three with the cycle parameters).
pc = cases["6-cycle"][1]
ref = risk_profile(distance_covariance(spectral(build_complete(50)), pc), 25, SystemicLevelSet(3),
                   ScalarAmbiguity(pc.g, 0.2)).risks
for name in ("6-cycle", "10-cycle"):
    s = stats[name]
    prof = risk_profile(s, 25, SystemicLevelSet(3), ScalarAmbiguity(s.params.g, 0.2)).risks
    print(f"{name}: L2 distance to the complete-graph profile = {np.linalg.norm(prof - ref):.4f}")
