"""
Which delays can a platoon tolerate?
====================================

Every non-zero Laplacian eigenvalue ``lam`` of the communication graph gives
one scalar delayed oscillator. It settles iff the point ``(lam*tau, beta*tau)``
sits below the curve ``s2 = a / tan(a)`` with ``a sin(a) = s1``.
"""


from platoon_risk import (
    build_complete,
    build_p_cycle,
    build_path,
    mode_table,
    platoon_stable,
    spectral,
    stability_margin,
)

# The admissible s2 interval shrinks as s1 grows and closes at s1 = pi/2.
for s1 in (0.01, 0.1, 0.5, 1.0, 1.4, 1.55):
    print(f"s1 = {s1:5.2f}   s2 must stay below {stability_margin(s1):.5f}")

# Four fifty-vehicle platoons and the gains/delays used throughout the demos.
cases = {
    "complete": (build_complete(50), 0.02, 1.0),
    "path": (build_path(50), 0.05, 4.0),
    "6-cycle": (build_p_cycle(50, 6), 0.01, 2.0),
    "10-cycle": (build_p_cycle(50, 10), 0.01, 2.0),
}

for name, (graph, tau, beta) in cases.items():
    spec = spectral(graph)
    lam_max = spec.eigenvalues[-1]
    print(f"{name:9s} lam_2 = {spec.algebraic_connectivity:8.4f}  lam_max = {lam_max:7.3f}  "
          f"lam_max*tau = {lam_max * tau:.3f}  stable: {platoon_stable(spec, tau, beta)}")

# The stiffest mode decides. A hundredfold longer delay breaks the complete graph:
spec = spectral(cases["complete"][0])
print("complete graph, tau = 2.0 :", platoon_stable(spec, 2.0, 1.0))

# Per-mode detail for a small path graph.
for row in mode_table(spectral(build_path(5)), 0.05, 4.0):
    print(row)

# Maximum delay for each topology, found by bisection on tau.
for name, (graph, _, beta) in cases.items():
    spec = spectral(graph)
    lo, hi = 0.0, 10.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if platoon_stable(spec, mid, beta) else (lo, mid)
    print(f"{name:9s} tolerates delays up to tau = {lo:.5f} s  (beta = {beta})")
