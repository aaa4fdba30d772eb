import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import COMPLETE_PARAMS, PATH_PARAMS, PCYCLE_PARAMS, bisect_a
from platoon_risk import (
    InvalidParameterError,
    OutOfDomainError,
    StabilityQuery,
    build_complete,
    build_p_cycle,
    build_path,
    in_stability_region,
    platoon_stable,
    solve_a,
    spectral,
)

# a sin a = 1 solved by plain bisection to 1e-14 (see conftest.bisect_a)
A_AT_ONE = 1.1141571408719302


def test_solve_a_inverts_forward_map():
    s1 = (math.pi / 4) * math.sin(math.pi / 4)
    assert solve_a(s1) == pytest.approx(math.pi / 4, abs=1e-12)


def test_solve_a_small_argument():
    assert 0 < solve_a(1e-12) < 1e-5


def test_solve_a_against_bisection():
    a = solve_a(1.0)
    assert a == pytest.approx(A_AT_ONE, abs=1e-13)
    assert a == pytest.approx(bisect_a(1.0), abs=1e-13)
    assert abs(a * math.sin(a) - 1.0) <= 1e-12


@pytest.mark.parametrize("s1", [0.0, -0.1, math.pi / 2, 2.0, float("nan")])
def test_solve_a_domain(s1):
    with pytest.raises(OutOfDomainError):
        solve_a(s1)


@pytest.mark.parametrize("a", np.linspace(0.01, math.pi / 2 - 0.01, 60))
def test_round_trip(a):
    assert abs(solve_a(a * math.sin(a)) - a) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-6, math.pi / 2 - 1e-6), st.floats(1e-6, math.pi / 2 - 1e-6))
def test_monotone(x, y):
    if x == y:
        return
    lo, hi = sorted((x, y))
    assert solve_a(lo) < solve_a(hi)


def test_region_boundaries():
    assert not in_stability_region(StabilityQuery(math.pi / 2, 0.1))
    assert not in_stability_region((0.0, 0.1))
    assert not in_stability_region((0.5, 0.0))
    a = bisect_a(0.5)
    assert not in_stability_region((0.5, a / math.tan(a) + 1e-9))


def test_region_complete_graph_point():
    # s1 = 50 * 0.02; edge of the s2 interval from the bisection oracle is ~0.547
    a = bisect_a(1.0)
    assert 0.02 < a / math.tan(a)
    assert in_stability_region(StabilityQuery(1.0, 0.02))
    assert a / math.tan(a) < math.pi / 2 < 10
    assert not in_stability_region(StabilityQuery(1.0, 10.0))


def _oracle_stable(spec, tau, beta):
    for lam in spec.eigenvalues[1:]:
        s1 = lam * tau
        if not 0 < s1 < math.pi / 2:
            return False
        a = bisect_a(s1)
        if not 0 < beta * tau < a / math.tan(a):
            return False
    return True


@pytest.mark.parametrize(
    "graph, p",
    [
        (build_complete(50), COMPLETE_PARAMS),
        (build_path(50), PATH_PARAMS),
        (build_p_cycle(50, 6), PCYCLE_PARAMS),
        (build_p_cycle(50, 10), PCYCLE_PARAMS),
    ],
)
def test_case_study_parameters_are_stable(graph, p):
    spec = spectral(graph)
    assert platoon_stable(spec, p.tau, p.beta)
    assert _oracle_stable(spec, p.tau, p.beta)


def test_large_delay_unstable():
    spec = spectral(build_path(10))
    tau = 1.01 * (math.pi / 2) / spec.eigenvalues[-1]
    assert not platoon_stable(spec, tau, 0.1)


def test_zero_mode_skipped():
    # lambda_1 = 0 would give s1 = 0, outside the open interval
    spec = spectral(build_complete(3))
    assert platoon_stable(spec, 0.01, 1.0)


@pytest.mark.parametrize("tau, beta", [(0, 1), (-1, 1), (0.1, 0), (0.1, -2)])
def test_platoon_stable_rejects_nonpositive(tau, beta):
    with pytest.raises(InvalidParameterError):
        platoon_stable(spectral(build_path(3)), tau, beta)
