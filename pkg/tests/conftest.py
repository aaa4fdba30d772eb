import math
from collections import deque

import numpy as np
import pytest

from platoon_risk import PlatoonParams, build_complete, build_p_cycle, build_path

# Case-study parameter sets (n = 50, d = 2).
COMPLETE_PARAMS = PlatoonParams(tau=0.02, beta=1.0, d=2.0, g=10.0)
PATH_PARAMS = PlatoonParams(tau=0.05, beta=4.0, d=2.0, g=0.25)
PCYCLE_PARAMS = PlatoonParams(tau=0.01, beta=2.0, d=2.0, g=4.0)


def trapezoid_f(s1, s2, R=400.0, h=1e-4):
    """Brute-force oracle for f(s1, s2): composite trapezoid on [0, R] plus the r^-4 tail."""
    r = np.linspace(0.0, R, int(round(R / h)) + 1)
    y = 1.0 / ((s1 * s2 - r * r * np.cos(r)) ** 2 + r * r * (s1 - r * np.sin(r)) ** 2)
    return 2.0 * (np.trapezoid(y, r) + 1.0 / (3.0 * R**3))


def bisect_a(s1, tol=1e-14):
    """Plain bisection for a sin(a) = s1 on [0, pi/2]."""
    lo, hi = 0.0, 0.5 * math.pi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid * math.sin(mid) < s1:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bfs_connected(weights):
    n = len(weights)
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in range(n):
            if weights[u][v] > 0 and v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == n


@pytest.fixture(params=["path", "complete", "cycle"])
def small_case(request):
    """n = 5 topologies paired with their case-study parameters."""
    return {
        "path": (build_path(5), PATH_PARAMS),
        "complete": (build_complete(5), COMPLETE_PARAMS),
        "cycle": (build_p_cycle(5, 1), PCYCLE_PARAMS),
    }[request.param]
