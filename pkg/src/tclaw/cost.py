"""Runtime prediction for the distinguished-point claw search.

All results are in arbitrary cost units: the model captures how work
scales with the register size, the T-count, the store capacity w, the
worker count m, and the distinguished-point rate theta.  The ``tau``
arguments are the calibration hook: pass a measured per-step (or
per-matmul) time to turn a prediction into seconds.

The theta-dependence is deliberately kept in ``runtime_refined`` rather
than substituting the closed-form optimum, which misbehaves once the
store can hold the whole space; ``optimal_theta`` minimizes numerically
instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "CostParams",
    "collision_steps",
    "runtime_general",
    "runtime_general_matmul",
    "runtime_tcount",
    "runtime_refined",
    "refined_limit",
    "optimal_theta",
]


@dataclass(frozen=True)
class CostParams:
    """Parameter bundle for cost evaluation and report grids."""

    n: int
    t: int
    w: float = float(1 << 20)
    m: float = 1.0
    theta: float = 1.0
    alpha: float = 3.0
    tau: float = 1.0

    def __post_init__(self):
        for name in ("n", "t", "w", "m", "theta", "alpha", "tau"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.theta > 1:
            raise ValueError("theta must lie in (0, 1]")

    def as_dict(self) -> dict:
        return {
            "n": self.n, "t": self.t, "w": self.w, "m": self.m,
            "theta": self.theta, "alpha": self.alpha, "tau": self.tau,
        }


def _check_positive(**kwargs) -> None:
    for name, value in kwargs.items():
        if value <= 0:
            raise ValueError(f"{name} must be positive")


def collision_steps(N: float, w: float, theta: float) -> float:
    """Expected walk steps per collision in a space of N points.

    N*theta/w steps to hit a stored trail plus 2/theta to replay and
    locate the meeting point.
    """
    _check_positive(N=N, w=w, theta=theta)
    if theta > 1:
        raise ValueError("theta must lie in (0, 1]")
    return N * theta / w + 2.0 / theta


def runtime_general(xi: float, k: float, w: float, m: float, tau: float = 1.0) -> float:
    """Wall-time estimate for a claw search over xi^ceil(k/2) by
    xi^floor(k/2) sides: xi^(ceil(k/2) + floor(k/2)/2) / (sqrt(w) * m),
    scaled by the per-step time tau.
    """
    _check_positive(xi=xi, k=k, w=w, m=m, tau=tau)
    exponent = math.ceil(k / 2) + 0.5 * math.floor(k / 2)
    return float(xi) ** exponent / math.sqrt(w) / m * tau


def runtime_general_matmul(
    xi: float, k: float, w: float, m: float, n: int, alpha: float
) -> float:
    """``runtime_general`` with the step cost spelled out: each step does
    ceil(k/2) dense matrix products at dimension 4^n, each (4^n)^alpha.
    """
    _check_positive(n=n, alpha=alpha)
    tau = (4.0**n) ** alpha * math.ceil(k / 2)
    return runtime_general(xi, k, w, m, tau)


def runtime_tcount(
    n: int, t: int, w: float, m: float, alpha: float, tau: float = 1.0
) -> float:
    """T-count search runtime in matmul units:
    2^(n*(2*alpha + 2*ceil(t/2) + floor(t/2))) * ceil(t/2) / (sqrt(w) * m).

    Equals ``runtime_general_matmul`` with both sides rounded up to the
    full 4^n Pauli count, hence an upper bound on it.
    """
    _check_positive(n=n, t=t, w=w, m=m, alpha=alpha, tau=tau)
    exponent = n * (2 * alpha + 2 * math.ceil(t / 2) + math.floor(t / 2))
    return 2.0**exponent * math.ceil(t / 2) / math.sqrt(w) / m * tau


def runtime_refined(
    n: int, t: int, w: float, m: float, theta: float, alpha: float,
    tau: float = 1.0,
) -> float:
    """Theta-aware runtime: ceil(t/2) * 4^(n*(alpha + 1 + ceil(t/2))) / (2m)
    times the per-collision cost (4^(n*floor(t/2)) * theta / w + 1/theta).
    """
    _check_positive(n=n, t=t, w=w, m=m, theta=theta, alpha=alpha, tau=tau)
    if theta > 1:
        raise ValueError("theta must lie in (0, 1]")
    lead = math.ceil(t / 2) * 4.0 ** (n * (alpha + 1 + math.ceil(t / 2))) / (2 * m)
    per = 4.0 ** (n * math.floor(t / 2)) * theta / w + 1.0 / theta
    return lead * per * tau


def refined_limit(
    n: int, t: int, m: float, theta: float, alpha: float, tau: float = 1.0
) -> float:
    """Large-w limit of ``runtime_refined``: the store absorbs the space
    and only the 1/theta replay term survives.
    """
    _check_positive(n=n, t=t, m=m, theta=theta, alpha=alpha, tau=tau)
    lead = math.ceil(t / 2) * 4.0 ** (n * (alpha + 1 + math.ceil(t / 2))) / (2 * m)
    return lead / theta * tau


def optimal_theta(n: int, t: int, w: float) -> float:
    """Distinguished-point rate minimizing ``runtime_refined``, found by
    ternary search on log(theta) over (0, 1].

    The balance point sits near sqrt(w / 4^(n*floor(t/2))) and saturates
    at 1 once the store can hold the whole space.
    """
    _check_positive(n=n, t=t, w=w)

    def value(log2_theta: float) -> float:
        return runtime_refined(n, t, w, 1.0, 2.0**log2_theta, 1.0)

    lo, hi = -80.0, 0.0
    for _ in range(200):
        third = (hi - lo) / 3
        a, b = lo + third, hi - third
        if value(a) < value(b):
            hi = b
        else:
            lo = a
    return 2.0 ** ((lo + hi) / 2)
