"""Boundary metrics and the visual/Moran comparison machinery.

Two metrics live on the boundary of a pointed CAT(0) space:

* the visual metric: ``rho(a, b) = exp(-eps * (a|b))`` turned into a
  distance by an infimum over chains;
* Moran's metric: ``1/t`` where ``t`` is the time at which the two rays
  from the basepoint are exactly ``A`` apart.

The sandwich constants relate the two on small scales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse.csgraph import dijkstra, floyd_warshall

from .errors import (
    DomainError,
    HorizonExceeded,
    HorizonUndecidable,
    InvalidParamsError,
    NotHyperbolic,
    NotInNet,
)
from .spaces import LineEnd, Space, TreeSpace, displacement

INF = math.inf

#: admissibility threshold of the visual metric for eps' = exp(eps * delta) - 1
EPS_PRIME_MAX = math.sqrt(2.0) - 1.0

BISECTION_MAX_ITER = 200


@dataclass(frozen=True)
class MetricParams:
    epsilon: float = 0.5
    delta: float = 0.0
    A: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParamsError("epsilon must be positive")
        if not self.delta >= 0:
            raise InvalidParamsError("delta must be nonnegative")
        if not self.A > 0:
            raise InvalidParamsError("Moran scale A must be positive")
        if self.epsilon_prime > EPS_PRIME_MAX:
            raise InvalidParamsError(
                f"eps' = exp(eps*delta) - 1 = {self.epsilon_prime:.6g} exceeds sqrt(2) - 1; "
                "the chain construction is not a distance (visual metric admissibility)"
            )

    @property
    def epsilon_prime(self) -> float:
        return math.expm1(self.epsilon * self.delta)

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "delta": self.delta, "A": self.A}

    @classmethod
    def from_json(cls, doc: dict) -> "MetricParams":
        return cls(float(doc["epsilon"]), float(doc.get("delta", 0.0)), float(doc.get("A", 1.0)))


def params_for(space: Space, epsilon: float = 0.5, A: float = 1.0) -> MetricParams:
    """Parameters carrying the space's own delta (0 when it has none)."""
    return MetricParams(epsilon, space.delta or 0.0, A)


@dataclass(frozen=True)
class SandwichConstants:
    a: float
    b: float
    k: float
    B: float
    R: float
    s: float = 1.0


# ---------------------------------------------------------------------------
# Gromov products
# ---------------------------------------------------------------------------


def gromov_product(space: Space, p, q, base=None):
    """``(p|q)_base``; exact on trees."""
    if base is None:
        base = space.basepoint
    return (space.distance(p, base) + space.distance(q, base) - space.distance(p, q)) / 2


def _require_hyperbolic(space: Space) -> None:
    if space.delta is None:
        raise NotHyperbolic(f"{space.kind} carries no hyperbolicity constant")


class LimitEstimate(NamedTuple):
    value: float
    gap: float
    t: float


def ray_gromov_product(space: Space, xi, eta, t) -> float:
    """``(g_xi(t) | g_eta(t))`` from the basepoint, i.e. ``t - d/2``."""
    return t - space.distance(space.ray_eval(xi, t), space.ray_eval(eta, t)) / 2


def gromov_limit_estimate(space: Space, xi, eta, t_max: float = 64.0, tol: float = 1e-9) -> LimitEstimate:
    """Monotone limit of ``(g_xi(t) | g_eta(t))`` with its convergence gap.

    ``t`` doubles from ``t_max`` until the increment over the last doubling
    is at most ``tol`` or the horizon is reached.
    """
    _require_hyperbolic(space)
    space.check_end(xi)
    space.check_end(eta)
    if xi == eta:
        return LimitEstimate(INF, 0.0, 0.0)
    if isinstance(space, TreeSpace):
        return LimitEstimate(space.end_gromov_product(xi, eta), 0.0, 0.0)
    if isinstance(xi, LineEnd):
        return LimitEstimate(0.0, 0.0, 0.0)
    t = min(float(t_max), float(space.horizon))
    while True:
        value = float(ray_gromov_product(space, xi, eta, t))
        gap = value - float(ray_gromov_product(space, xi, eta, t / 2))
        if gap <= tol:
            return LimitEstimate(value, gap, t)
        if t >= space.horizon:
            raise HorizonExceeded(f"Gromov product not converged by the horizon (gap {gap:.3g})")
        t = min(2 * t, float(space.horizon))


def gromov_product_boundary(space: Space, xi, eta, t_max: float = 64.0, tol: float = 1e-9):
    """Boundary Gromov product ``(xi|eta)``; ``math.inf`` when ``xi == eta``.

    Trees return the exact divergence depth.
    """
    return gromov_limit_estimate(space, xi, eta, t_max, tol).value


def gromov_matrix(space: Space, net: Sequence) -> np.ndarray:
    n = len(net)
    g = np.full((n, n), INF)
    for i in range(n):
        for j in range(i + 1, n):
            g[i, j] = g[j, i] = float(gromov_product_boundary(space, net[i], net[j]))
    return g


# ---------------------------------------------------------------------------
# visual metric
# ---------------------------------------------------------------------------


def rho_eps(params: MetricParams | float, gp) -> float:
    eps = params.epsilon if isinstance(params, MetricParams) else float(params)
    if gp < 0:
        raise DomainError("Gromov products are nonnegative")
    if gp == INF:
        return 0.0
    return math.exp(-eps * float(gp))


def rho_matrix(space: Space, params: MetricParams, net: Sequence) -> np.ndarray:
    _require_hyperbolic(space)
    return np.exp(-params.epsilon * gromov_matrix(space, net))


def visual_distance_matrix(space: Space, params: MetricParams, net: Sequence) -> np.ndarray:
    """All-pairs chain infimum over the net (an upper bound for d_eps)."""
    return floyd_warshall(rho_matrix(space, params, net), directed=False)


def _index(net: Sequence, xi) -> int:
    try:
        return list(net).index(xi)
    except ValueError:
        raise NotInNet(f"{xi!r} is not in the net") from None


def visual_metric(space: Space, params: MetricParams, net: Sequence, xi, eta) -> float:
    """Chain-infimum visual distance between two net points.

    Shortest path from ``xi`` in the complete graph on the net weighted by
    ``rho_eps``.  Satisfies ``(1 - 2 eps') rho <= result <= rho``.
    """
    i, j = _index(net, xi), _index(net, eta)
    if i == j:
        return 0.0
    dist = dijkstra(rho_matrix(space, params, net), directed=False, indices=i)
    return float(dist[j])


# ---------------------------------------------------------------------------
# Moran's metric
# ---------------------------------------------------------------------------


def bisect_increasing(f, target: float, lo: float, hi: float, rtol: float,
                      max_iter: int = BISECTION_MAX_ITER) -> float:
    """Solve ``f(t) = target`` for non-decreasing ``f`` with ``f(lo) < target <= f(hi)``."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def moran_time(space: Space, A: float, xi, eta, tol: float = 1e-14) -> float:
    """Time ``t*`` with ``d(g_xi(t*), g_eta(t*)) = A``; ``math.inf`` if ``xi == eta``."""
    space.check_end(xi)
    space.check_end(eta)
    if xi == eta:
        return INF

    def disp(t: float) -> float:
        return displacement(space, xi, eta, t)

    horizon = min(space.ray_horizon(xi), space.ray_horizon(eta))
    # displacement <= 2t, so A/4 is always below the root
    lo = A / 4.0
    hi = A / 2.0
    while disp(hi) < A:
        lo = hi
        if hi >= horizon:
            raise HorizonUndecidable(
                f"displacement {disp(hi):.6g} < A={A} at the horizon {horizon}; cannot bracket"
            )
        hi = min(2.0 * hi, horizon)
    return bisect_increasing(disp, A, lo, hi, tol)


def moran_metric(space: Space, params: MetricParams | float, xi, eta, tol: float = 1e-14) -> float:
    """Moran distance ``1/t*`` between two boundary points."""
    A = params.A if isinstance(params, MetricParams) else float(params)
    t = moran_time(space, A, xi, eta, tol)
    return 0.0 if t == INF else 1.0 / t


def moran_distance_matrix(space: Space, params: MetricParams | float, net: Sequence) -> np.ndarray:
    """All-pairs Moran distances; pairs sharing a ``pair_signature`` reuse one solve."""
    n = len(net)
    d = np.zeros((n, n))
    solved: dict = {}
    for i in range(n):
        for j in range(i + 1, n):
            key = space.pair_signature(net[i], net[j])
            if key is None:
                value = moran_metric(space, params, net[i], net[j])
            else:
                value = solved.get(key)
                if value is None:
                    value = solved[key] = moran_metric(space, params, net[i], net[j])
            d[i, j] = d[j, i] = value
    return d


# closed forms used as independent oracles


def tree_moran_closed_form(gp, A: float) -> float:
    return 0.0 if gp == INF else 1.0 / (float(gp) + A / 2.0)


def plane_moran_closed_form(dtheta: float, A: float) -> float:
    return 2.0 * math.sin(dtheta / 2.0) / A


def h2_moran_closed_form(dtheta: float, A: float) -> float:
    """Solve ``cosh A = cosh^2 t - sinh^2 t cos(dtheta)`` for ``t`` directly."""
    if dtheta == 0:
        return 0.0
    sinh_t = math.sqrt((math.cosh(A) - 1.0) / (1.0 - math.cos(dtheta)))
    return 1.0 / math.asinh(sinh_t)


# ---------------------------------------------------------------------------
# comparison of the two metrics
# ---------------------------------------------------------------------------


def sandwich_constants(params: MetricParams, R: float, s: float = 1.0) -> SandwichConstants:
    if not R > 0 or not s > 0:
        raise DomainError("R and s must be positive")
    ep = params.epsilon_prime
    if ep >= 0.5:
        raise InvalidParamsError("eps' >= 1/2 makes ln(1 - 2 eps') undefined")
    eps, delta, A = params.epsilon, params.delta, params.A
    return SandwichConstants(
        a=1.0 / eps,
        b=A / 2.0,
        k=2.0 * delta + s - math.log1p(-2.0 * ep) / eps,
        B=(1.0 - 2.0 * ep) * math.exp(-eps * (R - A / 2.0 + 2.0 * delta + s)),
        R=R,
        s=s,
    )


def comparison_function(a: float, b: float):
    """``f(x) = 1 / (-a ln x + b)``, concave on ``(0, e^-2)``."""

    def f(x):
        return 1.0 / (-a * np.log(x) + b)

    return f


def comparison_bounds(consts: SandwichConstants, d_v: float) -> tuple[float, float]:
    """``(f1(d_v), f2(d_v))`` bracketing the Moran distance."""
    if not 0.0 < d_v < 1.0:
        raise DomainError("visual distance must lie in (0, 1)")
    base = -consts.a * math.log(d_v) + consts.b
    if base - consts.k <= 0:
        raise DomainError(f"d_v={d_v} is past the pole of f2")
    return 1.0 / base, 1.0 / (base - consts.k)


def estimate_R(space: Space, net: Sequence, s: float = 1.0, tol: float = 0.25,
               gp: np.ndarray | None = None) -> float:
    """Smallest grid value ``R = j * tol`` with
    ``(g_xi(R) | g_eta(R)) >= (xi|eta) - s`` for every pair of the net.

    The criterion is monotone in ``R``, so each pair only moves the current
    grid index upward.
    """
    _require_hyperbolic(space)
    if gp is None:
        gp = gromov_matrix(space, net)
    horizon = float(space.horizon)
    j = 1
    j_max = math.floor(horizon / tol)
    n = len(net)
    exact = isinstance(space, TreeSpace)

    def holds(i1: int, i2: int, jj: int) -> bool:
        R = Fraction(jj) * Fraction(tol) if exact else jj * tol
        value = ray_gromov_product(space, net[i1], net[i2], R)
        return float(value) >= gp[i1, i2] - s - 1e-12

    for i1 in range(n):
        for i2 in range(i1 + 1, n):
            target = gp[i1, i2] - s
            if target <= 0:
                continue
            if target == INF:
                raise NotInNet("net contains a repeated boundary point")
            if holds(i1, i2, j):
                continue
            if not holds(i1, i2, j_max):
                raise HorizonExceeded(f"R criterion unmet by the horizon {horizon}")
            lo, hi = j, j_max
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if holds(i1, i2, mid):
                    hi = mid
                else:
                    lo = mid
            j = hi
    return j * tol
