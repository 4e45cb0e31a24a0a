"""Experiment campaigns and the verification suite.

Every campaign is a deterministic function of its inputs and an explicit
``numpy.random.Generator``; the suite derives one generator per check from
the configured seed so that checks do not perturb each other's samples.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from .boundary import (
    MetricParams,
    comparison_bounds,
    comparison_function,
    estimate_R,
    gromov_matrix,
    gromov_product_boundary,
    h2_moran_closed_form,
    moran_distance_matrix,
    moran_metric,
    plane_moran_closed_form,
    ray_gromov_product,
    rho_eps,
    rho_matrix,
    sandwich_constants,
    tree_moran_closed_form,
    visual_distance_matrix,
)
from .buildings import (
    Building,
    Segment,
    apartment_cover,
    apartment_retraction,
    build_building,
    component_bound_check,
    default_bounds,
    pullback_bounds_check,
    pullback_cover,
    pullback_seeding,
)
from .covers import (
    Cover,
    CoverElement,
    brute_force_order,
    cdim_profile,
    capacity_transfer_check,
    cover_stats,
    cylinder_groups,
    greedy_colored_cover,
)
from .errors import CatboundError, DomainError, InvalidParamsError, InvalidSpecError
from .spaces import (
    AngleEnd,
    HyperbolicPlane,
    LineEnd,
    LineSpace,
    PlaneSpace,
    ProductEnd,
    ProductSpace,
    SpaceSpec,
    TreeEnd,
    TreeSpace,
    angle_gap,
    build_space,
    product_spec,
    tree_spec,
)

SCHEMA_VERSION = 1
H2_DELTA = math.log(3.0)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    seed: int = 0
    A: float = 1.0
    s: float = 1.0
    epsilon_tree: float = 0.5
    epsilon_h2: float = 0.3
    tree_branching: int = 3
    tree_depth: int = 8
    tree_net_depth: int = 5
    h2_net_size: int = 64
    h2_clusters: int = 8
    h2_cluster_size: int = 5
    h2_cluster_step: float = 2e-5
    plane_net_size: int = 360
    product_branching: int = 2
    product_depth: int = 5
    product_net: tuple[int, int, int] = (2, 2, 8)
    tree_scales: tuple[float, ...] = (0.45, 0.35, 0.25)
    circle_scales: tuple[float, ...] = (0.3, 0.2, 0.1)
    product_scales: tuple[float, ...] = (0.3, 0.25, 0.2)
    product_max_bound: float = 6.0
    pullback_c: float = 2.0
    pullback_L_tree: tuple[float, ...] = (2.0, 1.0, 0.5)
    pullback_L_product: tuple[float, ...] = (1.0, 0.75, 0.5)
    annulus_width: float = 10.0
    annulus_D_plane: tuple[float, ...] = (10.0, 20.0, 40.0, 80.0, 100.0)
    annulus_D_tree: tuple[float, ...] = (10.0, 20.0, 40.0, 80.0)
    annulus_c: float = 0.5
    n_samples: int = 1000
    n_segments: int = 50
    n_transfer_covers: int = 20
    n_triples: int = 200
    tolerance: float = 1e-9

    def validate(self) -> None:
        if self.A <= 0 or self.s <= 0:
            raise InvalidSpecError("A and s must be positive")
        if self.tree_depth < 2 or self.tree_net_depth < 1:
            raise InvalidSpecError("tree depths are too small")
        if self.tree_net_depth > self.tree_depth:
            raise InvalidSpecError("tree net depth exceeds the truncation depth")
        if not 0 < self.pullback_c or self.pullback_c <= 1:
            raise InvalidSpecError("pullback_c must exceed 1")
        for name in ("tree_scales", "circle_scales", "product_scales"):
            values = list(getattr(self, name))
            if values != sorted(values, reverse=True):
                raise InvalidSpecError(f"{name} must be descending")
        for name in ("annulus_D_plane", "annulus_D_tree"):
            values = list(getattr(self, name))
            if not values or values != sorted(values) or values[0] <= 0:
                raise InvalidSpecError(f"{name} must be positive and ascending")
        # raises InvalidParamsError when the visual metric is not defined
        self.tree_params()
        self.h2_params()

    def tree_params(self) -> MetricParams:
        return MetricParams(self.epsilon_tree, 0.0, self.A)

    def h2_params(self) -> MetricParams:
        try:
            return MetricParams(self.epsilon_h2, H2_DELTA, self.A)
        except InvalidParamsError as exc:
            raise InvalidParamsError(
                f"visual metric sandwich needs epsilon' <= sqrt(2) - 1 on H2: {exc}") from None

    def to_json(self) -> dict[str, Any]:
        doc = dataclasses.asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in doc.items()}

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "ExperimentConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - set(known) - {"schema_version"})
        if unknown:
            raise InvalidSpecError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = {}
        for name, value in doc.items():
            if name == "schema_version":
                continue
            default = getattr(cls(), name)
            if isinstance(default, tuple):
                value = tuple(value)
            elif isinstance(default, bool) or not isinstance(default, (int, float)):
                pass
            elif isinstance(default, int) and not isinstance(value, int):
                raise InvalidSpecError(f"config key {name} must be an integer")
            kwargs[name] = value
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class Check:
    name: str
    anchor: str
    status: str
    measured: dict = field(default_factory=dict)
    bound: dict = field(default_factory=dict)
    tolerance: float | None = None
    runtime: float | None = None
    message: str = ""

    def to_json(self, include_runtime: bool = False) -> dict:
        doc = {
            "name": self.name,
            "anchor": self.anchor,
            "status": self.status,
            "measured": _jsonable(self.measured),
            "bound": _jsonable(self.bound),
            "tolerance": self.tolerance,
            "message": self.message,
        }
        if include_runtime:
            doc["runtime"] = self.runtime
        return doc


@dataclass
class VerificationReport:
    seed: int
    checks: list[Check]
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.status == "pass" for c in self.checks)

    @property
    def counts(self) -> dict[str, int]:
        out = {"pass": 0, "fail": 0, "skipped": 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    def to_json(self, include_runtime: bool = False) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "seed": self.seed,
            "passed": self.passed,
            "counts": self.counts,
            "config": self.config,
            "checks": [c.to_json(include_runtime) for c in self.checks],
        }

    def dumps(self, include_runtime: bool = False) -> str:
        return json.dumps(self.to_json(include_runtime), sort_keys=True, indent=2)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, Fraction)):
        value = float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


# ---------------------------------------------------------------------------
# random sampling
# ---------------------------------------------------------------------------


def random_end(space, rng: np.random.Generator, max_preperiod: int = 6):
    """A boundary point drawn from a simple distribution on ``space``."""
    if isinstance(space, TreeSpace):
        b = space.branching
        pre = tuple(int(x) for x in rng.integers(0, b, size=int(rng.integers(0, max_preperiod + 1))))
        period = tuple(int(x) for x in rng.integers(0, b, size=int(rng.integers(1, 4))))
        return TreeEnd(pre, period)
    if isinstance(space, (PlaneSpace, HyperbolicPlane)):
        return AngleEnd(float(rng.uniform(0.0, 2.0 * math.pi)))
    if isinstance(space, ProductSpace):
        first = random_end(space.factors[0], rng, max_preperiod)
        second = random_end(space.factors[1], rng, max_preperiod)
        return ProductEnd(first, second, float(rng.uniform(0.05, math.pi / 2 - 0.05)))
    return LineEnd(1 if rng.integers(0, 2) else -1)


def random_distinct_ends(space, rng: np.random.Generator, k: int) -> list:
    """``k`` pairwise distinct boundary points; coincident draws are resampled."""
    if isinstance(space, LineSpace) and k > 2:
        raise DomainError(f"the line has two ends, cannot draw {k} distinct ones")
    while True:
        ends = [random_end(space, rng) for _ in range(k)]
        if len(set(ends)) == k:
            return ends


def clustered_angle_net(clusters: int, size: int, step: float) -> list[AngleEnd]:
    """``clusters`` equally spaced groups of ``size`` angles ``step`` apart.

    Clusters give pairs with large Gromov products, which are the only
    pairs small enough in the visual metric to enter the comparison range.
    """
    out = []
    for c in range(clusters):
        base = 2.0 * math.pi * (c + 0.5) / clusters
        out.extend(AngleEnd(base + j * step) for j in range(size))
    return out


# ---------------------------------------------------------------------------
# metric campaigns
# ---------------------------------------------------------------------------


def _pairs(n: int):
    return zip(*np.triu_indices(n, k=1))


@dataclass(frozen=True)
class VisualSandwichResult:
    pairs: int
    lower_violation: float
    upper_violation: float
    max_ratio_gap: float

    def passed(self, tol: float) -> bool:
        return self.lower_violation <= tol and self.upper_violation <= tol


def visual_sandwich_campaign(space, params: MetricParams, net: Sequence) -> VisualSandwichResult:
    """Compare the chain infimum with ``(1 - 2 eps') rho <= d_v <= rho``."""
    rho = rho_matrix(space, params, net)
    dv = visual_distance_matrix(space, params, net)
    factor = 1.0 - 2.0 * params.epsilon_prime
    lower = upper = gap = 0.0
    for i, j in _pairs(len(net)):
        lower = max(lower, factor * rho[i, j] - dv[i, j])
        upper = max(upper, dv[i, j] - rho[i, j])
        gap = max(gap, abs(dv[i, j] - rho[i, j]))
    return VisualSandwichResult(len(net) * (len(net) - 1) // 2, float(lower), float(upper), float(gap))


def moran_oracle_campaign(space, A: float, pairs: Sequence[tuple]) -> float:
    """Largest gap between bisection and the closed form over ``pairs``."""
    worst = 0.0
    for xi, eta in pairs:
        got = moran_metric(space, A, xi, eta)
        if isinstance(space, TreeSpace):
            want = tree_moran_closed_form(space.end_gromov_product(xi, eta), A)
        elif isinstance(space, PlaneSpace):
            want = plane_moran_closed_form(angle_gap(xi.theta, eta.theta), A)
        elif isinstance(space, HyperbolicPlane):
            want = h2_moran_closed_form(angle_gap(xi.theta, eta.theta), A)
        else:
            raise InvalidSpecError(f"no closed form for {space.kind}")
        worst = max(worst, abs(got - want))
    return worst


def moran_axioms_campaign(space, A: float, triples: Sequence[tuple]) -> dict:
    sym = tri = 0.0
    for x, y, z in triples:
        dxy = moran_metric(space, A, x, y)
        sym = max(sym, abs(dxy - moran_metric(space, A, y, x)))
        tri = max(tri, dxy - moran_metric(space, A, x, z) - moran_metric(space, A, z, y))
    return {"symmetry": sym, "triangle_excess": max(tri, 0.0)}


@dataclass(frozen=True)
class SandwichResult:
    R: float
    B: float
    k: float
    pairs_in_range: int
    lower_violation: float
    upper_violation: float
    equality_error: float

    def passed(self, tol: float) -> bool:
        return self.pairs_in_range > 0 and self.lower_violation <= tol and self.upper_violation <= tol

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def sandwich_campaign(space, params: MetricParams, net: Sequence, R: float,
                      s: float = 1.0) -> SandwichResult:
    """Check ``f1(d_v) <= d_M <= f2(d_v)`` for all pairs with ``d_v <= B``.

    ``equality_error`` is the largest ``|d_M - f1(d_v)|`` over those pairs;
    it vanishes on trees.  Violations are reported as nonnegative excesses.
    """
    consts = sandwich_constants(params, R, s)
    dv = visual_distance_matrix(space, params, net)
    dm = moran_distance_matrix(space, params, net)
    count = 0
    lower = upper = equality = 0.0
    for i, j in _pairs(len(net)):
        if not 0.0 < dv[i, j] <= consts.B:
            continue
        f1, f2 = comparison_bounds(consts, float(dv[i, j]))
        count += 1
        lower = max(lower, f1 - dm[i, j])
        upper = max(upper, dm[i, j] - f2)
        equality = max(equality, abs(dm[i, j] - f1))
    return SandwichResult(R, consts.B, consts.k, count, float(lower), float(upper), float(equality))


def lemma_r_campaign(space, net: Sequence, R: float, delta: float, s: float = 1.0,
                     steps: int = 8, step: float = 0.25) -> dict:
    """``(xi|eta) - 2 delta - s <= (g_xi(R1) | g_eta(R1)) <= (xi|eta)`` for grid ``R1 >= R``.

    Returns the largest excess on each side.
    """
    gp = gromov_matrix(space, net)
    low = high = -math.inf
    for i, j in _pairs(len(net)):
        for m in range(steps):
            R1 = R + m * step
            value = R1 - space.ray_distance(net[i], R1, net[j], R1) / 2.0
            low = max(low, (gp[i, j] - 2 * delta - s) - value)
            high = max(high, value - gp[i, j])
    return {"lower_excess": low, "upper_excess": high}


def concavity_campaign(a: float, b: float, grid: int = 10_000) -> dict:
    """Numerical concavity of ``1/(-a ln x + b)`` on ``(1e-6, e^-2)``.

    Second derivatives use a relative central-difference step; the two
    inequalities ``f(cx) >= c f(x)`` and ``f(cx) + f((1-c)x) >= f(x)`` are
    checked for ``c`` in ``0.1 .. 0.9``.
    """
    f = comparison_function(a, b)
    x = np.geomspace(1e-6, math.exp(-2.0), grid + 2)[1:-1]
    h = 1e-4 * x
    second = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    worst_scaling = worst_split = -math.inf
    for c in np.round(np.arange(1, 10) / 10.0, 1):
        worst_scaling = max(worst_scaling, float(np.max(c * f(x) - f(c * x))))
        worst_split = max(worst_split, float(np.max(f(x) - f(c * x) - f((1 - c) * x))))
    return {
        "max_second_derivative": float(second.max()),
        "scaling_excess": worst_scaling,
        "split_excess": worst_split,
    }


def ray_ratio_campaign(space, rng: np.random.Generator, n: int) -> dict:
    """``d(g(s), g'(s)) <= (s/t) d(g(t), g'(t))`` for random rays and times."""
    horizon = float(space.horizon)
    t_cap = min(horizon, 20.0)
    excess = -math.inf
    equality = 0.0
    for _ in range(n):
        xi, eta = random_distinct_ends(space, rng, 2)
        cap = min(t_cap, space.ray_horizon(xi), space.ray_horizon(eta))
        t = float(rng.uniform(0.0, cap))
        s = float(rng.uniform(0.0, t))
        near = space.ray_distance(xi, s, eta, s)
        far = space.ray_distance(xi, t, eta, t)
        bound = (s / t) * far if t > 0 else 0.0
        excess = max(excess, near - bound)
        equality = max(equality, abs(near - bound))
    return {"excess": excess, "equality_error": equality}


def quasisymmetry_distortion(space, A: float, A_prime: float, n_triples: int,
                             seed: int | np.random.Generator = 0) -> list[tuple[float, float]]:
    """Distance-ratio pairs ``(d_A(x,a)/d_A(x,b), d_A'(x,a)/d_A'(x,b))``.

    Sampling data only; no verdict is attached.
    """
    if not A > 0 or not A_prime > 0:
        raise InvalidSpecError("A and A' must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    rows = []
    for _ in range(n_triples):
        x, a, b = random_distinct_ends(space, rng, 3)
        r = moran_metric(space, A, x, a) / moran_metric(space, A, x, b)
        r2 = moran_metric(space, A_prime, x, a) / moran_metric(space, A_prime, x, b)
        rows.append((r, r2))
    return rows


# ---------------------------------------------------------------------------
# cover campaigns
# ---------------------------------------------------------------------------


def _cover_from_groups(net, groups, kind: str, params: MetricParams, tag: str) -> Cover:
    elements = tuple(CoverElement(frozenset(g), 0, f"{tag}{i}") for i, g in enumerate(groups))
    return Cover(elements, tuple(net), kind, params)


def _transfer_report(space, cover: Cover, params: MetricParams, R: float, s: float, cache: dict):
    consts = sandwich_constants(params, R, s)
    key = (id(space), len(cover.net), cover.net[-1])
    dv = cache.get(key + ("v", params.epsilon))
    if dv is None:
        dv = cache[key + ("v", params.epsilon)] = visual_distance_matrix(space, params, cover.net)
    dm = cache.get(key + ("m", params.A))
    if dm is None:
        dm = cache[key + ("m", params.A)] = moran_distance_matrix(space, params, cover.net)
    stats_v = cover_stats(space, cover.with_metric("visual"), dv)
    stats_m = cover_stats(space, cover.with_metric("moran"), dm)
    return capacity_transfer_check(stats_v, stats_m, consts)


def transfer_campaign(cfg: ExperimentConfig, n_covers: int | None = None) -> list[tuple[str, Any]]:
    """Generated tree and H2 covers that meet the transfer preconditions.

    Tree candidates are depth-``k`` cylinder covers of a ternary net under
    several ``(epsilon, A)``; H2 candidates are clustered nets covered by
    whole clusters or by clusters split in two, under several ``A``.
    Candidates failing the preconditions are discarded; the first
    ``n_covers / 2`` of each family are kept.
    """
    n_covers = cfg.n_transfer_covers if n_covers is None else n_covers
    n_tree = n_covers // 2
    n_h2 = n_covers - n_tree
    out: list[tuple[str, Any]] = []
    cache: dict = {}

    tree = build_space(tree_spec(cfg.tree_branching, cfg.tree_depth))
    net = tree.boundary_net(cfg.tree_net_depth)
    R_tree = estimate_R(tree, net, cfg.s)
    for eps in (0.5, 0.75, 1.0, 1.25, 1.5):
        for A in (0.5, 1.0, 2.0):
            for k in range(cfg.tree_net_depth - 1, 0, -1):
                if sum(1 for label, _ in out if label.startswith("tree")) >= n_tree:
                    break
                params = MetricParams(eps, 0.0, A)
                cover = _cover_from_groups(net, cylinder_groups(net, k), "visual", params, "cyl")
                rep = _transfer_report(tree, cover, params, R_tree, cfg.s, cache)
                if rep.preconditions_met:
                    out.append((f"tree eps={eps} A={A} k={k}", rep))

    h2 = build_space(SpaceSpec("hyperbolic_plane", delta=H2_DELTA))
    R_h2 = estimate_R(h2, h2.boundary_net(cfg.h2_net_size), cfg.s)
    size = cfg.h2_cluster_size
    splits = {"whole": [list(range(size))], "split": [list(range(size // 2 + 1)),
                                                      list(range(size // 2 + 1, size))]}
    found = 0
    for step in (cfg.h2_cluster_step, cfg.h2_cluster_step / 2):
        cnet = clustered_angle_net(cfg.h2_clusters, size, step)
        for A in (0.5, 1.0, 2.0, 4.0):
            for name, parts in splits.items():
                if found >= n_h2:
                    break
                params = MetricParams(cfg.epsilon_h2, H2_DELTA, A)
                groups = [[c * size + j for j in part] for c in range(cfg.h2_clusters) for part in parts]
                cover = _cover_from_groups(cnet, groups, "visual", params, name)
                rep = _transfer_report(h2, cover, params, R_h2, cfg.s, cache)
                if rep.preconditions_met:
                    out.append((f"h2 step={step:g} A={A} {name}", rep))
                    found += 1
    return out


def product_space(cfg: ExperimentConfig, depth: int | None = None):
    depth = cfg.product_depth if depth is None else depth
    f = tree_spec(cfg.product_branching, depth)
    return build_space(product_spec(f, f))


#: factor truncation used whenever Moran distances on product rays are solved;
#: rays close to a factor axis need long times to separate
PRODUCT_RAY_DEPTH = 40


def cdim_campaign(cfg: ExperimentConfig) -> dict[str, Any]:
    """Capacity-dimension witness profiles for the tree, circle and product."""
    out = {}
    tree = build_space(tree_spec(cfg.tree_branching, cfg.tree_depth))
    params = cfg.tree_params()
    tnet = tree.boundary_net(cfg.tree_net_depth)
    out["tree"] = cdim_profile(tree, "moran", params, tnet, cfg.tree_scales, 3)

    plane = build_space(SpaceSpec("plane"))
    pnet = plane.boundary_net(cfg.plane_net_size)
    out["circle"] = cdim_profile(plane, "moran", MetricParams(0.5, 0.0, cfg.A), pnet, cfg.circle_scales, 3)

    prod = product_space(cfg, PRODUCT_RAY_DEPTH)
    b = build_building(prod)
    qnet = prod.boundary_net(cfg.product_net)
    pparams = MetricParams(0.5, 0.0, cfg.A)
    out["product"] = cdim_profile(prod, "moran", pparams, qnet, cfg.product_scales, 3,
                                  max_bound=cfg.product_max_bound,
                                  seeding=pullback_seeding(b, qnet, cfg.A, 2, cfg.pullback_c))
    return out


def tree_refinement_campaign(cfg: ExperimentConfig) -> dict[str, Any]:
    """Families needed on a net and on its one-level refinement."""
    tree = build_space(tree_spec(cfg.tree_branching, cfg.tree_depth))
    params = cfg.tree_params()
    coarse = tree.boundary_net(cfg.tree_net_depth - 1)
    fine = tree.boundary_net(cfg.tree_net_depth)
    coarse_spacing = 1.0 / (cfg.tree_net_depth - 2 + cfg.A / 2) if cfg.tree_net_depth > 2 else math.inf
    scales = [x for x in cfg.tree_scales if x > coarse_spacing] or [max(cfg.tree_scales)]
    p1 = cdim_profile(tree, "moran", params, coarse, scales, 3)
    p2 = cdim_profile(tree, "moran", params, fine, scales, 3)
    return {"scales": scales, "coarse": p1.families, "fine": p2.families}


def pullback_campaign(building: Building, net: Sequence, Ls: Sequence[float], c: float, A: float,
                      n_colors: int = 2, moran_space=None) -> list:
    """Pull back an apartment cover at each ``L`` and check every bound.

    ``moran_space`` (default: the building's own space) supplies the rays on
    which Moran distances are solved; it must have the same factor trees up
    to truncation.
    """
    moran_space = building.space if moran_space is None else moran_space
    params = MetricParams(0.5, 0.0, A)
    moran = moran_distance_matrix(moran_space, params, net)
    bounds = default_bounds(building, c, A)
    reports = []
    for L in Ls:
        cover = apartment_cover(building, net, L, A, n_colors, params)
        pulled = pullback_cover(building, cover, L, c, A, net)
        reports.append(pullback_bounds_check(building, pulled, L, c, A, bounds,
                                             families_in=cover.n_colors, moran=moran))
    return reports


def component_campaign(rng: np.random.Generator, n: int, resolution: Fraction = Fraction(1, 4),
                       max_extent: int = 5) -> list[dict]:
    """Random segments on random trees against the ``2R + 2D + M`` bound.

    Branching is drawn from 2..4 and truncation depth from 2..8; segment
    endpoints are drawn from ``[-m, m]`` with ``m = min(depth, max_extent)``
    and rounded to the sampling grid.
    """
    rows = []
    for _ in range(n):
        b = int(rng.integers(2, 5))
        depth = int(rng.integers(2, 9))
        tree = build_space(tree_spec(b, depth))
        m = min(depth, max_extent)
        lo, hi = sorted(float(x) for x in rng.uniform(-m, m, size=2))
        lo = math.floor(lo / float(resolution)) * float(resolution)
        hi = max(math.ceil(hi / float(resolution)) * float(resolution), lo + float(resolution))
        rep = component_bound_check(build_building(tree), Segment(lo, hi), resolution)
        rows.append({
            "branching": b, "depth": depth, "segment": [lo, hi], "R": rep.region_diameter,
            "D": rep.D, "M": rep.M, "components": len(rep.diameters),
            "max_diameter": max(rep.diameters, default=0.0), "bound": rep.bound,
            "passed": rep.passed,
        })
    return rows


def retraction_campaign(building: Building, rng: np.random.Generator, n: int) -> dict:
    """The retraction keeps the distance to the basepoint and never stretches."""
    space = building.space
    p = space.basepoint
    radial = stretch = 0.0
    horizon = min(float(t.horizon) for t in building.trees)
    for _ in range(n):
        xi, eta = random_distinct_ends(space, rng, 2)
        x = space.ray_eval(xi, float(rng.uniform(0, horizon * 0.9)))
        y = space.ray_eval(eta, float(rng.uniform(0, horizon * 0.9)))
        rx, ry = apartment_retraction(building, x), apartment_retraction(building, y)
        radial = max(radial, abs(float(space.distance(rx, p)) - float(space.distance(x, p))))
        stretch = max(stretch, float(space.distance(rx, ry)) - float(space.distance(x, y)))
    return {"radial_error": radial, "stretch": max(stretch, 0.0)}


# ---------------------------------------------------------------------------
# annulus experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnulusRow:
    """One radius ``D`` of the annulus experiment.

    ``mesh`` is the largest element diameter over the annulus,
    ``lebesgue`` is measured between points of the inner sphere (where a
    Moran distance of ``1/D`` means a separation of ``A``) and ``M`` is the
    largest element diameter on the outer sphere.
    """

    D: float
    mesh: float
    lebesgue: float
    M: float
    elements: int
    boundary_mesh: float
    boundary_lebesgue: float

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _grid_diameter(points: np.ndarray) -> float:
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt((diff ** 2).sum(-1)).max())


def plane_annulus_row(A: float, width: float, D: float, c: float = 0.5, grid: int = 32) -> AnnulusRow:
    """Cones over ``n`` overlapping circle arcs, cut by ``D <= |x| <= D + width``.

    Arcs have angular width ``2 pi / n + 2 theta_L``: consecutive arcs
    overlap by ``2 theta_L`` where ``theta_L`` is the angle whose Moran
    length is ``2c/D``, and ``n`` is the fewest arcs whose Moran diameter
    stays within ``2/D``.
    """
    if D < A:
        raise InvalidSpecError("the plane annulus needs D >= A")
    w_max = 2.0 * math.asin(A / D)
    theta_L = 2.0 * math.asin(min(1.0, c * A / D))
    if w_max <= 2.0 * theta_L:
        raise CatboundError(f"no arc cover with mesh 2/D and Lebesgue {2 * c}/D at D={D}")
    n = math.ceil(2.0 * math.pi / (w_max - 2.0 * theta_L))
    sigma = 2.0 * math.pi / n
    w = sigma + 2.0 * theta_L

    # every element is a rotation of the first, so one element is sampled
    radii = np.linspace(D, D + width, grid)
    angles = np.linspace(0.0, w, grid)
    rr, aa = np.meshgrid(radii, angles)
    pts = np.stack([(rr * np.cos(aa)).ravel(), (rr * np.sin(aa)).ravel()], axis=1)
    mesh = _grid_diameter(pts)
    outer = np.stack([(D + width) * np.cos(angles), (D + width) * np.sin(angles)], axis=1)
    M = _grid_diameter(outer)

    # an inner-sphere point at angle phi is deepest in the arc whose centre
    # (at j*sigma + w/2) is nearest; the probes sweep one period of centres
    probes = np.concatenate([np.linspace(0.0, sigma, grid), [(w / 2.0 - sigma / 2.0) % sigma]])
    nearest = np.abs((probes - w / 2.0 + sigma / 2.0) % sigma - sigma / 2.0)
    depth = w / 2.0 - nearest
    lebesgue = float((2.0 * D * np.sin(depth / 2.0)).min())
    return AnnulusRow(D, mesh, lebesgue, M, n, 2.0 * math.sin(w / 2.0) / A, 2.0 * math.sin(theta_L / 2.0) / A)


def tree_annulus_row(tree: TreeSpace, A: float, width: float, D: float, c: float = 0.5,
                     grid: int = 32) -> AnnulusRow:
    """Cylinder cones at depth ``k = ceil(D/2 - A/2)`` cut by the annulus.

    A depth-``k`` cylinder has Moran diameter ``1/(k + A/2) <= 2/D``.
    """
    k = max(1, math.ceil(D / 2.0 - A / 2.0))
    if D + width > float(tree.horizon):
        raise CatboundError("tree truncation is shallower than the annulus")
    b = tree.branching
    boundary_leb = 1.0 / (k - 1 + A / 2.0)
    if boundary_leb < 2.0 * c / D - 1e-12:
        raise CatboundError(f"cylinder cover at depth {k} misses the Lebesgue target at D={D}")
    root = (0,) * k
    ends = []
    for i in range(grid):
        digits, x = [], i
        for _ in range(max(1, math.ceil(math.log(grid, b)))):
            digits.append(x % b)
            x //= b
        ends.append(TreeEnd(root + tuple(digits)))
    radii = np.linspace(D, D + width, grid)
    mesh = M = 0.0
    for i in range(grid):
        for j in range(i + 1, grid):
            M = max(M, tree.ray_distance(ends[i], D + width, ends[j], D + width))
            for r in radii:
                mesh = max(mesh, tree.ray_distance(ends[i], float(r), ends[j], D + width))
    # the nearest inner-sphere point outside the cone hangs off the parent of the root vertex
    outside = TreeEnd(root[:-1] + (1,))
    lebesgue = tree.ray_distance(ends[0], D, outside, D)
    return AnnulusRow(D, mesh, lebesgue, M, b ** k, 1.0 / (k + A / 2.0), boundary_leb)


def annulus_cover_experiment(space_or_kind, A: float, R_width: float, D_values: Sequence[float],
                             c: float = 0.5) -> list[AnnulusRow]:
    """Rows of the annulus experiment on the plane or on a tree."""
    D_values = [float(d) for d in D_values]
    if not D_values or D_values != sorted(D_values) or D_values[0] <= 0:
        raise InvalidSpecError("D values must be positive and ascending")
    space = space_or_kind
    if isinstance(space_or_kind, str):
        kind = space_or_kind
    else:
        kind = space.kind
    if kind == "plane":
        return [plane_annulus_row(A, R_width, D, c) for D in D_values]
    if kind == "tree":
        need = math.ceil(D_values[-1] + R_width) + 1
        if isinstance(space, str) or float(space.horizon) < need:
            branching = 3 if isinstance(space, str) else space.branching
            space = build_space(tree_spec(branching, need))
        return [tree_annulus_row(space, A, R_width, D, c) for D in D_values]
    raise InvalidSpecError("the annulus experiment runs on the plane or on a tree")


def annulus_summary(rows: Sequence[AnnulusRow]) -> dict:
    meshes = [r.mesh for r in rows]
    Ds = np.array([r.D for r in rows])
    Ms = np.array([r.M for r in rows])
    slope = float(np.polyfit(Ds, Ms, 1)[0]) if len(rows) > 1 else math.nan
    return {"mesh_ratio": max(meshes) / min(meshes), "M_slope": slope,
            "lebesgue": [r.lebesgue for r in rows]}


# ---------------------------------------------------------------------------
# verification suite
# ---------------------------------------------------------------------------


def _rng(seed: int, name: str) -> np.random.Generator:
    import zlib

    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def _metric_axioms(space, rng: np.random.Generator, n: int) -> dict:
    sym = tri = zero = 0.0
    horizon = min(float(space.horizon), 20.0)
    for _ in range(n):
        pts = []
        for xi in random_distinct_ends(space, rng, 3):
            cap = min(horizon, space.ray_horizon(xi))
            pts.append(space.ray_eval(xi, float(rng.uniform(0.0, cap))))
        x, y, z = pts
        dxy = float(space.distance(x, y))
        sym = max(sym, abs(dxy - float(space.distance(y, x))))
        tri = max(tri, dxy - float(space.distance(x, z)) - float(space.distance(z, y)))
        zero = max(zero, abs(float(space.distance(x, x))))
    return {"symmetry": sym, "triangle_excess": max(tri, 0.0), "self_distance": zero}


def _unit_speed(space, rng: np.random.Generator, n: int) -> float:
    worst = 0.0
    p = space.basepoint
    for _ in range(n):
        xi = random_end(space, rng)
        t = float(rng.uniform(0.0, min(float(space.horizon), 20.0, space.ray_horizon(xi))))
        worst = max(worst, abs(float(space.distance(p, space.ray_eval(xi, t))) - t))
    return worst


def _suite_spaces(cfg: ExperimentConfig) -> dict:
    return {
        "tree": build_space(tree_spec(cfg.tree_branching, cfg.tree_depth)),
        "plane": build_space(SpaceSpec("plane")),
        "h2": build_space(SpaceSpec("hyperbolic_plane", delta=H2_DELTA)),
        "product": product_space(cfg),
    }


_LABEL = {"tree": "tree", "plane": "plane", "h2": "H2", "product": "product"}


def suite_definitions(cfg: ExperimentConfig) -> list[tuple[str, str, Callable]]:
    """``(name, anchor, body)`` for every check; bodies take a generator and
    return ``(passed, measured, bound, tolerance)``."""
    tol = cfg.tolerance
    sp = _suite_spaces(cfg)
    tree, plane, h2 = sp["tree"], sp["plane"], sp["h2"]
    tnet = tree.boundary_net(cfg.tree_net_depth)
    hnet = h2.boundary_net(cfg.h2_net_size)
    n = max(10, cfg.n_samples // 10)
    checks: list[tuple[str, str, Callable]] = []

    for key in ("tree", "plane", "h2", "product"):
        def body(rng, space=sp[key]):
            m = _metric_axioms(space, rng, n)
            return max(m.values()) <= tol, m, {"max": tol}, tol
        checks.append((f"metric axioms on the {_LABEL[key]}", "model space distance", body))

    def unit_speed(rng):
        m = {k: _unit_speed(s, rng, n) for k, s in sp.items()}
        return max(m.values()) <= tol, m, {"max": tol}, tol
    checks.append(("rays have unit speed", "geodesic rays from the basepoint", unit_speed))

    def roundtrip(rng):
        from .covers import Cover as _Cover
        from .spaces import SpaceSpec as _Spec

        specs = [tree_spec(3, 8), SpaceSpec("plane"), SpaceSpec("hyperbolic_plane", delta=H2_DELTA),
                 product_spec(tree_spec(2, 5), tree_spec(2, 5))]
        ok = all(_Spec.from_json(json.loads(json.dumps(s.to_json()))) == s for s in specs)
        cover = greedy_colored_cover(tree, "moran", cfg.tree_params(), tnet[:27], 0.3, 3)
        ok = ok and _Cover.from_json(json.loads(json.dumps(cover.to_json()))) == cover
        cfg_ok = ExperimentConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg
        return ok and cfg_ok, {"specs_and_cover": ok, "config": cfg_ok}, {}, None
    checks.append(("documents round-trip through JSON", "serialization", roundtrip))

    def h2_limit(rng):
        worst = 0.0
        for _ in range(50):
            xi, eta = random_distinct_ends(h2, rng, 2)
            want = -math.log(math.sin(angle_gap(xi.theta, eta.theta) / 2.0))
            worst = max(worst, abs(gromov_product_boundary(h2, xi, eta) - want))
        return worst <= 1e-6, {"max_error": worst}, {"max": 1e-6}, 1e-6
    checks.append(("boundary Gromov product on H2", "Gromov product at infinity", h2_limit))

    def tree_visual(rng):
        dv = visual_distance_matrix(tree, cfg.tree_params(), tnet)
        rho = rho_matrix(tree, cfg.tree_params(), tnet)
        err = float(np.abs(dv - np.where(np.isfinite(rho), rho, 0.0)).max())
        return err <= 1e-12, {"max_error": err}, {"max": 1e-12}, 1e-12
    checks.append(("tree visual metric equals rho", "visual metric chain infimum", tree_visual))

    def h2_visual(rng):
        r = visual_sandwich_campaign(h2, cfg.h2_params(), hnet)
        return r.passed(tol), dataclasses.asdict(r), {"max": tol}, tol
    checks.append(("H2 visual metric sandwich", "visual metric chain infimum", h2_visual))

    for key, space in (("tree", tree), ("plane", plane), ("h2", h2)):
        def oracle(rng, space=space):
            pairs = [tuple(random_distinct_ends(space, rng, 2)) for _ in range(n)]
            err = moran_oracle_campaign(space, cfg.A, pairs)
            return err <= tol, {"max_error": err, "pairs": len(pairs)}, {"max": tol}, tol
        checks.append((f"Moran bisection matches the {_LABEL[key]} closed form", "Moran metric", oracle))

    def moran_axioms(rng):
        m = {}
        for key, space in (("tree", tree), ("plane", plane), ("h2", h2)):
            triples = [tuple(random_distinct_ends(space, rng, 3)) for _ in range(n)]
            for k, v in moran_axioms_campaign(space, cfg.A, triples).items():
                m[f"{key}_{k}"] = v
        return max(m.values()) <= tol, m, {"max": tol}, tol
    checks.append(("Moran metric axioms", "Moran metric is a distance", moran_axioms))

    def tree_sandwich(rng):
        R = estimate_R(tree, tnet, cfg.s)
        r = sandwich_campaign(tree, cfg.tree_params(), tnet, R, cfg.s)
        ok = r.passed(tol) and r.equality_error <= 1e-12
        return ok, r.to_json(), {"max": tol, "equality": 1e-12}, tol
    checks.append(("tree metric comparison with equality", "visual versus Moran comparison", tree_sandwich))

    def h2_sandwich(rng):
        R = estimate_R(h2, hnet, cfg.s)
        cnet = clustered_angle_net(cfg.h2_clusters, cfg.h2_cluster_size, cfg.h2_cluster_step)
        r = sandwich_campaign(h2, cfg.h2_params(), cnet, R, cfg.s)
        return r.passed(tol), r.to_json(), {"max": tol}, tol
    checks.append(("H2 metric comparison", "visual versus Moran comparison", h2_sandwich))

    def concavity(rng):
        m = {}
        ok = True
        for key, params, R in (("tree", cfg.tree_params(), estimate_R(tree, tnet, cfg.s)),
                               ("h2", cfg.h2_params(), estimate_R(h2, hnet, cfg.s))):
            consts = sandwich_constants(params, R, cfg.s)
            res = concavity_campaign(consts.a, consts.b)
            ok = ok and res["max_second_derivative"] < 0 and res["scaling_excess"] <= 0 \
                and res["split_excess"] <= 0
            m[key] = res
        return ok, m, {"second_derivative": "< 0", "excess": "<= 0"}, 0.0
    checks.append(("comparison function is concave", "concavity of the comparison function", concavity))

    def lemma_r(rng):
        m = {}
        ok = True
        for key, space, net, delta in (("tree", tree, tnet, 0.0), ("h2", h2, hnet, H2_DELTA)):
            R = estimate_R(space, net, cfg.s)
            res = lemma_r_campaign(space, net, R, delta, cfg.s)
            res["R"] = R
            ok = ok and res["lower_excess"] <= tol and res["upper_excess"] <= tol
            m[key] = res
        return ok, m, {"max": tol}, tol
    checks.append(("ray Gromov products settle past R", "uniform settling radius", lemma_r))

    def ratio(rng):
        m = {k: ray_ratio_campaign(s, rng, n) for k, s in sp.items()}
        ok = all(v["excess"] <= tol for v in m.values()) and m["plane"]["equality_error"] <= tol
        return ok, m, {"max": tol}, tol
    checks.append(("ray displacement ratio", "convexity of the displacement", ratio))

    def greedy_contract(rng):
        params = MetricParams(0.5, 0.0, cfg.A)
        pnet = plane.boundary_net(cfg.plane_net_size)
        cover = greedy_colored_cover(plane, "moran", params, pnet, 0.5, 2)
        st = cover_stats(plane, cover)
        sep = min(st.min_family_separation)
        order_ok = st.order == brute_force_order(cover)
        return sep >= 0.5 - 1e-12 and order_ok, {"separation": sep, "order": st.order,
                                                 "families": cover.n_colors}, {"separation": 0.5}, 1e-12
    checks.append(("greedy cover separation and order", "separated and bounded families", greedy_contract))

    def transfer(rng):
        rows = transfer_campaign(cfg)
        ok = len(rows) >= cfg.n_transfer_covers and all(r.passed for _, r in rows)
        m = {label: {"capacity_moran": r.capacity_moran, "required": r.required_capacity}
             for label, r in rows}
        return ok, {"covers": len(rows), "rows": m}, {"covers": cfg.n_transfer_covers}, None
    checks.append(("capacity survives the change of metric", "capacity transfer", transfer))

    def profiles(rng):
        prof = cdim_campaign(cfg)
        fam = {k: list(p.families) for k, p in prof.items()}
        want = {"tree": 1, "circle": 2, "product": 2}
        ok = all(set(fam[k]) == {want[k]} for k in want)
        m = {k: {"families": fam[k], "c_prime": prof[k].c_prime} for k in fam}
        return ok, m, {k: [want[k]] for k in want}, None
    checks.append(("capacity dimension witnesses", "capacity dimension of products", profiles))

    def refinement(rng):
        r = tree_refinement_campaign(cfg)
        ok = all(f <= c for f, c in zip(r["fine"], r["coarse"]))
        return ok, r, {}, None
    checks.append(("tree profile is monotone under refinement", "cylinder covers", refinement))

    def retraction(rng):
        m = {}
        b1 = build_building(tree)
        b2 = build_building(sp["product"])
        m["tree"] = retraction_campaign(b1, rng, n)
        m["product"] = retraction_campaign(b2, rng, n)
        ok = all(v["radial_error"] <= tol and v["stretch"] <= tol for v in m.values())
        return ok, m, {"max": tol}, tol
    checks.append(("retraction is radial and 1-Lipschitz", "building retraction", retraction))

    def components(rng):
        rows = component_campaign(rng, cfg.n_segments)
        worst = max(r["max_diameter"] - r["bound"] for r in rows)
        return all(r["passed"] for r in rows), {"segments": len(rows), "worst_margin": worst}, \
            {"margin": "<= 0"}, 1e-9
    checks.append(("preimage components are bounded", "component diameter bound", components))

    def pull_tree(rng):
        b = build_building(tree)
        reps = pullback_campaign(b, tree.boundary_net(4), cfg.pullback_L_tree, cfg.pullback_c, cfg.A)
        return all(r.passed for r in reps), [r.to_json() for r in reps], {}, 1e-9
    checks.append(("pullback bounds on the tree", "cover pullback through the retraction", pull_tree))

    def pull_product(rng):
        b = build_building(sp["product"])
        net = sp["product"].boundary_net(cfg.product_net)
        reps = pullback_campaign(b, net, cfg.pullback_L_product, cfg.pullback_c, cfg.A,
                                 moran_space=product_space(cfg, PRODUCT_RAY_DEPTH))
        return all(r.passed for r in reps), [r.to_json() for r in reps], {}, 1e-9
    checks.append(("pullback bounds on the product", "cover pullback through the retraction", pull_product))

    def annulus_plane(rng):
        rows = annulus_cover_experiment("plane", cfg.A, cfg.annulus_width, cfg.annulus_D_plane, cfg.annulus_c)
        summ = annulus_summary(rows)
        leb_err = max(abs(r.lebesgue - 2 * cfg.annulus_c * cfg.A) for r in rows)
        ok = summ["mesh_ratio"] <= 1.05 and leb_err <= 1e-12
        return ok, {"rows": [r.to_json() for r in rows], "mesh_ratio": summ["mesh_ratio"],
                    "lebesgue_error": leb_err}, {"mesh_ratio": 1.05, "lebesgue_error": 1e-12}, 1e-12
    checks.append(("plane annulus mesh stays bounded", "annulus covers", annulus_plane))

    def annulus_tree(rng):
        rows = annulus_cover_experiment("tree", cfg.A, cfg.annulus_width, cfg.annulus_D_tree, cfg.annulus_c)
        slope = annulus_summary(rows)["M_slope"]
        return slope > 0.5, {"rows": [r.to_json() for r in rows], "M_slope": slope}, {"M_slope": 0.5}, None
    checks.append(("tree annulus width grows", "annulus covers", annulus_tree))

    def quasi(rng):
        rows = quasisymmetry_distortion(tree, cfg.A, 2.0 * cfg.A, 50, rng)
        worst = 0.0
        for _ in range(50):
            xi, eta = random_distinct_ends(tree, rng, 2)
            d1 = moran_metric(tree, cfg.A, xi, eta)
            d2 = moran_metric(tree, 2.0 * cfg.A, xi, eta)
            worst = max(worst, abs(d2 - 1.0 / (1.0 / d1 + cfg.A / 2.0)))
        same = quasisymmetry_distortion(plane, cfg.A, cfg.A, 50, rng)
        diag = max(abs(a - b) for a, b in same)
        ok = worst <= tol and diag <= tol
        return ok, {"tree_closed_form_error": worst, "diagonal_error": diag, "samples": len(rows)}, \
            {"max": tol}, tol
    checks.append(("Moran scale change on trees", "quasi-symmetry of Moran metrics", quasi))
    return checks


def run_verification_suite(cfg: ExperimentConfig | None = None, *,
                           only: Sequence[str] | None = None) -> VerificationReport:
    """Run every check; a check that raises is recorded as failed."""
    cfg = ExperimentConfig() if cfg is None else cfg
    cfg.validate()
    results = []
    for name, anchor, body in suite_definitions(cfg):
        if only is not None and name not in only:
            continue
        start = time.perf_counter()
        try:
            passed, measured, bound, tol = body(_rng(cfg.seed, name))
            results.append(Check(name, anchor, "pass" if passed else "fail", measured, bound, tol,
                                 time.perf_counter() - start))
        except CatboundError as exc:
            results.append(Check(name, anchor, "fail", {}, {}, None, time.perf_counter() - start,
                                 f"{type(exc).__name__}: {exc}"))
    return VerificationReport(cfg.seed, results, cfg.to_json())
