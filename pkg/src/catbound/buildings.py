"""Trees and products of two trees viewed as buildings.

The apartment of a rooted tree is the bi-infinite line through the root
made of the rays ``0 0 0 ...`` (positive side) and ``1 0 0 ...`` (negative
side); the base chamber is the edge from the root to child ``0`` and the
basepoint is the root.  For a product of two trees the apartment is the
flat spanned by the two factor lines and the retraction acts factor-wise.

The retraction folds the building onto its apartment while keeping the
distance to the basepoint: a point whose geodesic from the root starts
with label ``0`` lands on the positive side, any other point on the
negative side.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .boundary import MetricParams, moran_distance_matrix
from .covers import Cover, CoverElement
from .errors import HorizonExceeded, InvalidSpecError, ResolutionError
from .spaces import (
    AngleEnd,
    LineEnd,
    LinePoint,
    PlanePoint,
    ProductPoint,
    ProductSpace,
    Space,
    SpaceSpec,
    TreeEnd,
    TreePoint,
    TreeSpace,
    _as_fraction,
    build_space,
)

PLUS_END = TreeEnd(())
MINUS_END = TreeEnd((1,))

#: slack for measured-versus-bound comparisons on float quantities
BOUND_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class Building:
    space: Space

    def __post_init__(self):
        if isinstance(self.space, TreeSpace):
            return
        if isinstance(self.space, ProductSpace) and all(
                isinstance(f, TreeSpace) for f in self.space.factors):
            return
        raise InvalidSpecError("buildings are trees or products of two trees")

    @property
    def rank(self) -> int:
        return 1 if isinstance(self.space, TreeSpace) else 2

    @property
    def trees(self) -> tuple[TreeSpace, ...]:
        return (self.space,) if self.rank == 1 else tuple(self.space.factors)

    @property
    def basepoint(self):
        return self.space.basepoint

    @property
    def chamber_diameter(self) -> float:
        edges = [float(t.edge) for t in self.trees]
        return math.sqrt(sum(e * e for e in edges))

    @property
    def apartment_space(self) -> Space:
        return build_space(SpaceSpec("line" if self.rank == 1 else "plane"))


def build_building(space: Space) -> Building:
    return Building(space)


# ---------------------------------------------------------------------------
# retraction
# ---------------------------------------------------------------------------


def _side(labels: Sequence[int]) -> int:
    if not labels:
        return 0
    return 1 if labels[0] == 0 else -1


def tree_coordinate(tree: TreeSpace, x: TreePoint) -> Fraction:
    """Signed apartment coordinate of the retracted point."""
    labels, depth = x.key(tree.edge)
    return _side(labels) * depth


def tree_apartment_point(tree: TreeSpace, u) -> TreePoint:
    u = _as_fraction(u)
    return tree.ray_eval(PLUS_END if u >= 0 else MINUS_END, abs(u))


def apartment_coordinates(b: Building, x) -> tuple:
    if b.rank == 1:
        b.space.check_point(x)
        return (tree_coordinate(b.space, x),)
    b.space.check_point(x)
    t1, t2 = b.trees
    return (tree_coordinate(t1, x.first), tree_coordinate(t2, x.second))


def apartment_retraction(b: Building, x):
    """Fold ``x`` onto the apartment, fixing the base chamber.

    Preserves the distance to the basepoint and never increases distances.
    """
    coords = apartment_coordinates(b, x)
    if b.rank == 1:
        return tree_apartment_point(b.space, coords[0])
    t1, t2 = b.trees
    return ProductPoint(tree_apartment_point(t1, coords[0]), tree_apartment_point(t2, coords[1]))


def to_apartment_point(b: Building, x):
    """Retracted point as a point of the model line or plane."""
    coords = [float(u) for u in apartment_coordinates(b, x)]
    return LinePoint(coords[0]) if b.rank == 1 else PlanePoint(*coords)


def _end_side(xi: TreeEnd) -> int:
    return 1 if xi.label(0) == 0 else -1


def retract_end(b: Building, zeta):
    """Boundary point of the apartment hit by the retracted ray."""
    b.space.check_end(zeta)
    if b.rank == 1:
        return LineEnd(_end_side(zeta))
    x = _end_side(zeta.first) * math.cos(zeta.alpha)
    y = _end_side(zeta.second) * math.sin(zeta.alpha)
    return AngleEnd(math.atan2(y, x))


def apartment_boundary_net(b: Building, net: Sequence) -> list:
    """Distinct retracted directions of a building boundary net, sorted."""
    ends = {retract_end(b, z) for z in net}
    if b.rank == 1:
        return sorted(ends, key=lambda e: -e.sign)
    return sorted(ends, key=lambda e: e.theta)


def _apartment_direction(end) -> tuple[float, ...]:
    if isinstance(end, LineEnd):
        return (float(end.sign),)
    return (math.cos(end.theta), math.sin(end.theta))


# ---------------------------------------------------------------------------
# apartment regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """Closed segment ``[lo, hi]`` of the apartment line."""

    lo: float
    hi: float

    @property
    def dim(self) -> int:
        return 1

    @property
    def diameter(self) -> float:
        return float(self.hi - self.lo)

    def contains(self, u) -> bool:
        return self.lo <= u[0] <= self.hi

    def breakpoints(self) -> list:
        return [self.lo, self.hi]

    def extent(self) -> float:
        return max(abs(self.lo), abs(self.hi))


@dataclass(frozen=True)
class Rectangle:
    lo1: float
    hi1: float
    lo2: float
    hi2: float

    @property
    def dim(self) -> int:
        return 2

    @property
    def diameter(self) -> float:
        return math.hypot(self.hi1 - self.lo1, self.hi2 - self.lo2)

    def contains(self, u) -> bool:
        return self.lo1 <= u[0] <= self.hi1 and self.lo2 <= u[1] <= self.hi2

    def slice(self, u1: float) -> list[tuple[float, float]]:
        return [(self.lo2, self.hi2)] if self.lo1 <= u1 <= self.hi1 else []

    def breakpoints(self) -> list:
        return [self.lo1, self.hi1, self.lo2, self.hi2]

    def extent(self) -> float:
        return max(abs(self.lo1), abs(self.hi1), abs(self.lo2), abs(self.hi2))


@dataclass(frozen=True)
class Neighborhood:
    """Closed ``radius``-neighbourhood of finitely many apartment points."""

    centers: tuple[tuple[float, ...], ...]
    radius: float

    @property
    def dim(self) -> int:
        return len(self.centers[0])

    @property
    def diameter(self) -> float:
        c = np.asarray(self.centers, dtype=float)
        spread = np.sqrt(((c[:, None, :] - c[None, :, :]) ** 2).sum(-1)).max()
        return float(spread + 2 * self.radius)

    def contains(self, u) -> bool:
        u = tuple(float(x) for x in u)
        r2 = self.radius * self.radius
        return any(sum((a - b) ** 2 for a, b in zip(u, c)) <= r2 for c in self.centers)

    def slice(self, u1: float) -> list[tuple[float, float]]:
        out = []
        for c1, c2 in self.centers:
            gap = u1 - c1
            if abs(gap) <= self.radius:
                half = math.sqrt(self.radius * self.radius - gap * gap)
                out.append((c2 - half, c2 + half))
        out.sort()
        merged: list[list[float]] = []
        for lo, hi in out:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return [(lo, hi) for lo, hi in merged]

    def breakpoints(self) -> list:
        return [c[0] + s * self.radius for c in self.centers for s in (-1, 1)]

    def extent(self) -> float:
        return max(math.sqrt(sum(x * x for x in c)) for c in self.centers) + self.radius


# ---------------------------------------------------------------------------
# discretized preimages
# ---------------------------------------------------------------------------


@dataclass
class _TreeSamples:
    keys: list
    coords: list
    adjacency: list
    index: dict


def _tree_samples(tree: TreeSpace, max_depth: Fraction, h: Fraction,
                  extra_depths: Iterable = (), keep=None) -> _TreeSamples:
    """Points of the truncated tree every ``h`` along each edge plus the
    requested extra depths, joined along edges.

    ``keep(u)`` filters by signed apartment coordinate before a sample is
    created; edges are only joined between kept consecutive samples.
    """
    e = tree.edge
    if max_depth > tree.horizon:
        raise HorizonExceeded(f"sampling depth {float(max_depth)} beyond the truncation horizon")
    extra = sorted({_as_fraction(d) for d in extra_depths if 0 <= d <= max_depth})
    keys: list = []
    coords: list = []
    adjacency: list = []
    index: dict = {}

    def add(key, u):
        if keep is not None and not keep(u):
            return None
        i = index.get(key)
        if i is None:
            i = len(keys)
            index[key] = i
            keys.append(key)
            coords.append(u)
            adjacency.append([])
        return i

    def link(i, j):
        if i is not None and j is not None:
            adjacency[i].append(j)
            adjacency[j].append(i)

    frontier = [()]
    add(((), Fraction(0)), Fraction(0))
    level = 0
    while frontier and level * e < max_depth:
        nxt = []
        d_parent = level * e
        d_child = (level + 1) * e
        for path in frontier:
            parent = index.get((path, d_parent))
            for c in range(tree.branching):
                child = path + (c,)
                side = _side(child)
                depths = set()
                j = math.floor(d_parent / h) + 1
                while j * h < min(d_child, max_depth + h) and j * h <= max_depth:
                    depths.add(j * h)
                    j += 1
                lo = bisect.bisect_right(extra, d_parent)
                hi = bisect.bisect_left(extra, d_child)
                depths.update(extra[lo:hi])
                if max_depth < d_child:
                    depths.add(max_depth)
                prev = parent
                for d in sorted(x for x in depths if d_parent < x < d_child):
                    cur = add((child, d), side * d)
                    link(prev, cur)
                    prev = cur
                if d_child <= max_depth:
                    cur = add((child, d_child), side * d_child)
                    link(prev, cur)
                    nxt.append(child)
        frontier = nxt
        level += 1
    return _TreeSamples(keys, coords, adjacency, index)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        p = self.parent
        while p[i] != i:
            p[i] = p[p[i]]
            i = p[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


@dataclass
class Components:
    """Connected components of a discretized preimage ``rho^-1(U)``.

    ``members[c]`` lists sample keys of component ``c``; for trees a key is
    ``(labels, depth)``, for products a pair of factor keys.
    """

    building: Building
    members: list[list]
    lookup: dict
    diameters: list[float] | None = None
    resolution: float = 0.0

    def __len__(self) -> int:
        return len(self.members)

    def component_of(self, x) -> int:
        b = self.building
        if b.rank == 1:
            key = x.key(b.space.edge)
        else:
            t1, t2 = b.trees
            key = (x.first.key(t1.edge), x.second.key(t2.edge))
        try:
            return self.lookup[key]
        except KeyError:
            raise ResolutionError(f"{x!r} is not a sample of the preimage") from None

    def summary(self) -> list[tuple[int, float]]:
        return [(i, d) for i, d in enumerate(self.diameters or [])]


def _tree_key_diameter(tree: TreeSpace, keys: list) -> Fraction:
    # a connected subset of a tree is geodesically convex, so the farthest
    # point of the farthest point from anywhere realizes the diameter
    if len(keys) < 2:
        return Fraction(0)
    far = max(keys, key=lambda k: tree.key_distance(keys[0], k))
    return max(tree.key_distance(far, k) for k in keys)


def _product_key_diameter(t1: TreeSpace, t2: TreeSpace, keys: list, chunk: int = 2048) -> float:
    k1 = sorted({k[0] for k in keys}, key=repr)
    k2 = sorted({k[1] for k in keys}, key=repr)
    i1 = {k: i for i, k in enumerate(k1)}
    i2 = {k: i for i, k in enumerate(k2)}
    d1 = np.array([[float(t1.key_distance(a, b)) for b in k1] for a in k1])
    d2 = np.array([[float(t2.key_distance(a, b)) for b in k2] for a in k2])
    a = np.array([i1[k[0]] for k in keys])
    c = np.array([i2[k[1]] for k in keys])
    best = 0.0
    for s in range(0, len(keys), chunk):
        sq = d1[a[s:s + chunk]][:, a] ** 2 + d2[c[s:s + chunk]][:, c] ** 2
        best = max(best, float(sq.max()))
    return math.sqrt(best)


def _check_resolution(b: Building, resolution) -> Fraction:
    h = _as_fraction(resolution)
    if h <= 0:
        raise ResolutionError("resolution must be positive")
    for t in b.trees:
        if h > t.edge:
            raise ResolutionError(
                f"resolution {float(h)} exceeds the edge length {float(t.edge)}; components may merge")
    return h


def preimage_components(b: Building, region, resolution, *, extra_depths=((), ()),
                        with_diameters: bool = True) -> Components:
    """Connected components of ``rho^-1(region)`` in the truncated building.

    The building is sampled every ``resolution`` along edges (plus
    ``extra_depths`` per factor and the region's breakpoints); samples are
    joined along edges, and for products along the grid of factor edges.
    """
    h = _check_resolution(b, resolution)
    if region.dim != b.rank:
        raise InvalidSpecError("region dimension does not match the apartment")
    reach = _as_fraction(float(region.extent()))
    if b.rank == 1:
        tree = b.space
        reach = min(reach, tree.horizon)
        extras = list(extra_depths[0]) + [abs(_as_fraction(float(x))) for x in region.breakpoints()]
        samples = _tree_samples(tree, reach, h, extras, keep=lambda u: region.contains((u,)))
        uf = _UnionFind(len(samples.keys))
        for i, nbrs in enumerate(samples.adjacency):
            for j in nbrs:
                uf.union(i, j)
        groups: dict[int, list] = {}
        for i, key in enumerate(samples.keys):
            groups.setdefault(uf.find(i), []).append(key)
        members = list(groups.values())
        lookup = {k: c for c, ks in enumerate(members) for k in ks}
        diam = [float(_tree_key_diameter(tree, ks)) for ks in members] if with_diameters else None
        return Components(b, members, lookup, diam, float(h))

    t1, t2 = b.trees
    r1 = min(reach, t1.horizon)
    r2 = min(reach, t2.horizon)
    bp = [abs(_as_fraction(float(x))) for x in region.breakpoints()]
    s1 = _tree_samples(t1, r1, h, list(extra_depths[0]) + bp)
    s2 = _tree_samples(t2, r2, h, list(extra_depths[1]) + bp)
    u2 = [float(u) for u in s2.coords]
    order2 = sorted(range(len(u2)), key=u2.__getitem__)
    sorted_u2 = [u2[i] for i in order2]
    nodes: dict[tuple[int, int], int] = {}
    for a, ua in enumerate(s1.coords):
        for lo, hi in region.slice(float(ua)):
            for pos in range(bisect.bisect_left(sorted_u2, lo), bisect.bisect_right(sorted_u2, hi)):
                nodes[(a, order2[pos])] = len(nodes)
    uf = _UnionFind(len(nodes))
    for (a, c), i in nodes.items():
        for a2 in s1.adjacency[a]:
            j = nodes.get((a2, c))
            if j is not None:
                uf.union(i, j)
        for c2 in s2.adjacency[c]:
            j = nodes.get((a, c2))
            if j is not None:
                uf.union(i, j)
    groups = {}
    for (a, c), i in nodes.items():
        groups.setdefault(uf.find(i), []).append((s1.keys[a], s2.keys[c]))
    members = list(groups.values())
    lookup = {k: cid for cid, ks in enumerate(members) for k in ks}
    diam = [_product_key_diameter(t1, t2, ks) for ks in members] if with_diameters else None
    return Components(b, members, lookup, diam, float(h))


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BuildingBounds:
    S: float
    M: float
    D: float
    r: float
    S_prime: float
    c_prime: float
    R: float

    def lemma_bound(self, R: float) -> float:
        """Explicit component-diameter bound ``2R + 2D + M``."""
        return 2.0 * R + 2.0 * self.D + self.M

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in ("S", "M", "D", "r", "S_prime", "c_prime", "R")}


def building_bounds(S: float, M: float, c: float, A: float, D: float = 0.0,
                    r: float | None = None, R: float = 0.0) -> BuildingBounds:
    if not M > 0:
        raise InvalidSpecError("chamber diameter M must be positive")
    r = 2.0 * M if r is None else r
    if r < 2.0 * M:
        raise InvalidSpecError("r must be at least twice the chamber diameter")
    s_prime = S * (c + 1.0) / c
    return BuildingBounds(S, M, D, r, s_prime, c * (s_prime * A + M) / A, R)


def default_bounds(b: Building, c: float, A: float) -> BuildingBounds:
    """Constants valid for the model buildings.

    A connected component of ``rho^-1(U)`` has factor-wise diameter at most
    twice the coordinate range of ``U``, so ``S = 2`` for trees and
    ``S = 2 sqrt(2)`` for products, with ``D = 0``.
    """
    S = 2.0 if b.rank == 1 else 2.0 * math.sqrt(2.0)
    return building_bounds(S, b.chamber_diameter, c, A)


@dataclass(frozen=True)
class ComponentBoundReport:
    region_diameter: float
    diameters: tuple[float, ...]
    bound: float
    best_fit_S: float
    D: float
    M: float

    @property
    def passed(self) -> bool:
        return all(d <= self.bound + BOUND_SLACK for d in self.diameters)


def component_bound_check(b: Building, region, resolution, D: float = 0.0,
                          M: float | None = None) -> ComponentBoundReport:
    """Measure every component of ``rho^-1(region)`` against ``2R + 2D + M``."""
    M = b.chamber_diameter if M is None else M
    comps = preimage_components(b, region, resolution)
    R = region.diameter
    bound = 2.0 * R + 2.0 * D + M
    worst = max(comps.diameters, default=0.0)
    best_S = (worst - M) / R if R > 0 else math.nan
    return ComponentBoundReport(R, tuple(comps.diameters), bound, best_S, D, M)


# ---------------------------------------------------------------------------
# cover pullback
# ---------------------------------------------------------------------------


def _match_apartment_indices(b: Building, net: Sequence, apt_net: Sequence) -> list[int]:
    out = []
    if b.rank == 1:
        pos = {e: i for i, e in enumerate(apt_net)}
        for z in net:
            out.append(pos[retract_end(b, z)])
        return out
    thetas = np.array([e.theta for e in apt_net])
    for z in net:
        th = retract_end(b, z).theta
        gaps = np.abs((thetas - th + math.pi) % (2 * math.pi) - math.pi)
        i = int(gaps.argmin())
        if gaps[i] > 1e-9:
            raise ResolutionError("building net direction missing from the apartment net")
        out.append(i)
    return out


def _ray_extra_depths(b: Building, net: Sequence, times: Iterable[float]) -> tuple:
    times = list(times)
    if b.rank == 1:
        return ([_as_fraction(float(t)) for t in times], ())
    d1 = {Fraction(float(t) * math.cos(z.alpha)) for z in net for t in times}
    d2 = {Fraction(float(t) * math.sin(z.alpha)) for z in net for t in times}
    return (sorted(d1), sorted(d2))


def pullback_cover(b: Building, apartment_cover: Cover, L: float, c: float, A: float,
                   net: Sequence, resolution: float | None = None) -> Cover:
    """Pull colored families on the apartment boundary back to the building.

    For each apartment element ``U`` the rays of ``U`` meet the sphere of
    radius ``1/L`` in ``V``; building rays whose time-``1/L`` point retracts
    into ``V`` are grouped by the connected component of
    ``rho^-1(N_{A/2}(V))`` containing that point.  Each group inherits the
    color of ``U``.
    """
    if not c > 1:
        raise InvalidSpecError("the boundedness multiplier c must exceed 1")
    if not L > 0:
        raise InvalidSpecError("L must be positive")
    if apartment_cover.params.A != A:
        raise InvalidSpecError("apartment cover was measured with a different Moran scale")
    h = Fraction(A) / 8 if resolution is None else _as_fraction(resolution)
    if h > Fraction(A) / 8:
        raise ResolutionError("resolution must be at most A/8")
    T = 1.0 / L
    for t in b.trees:
        if T + A / 2.0 > float(t.horizon):
            raise HorizonExceeded(f"1/L + A/2 = {T + A / 2} exceeds the truncation horizon")
    apt_net = list(apartment_cover.net)
    apt_index = _match_apartment_indices(b, net, apt_net)
    extra = _ray_extra_depths(b, net, [T])
    elements = []
    for ei, U in enumerate(apartment_cover.elements):
        chosen = [zi for zi, ai in enumerate(apt_index) if ai in U.members]
        if not chosen:
            continue
        centers = tuple(tuple(T * x for x in _apartment_direction(apt_net[j])) for j in sorted(U.members))
        comps = preimage_components(b, Neighborhood(centers, A / 2.0), h, extra_depths=extra,
                                    with_diameters=False)
        groups: dict[int, list[int]] = {}
        for zi in chosen:
            cid = comps.component_of(b.space.ray_eval(net[zi], T))
            groups.setdefault(cid, []).append(zi)
        for cid in sorted(groups):
            elements.append(CoverElement(frozenset(groups[cid]), U.color, f"U{ei}/K{cid}"))
    return Cover(tuple(elements), tuple(net), "moran", apartment_cover.params)


@dataclass(frozen=True)
class PullbackReport:
    L: float
    c: float
    A: float
    families_in: int
    families_out: int
    sphere_separation: float
    sphere_separation_bound: float
    inner_diameter: float
    inner_diameter_bound: float
    moran_separation: float
    moran_separation_bound: float
    moran_bound: float
    moran_bound_limit: float
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        doc = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "checks"}
        doc["checks"] = dict(self.checks)
        return doc


def _min_cross(dist: np.ndarray, groups: list[np.ndarray]) -> float:
    best = math.inf
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            best = min(best, float(dist[np.ix_(groups[i], groups[j])].min()))
    return best


def pullback_bounds_check(b: Building, pulled: Cover, L: float, c: float, A: float,
                          bounds: BuildingBounds, net: Sequence | None = None,
                          families_in: int | None = None,
                          moran: np.ndarray | None = None) -> PullbackReport:
    """Measure the separation and boundedness of a pulled-back cover.

    * distinct same-color sets are ``A/2`` apart on the sphere of radius ``1/L``;
    * every set has diameter at most ``S'A + M`` on the sphere of radius ``1/(cL)``;
    * in Moran's metric distinct same-color sets are ``L/2`` apart and every
      set is ``c'L`` bounded.
    """
    net = list(pulled.net if net is None else net)
    n = len(net)
    T, t_in = 1.0 / L, 1.0 / (c * L)
    outer = np.zeros((n, n))
    inner = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            outer[i, j] = outer[j, i] = b.space.ray_distance(net[i], T, net[j], T)
            inner[i, j] = inner[j, i] = b.space.ray_distance(net[i], t_in, net[j], t_in)
    if moran is None:
        moran = moran_distance_matrix(b.space, pulled.params, net)

    members = [np.fromiter(sorted(e.members), dtype=int) for e in pulled.elements]
    colors = sorted({e.color for e in pulled.elements})
    sphere_sep = math.inf
    moran_sep = math.inf
    for color in colors:
        same = [m for m, e in zip(members, pulled.elements) if e.color == color]
        sphere_sep = min(sphere_sep, _min_cross(outer, same))
        moran_sep = min(moran_sep, _min_cross(moran, same))
    inner_diam = max(float(inner[np.ix_(m, m)].max()) for m in members)
    moran_diam = max(float(moran[np.ix_(m, m)].max()) for m in members)

    inner_bound = bounds.S_prime * A + bounds.M
    limit = c * L * inner_bound / A
    checks = {
        "sphere separation >= A/2": sphere_sep >= A / 2.0 - BOUND_SLACK,
        "inner diameter <= S'A + M": inner_diam <= inner_bound + BOUND_SLACK,
        "Moran separation >= L/2": moran_sep >= L / 2.0 - BOUND_SLACK,
        "Moran bound <= c'L": moran_diam <= limit + BOUND_SLACK,
    }
    fam_in = len(colors) if families_in is None else families_in
    checks["family count preserved"] = len(colors) == fam_in
    return PullbackReport(L, c, A, fam_in, len(colors), sphere_sep, A / 2.0, inner_diam, inner_bound,
                          moran_sep, L / 2.0, moran_diam, limit, checks)


def apartment_cover(b: Building, net: Sequence, L: float, A: float, n_colors: int,
                    params: MetricParams | None = None) -> Cover:
    """``L``-separated colored cover of the apartment directions of ``net``."""
    from .covers import RADIUS_LADDER, greedy_colored_cover
    from .errors import InsufficientColors

    params = MetricParams(epsilon=0.5, delta=0.0, A=A) if params is None else params
    apt_net = apartment_boundary_net(b, net)
    dist = moran_distance_matrix(b.apartment_space, params, apt_net)
    for factor in RADIUS_LADDER:
        try:
            return greedy_colored_cover(b.apartment_space, "moran", params, apt_net, L, n_colors,
                                        radius=factor * L, dist=dist)
        except InsufficientColors:
            continue
    raise InsufficientColors(f"apartment admits no {n_colors}-color cover at scale {L}", point=-1)


def pullback_seeding(b: Building, net: Sequence, A: float, n_colors: int, c: float = 2.0,
                     resolution: float | None = None):
    """Candidate elements for ``cdim_profile`` at scale ``lam``.

    Pulls back an ``n_colors`` apartment cover at scale ``2 lam`` so that
    same-colored pulled-back sets are ``lam`` apart; the sets are listed
    color by color.
    """
    def seeding(lam: float) -> list[list[int]]:
        cover = apartment_cover(b, net, 2.0 * lam, A, n_colors)
        pulled = pullback_cover(b, cover, 2.0 * lam, c, A, net, resolution)
        ordered = sorted(pulled.elements, key=lambda e: (e.color, min(e.members)))
        return [sorted(e.members) for e in ordered]

    return seeding
