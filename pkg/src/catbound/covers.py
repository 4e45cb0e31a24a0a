"""Colored covers of boundary nets and their capacity analytics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .boundary import (
    MetricParams,
    SandwichConstants,
    comparison_bounds,
    moran_distance_matrix,
    visual_distance_matrix,
)
from .errors import InsufficientColors, InvalidSpecError, ResolutionError
from .spaces import Space, TreeEnd, end_from_json, end_to_json

METRIC_KINDS = ("visual", "moran")

#: absolute slack when comparing measured distances to a separation target
SEPARATION_SLACK = 1e-12

#: absorption radii tried by cdim_profile, as multiples of the scale
RADIUS_LADDER = tuple(1.0 + j / 16 for j in range(33))


@dataclass(frozen=True)
class CoverElement:
    members: frozenset[int]
    color: int
    descriptor: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(m) for m in self.members))
        if not self.members:
            raise InvalidSpecError("cover elements must be nonempty")
        if self.color < 0:
            raise InvalidSpecError("colors are nonnegative")


@dataclass(frozen=True)
class Cover:
    elements: tuple[CoverElement, ...]
    net: tuple
    metric_kind: str
    params: MetricParams

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "net", tuple(self.net))
        if self.metric_kind not in METRIC_KINDS:
            raise InvalidSpecError(f"metric kind must be one of {METRIC_KINDS}")
        if not self.elements:
            raise InvalidSpecError("empty cover")
        n = len(self.net)
        covered: set[int] = set()
        for e in self.elements:
            if max(e.members) >= n:
                raise InvalidSpecError("cover element refers to a point outside the net")
            covered |= e.members
        if len(covered) != n:
            raise InvalidSpecError(f"cover misses {n - len(covered)} net points")
        colors = {e.color for e in self.elements}
        if colors != set(range(len(colors))):
            raise InvalidSpecError("colors must form a contiguous range 0..n")

    @property
    def n_colors(self) -> int:
        return 1 + max(e.color for e in self.elements)

    def with_metric(self, metric_kind: str) -> "Cover":
        return Cover(self.elements, self.net, metric_kind, self.params)

    def to_json(self) -> dict[str, Any]:
        return {
            "schema_version": 1,
            "metric_kind": self.metric_kind,
            "params": self.params.to_json(),
            "net": [end_to_json(x) for x in self.net],
            "elements": [
                {"members": sorted(e.members), "color": e.color, "descriptor": e.descriptor}
                for e in self.elements
            ],
        }

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "Cover":
        if doc.get("schema_version") != 1:
            raise InvalidSpecError("unsupported cover schema_version")
        return cls(
            elements=tuple(
                CoverElement(frozenset(e["members"]), int(e["color"]), e.get("descriptor"))
                for e in doc["elements"]
            ),
            net=tuple(end_from_json(x) for x in doc["net"]),
            metric_kind=doc["metric_kind"],
            params=MetricParams.from_json(doc["params"]),
        )


@dataclass(frozen=True)
class CoverStats:
    scale: float | None
    mesh: float
    lebesgue: float
    order: int
    capacity: float
    min_family_separation: tuple[float, ...]
    net_spacing: float
    unbounded_elements: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "scale": self.scale,
            "mesh": self.mesh,
            "lebesgue": self.lebesgue,
            "order": self.order,
            "capacity": self.capacity,
            "min_family_separation": list(self.min_family_separation),
            "net_spacing": self.net_spacing,
            "unbounded_elements": self.unbounded_elements,
        }


def distance_matrix(space: Space, metric_kind: str, params: MetricParams, net: Sequence) -> np.ndarray:
    if metric_kind == "visual":
        return visual_distance_matrix(space, params, net)
    if metric_kind == "moran":
        return moran_distance_matrix(space, params, net)
    raise InvalidSpecError(f"unknown metric kind {metric_kind!r}")


def net_spacing(dist: np.ndarray) -> float:
    """Largest nearest-neighbour distance in the net."""
    n = dist.shape[0]
    if n < 2:
        return 0.0
    d = dist + np.diag(np.full(n, np.inf))
    return float(d.min(axis=1).max())


def cover_stats(space: Space, cover: Cover, dist: np.ndarray | None = None,
                scale: float | None = None) -> CoverStats:
    """Mesh, Lebesgue number, order, capacity and per-color separation.

    The Lebesgue number is measured against net points only, which
    overestimates the continuum value by at most the recorded net spacing.
    """
    if dist is None:
        dist = distance_matrix(space, cover.metric_kind, cover.params, cover.net)
    n = len(cover.net)
    members = [np.fromiter(sorted(e.members), dtype=int) for e in cover.elements]

    mesh = max(float(dist[np.ix_(m, m)].max()) for m in members)

    multiplicity = np.zeros(n, dtype=int)
    for m in members:
        multiplicity[m] += 1
    order = int(multiplicity.max())

    depth = np.zeros(n)
    unbounded = 0
    all_idx = np.arange(n)
    for m in members:
        outside = np.setdiff1d(all_idx, m, assume_unique=True)
        if outside.size == 0:
            unbounded += 1
            depth[m] = np.inf
            continue
        d = dist[np.ix_(m, outside)].min(axis=1)
        depth[m] = np.maximum(depth[m], d)
    lebesgue = float(depth.min())

    if math.isinf(lebesgue):
        capacity = math.inf
    elif mesh == 0:
        capacity = math.inf if lebesgue > 0 else 0.0
    else:
        capacity = lebesgue / mesh

    seps = []
    for color in range(cover.n_colors):
        same = [m for m, e in zip(members, cover.elements) if e.color == color]
        best = math.inf
        for i in range(len(same)):
            for j in range(i + 1, len(same)):
                best = min(best, float(dist[np.ix_(same[i], same[j])].min()))
        seps.append(best)

    return CoverStats(scale, mesh, lebesgue, order, capacity, tuple(seps), net_spacing(dist), unbounded)


def brute_force_order(cover: Cover) -> int:
    return max(sum(1 for e in cover.elements if x in e.members) for x in range(len(cover.net)))


# ---------------------------------------------------------------------------
# greedy generation
# ---------------------------------------------------------------------------


def cylinder_groups(net: Sequence[TreeEnd], k: int) -> list[list[int]]:
    """Group tree-net indices by their first ``k`` labels, in first-seen order."""
    groups: dict[tuple[int, ...], list[int]] = {}
    for i, xi in enumerate(net):
        groups.setdefault(xi.prefix(k), []).append(i)
    return list(groups.values())


def greedy_colored_cover(space: Space, metric_kind: str, params: MetricParams, net: Sequence,
                         L: float, n_colors: int, *, radius: float | None = None,
                         groups: Sequence[Sequence[int]] | None = None,
                         dist: np.ndarray | None = None) -> Cover:
    """Cover whose same-color elements are pairwise at least ``L`` apart.

    Elements are built by seeding the first uncovered net index and absorbing
    every uncovered point within ``radius`` of the seed, or taken from
    ``groups`` when given.  Each element receives the lowest color whose
    elements are all ``L``-separated from it.  Without an explicit radius the
    multiples of ``L`` in ``RADIUS_LADDER`` are tried in order.
    """
    if not L > 0:
        raise ValueError("L must be positive")
    if n_colors < 1:
        raise ValueError("need at least one color")
    if dist is None:
        dist = distance_matrix(space, metric_kind, params, net)
    if radius is None and groups is None:
        failure = None
        for factor in RADIUS_LADDER:
            try:
                return greedy_colored_cover(space, metric_kind, params, net, L, n_colors,
                                            radius=factor * L, dist=dist)
            except InsufficientColors as exc:
                failure = failure or exc
        raise failure
    n = len(net)

    if groups is None:
        uncovered = np.ones(n, dtype=bool)
        blocks = []
        for seed in range(n):
            if not uncovered[seed]:
                continue
            block = np.flatnonzero(uncovered & (dist[seed] <= radius + SEPARATION_SLACK))
            uncovered[block] = False
            blocks.append(block)
    else:
        blocks = [np.asarray(sorted(g), dtype=int) for g in groups]

    by_color: list[list[np.ndarray]] = [[] for _ in range(n_colors)]
    elements = []
    for block in blocks:
        for color in range(n_colors):
            if all(dist[np.ix_(block, other)].min() >= L - SEPARATION_SLACK for other in by_color[color]):
                break
        else:
            raise InsufficientColors(
                f"no color among {n_colors} keeps the element seeded at net index {int(block[0])} "
                f"{L}-separated", point=int(block[0]))
        by_color[color].append(block)
        elements.append(CoverElement(frozenset(block.tolist()), color))

    used = sorted({e.color for e in elements})
    relabel = {c: i for i, c in enumerate(used)}
    elements = [CoverElement(e.members, relabel[e.color], e.descriptor) for e in elements]
    return Cover(tuple(elements), tuple(net), metric_kind, params)


# ---------------------------------------------------------------------------
# capacity dimension witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileEntry:
    scale: float
    families: int
    radius: float
    mesh: float
    bound_ratio: float
    separation: float


@dataclass(frozen=True)
class CdimProfile:
    entries: tuple[ProfileEntry, ...]
    net_spacing: float

    @property
    def families(self) -> tuple[int, ...]:
        return tuple(e.families for e in self.entries)

    @property
    def estimate(self) -> int:
        return max(self.families) - 1

    @property
    def c_prime(self) -> float:
        return max(e.bound_ratio for e in self.entries)


def cdim_profile(space: Space, metric_kind: str, params: MetricParams, net: Sequence,
                 scales: Sequence[float], max_order: int, *, max_bound: float = 4.0,
                 dist: np.ndarray | None = None,
                 seeding: Callable[[float], Sequence[Sequence[int]]] | None = None) -> CdimProfile:
    """Fewest colors admitting an ``L``-separated, ``max_bound * L``-bounded
    greedy cover at each scale ``L``.

    By default elements are grown as balls whose radius runs over
    ``RADIUS_LADDER``.  ``seeding(L)`` may instead supply the candidate
    elements at each scale, which are then only colored.  The maximum over
    scales minus one is an upper-bound witness for the capacity dimension of
    the sampled boundary.
    """
    if list(scales) != sorted(scales, reverse=True):
        raise ValueError("scales must be descending")
    if dist is None:
        dist = distance_matrix(space, metric_kind, params, net)
    spacing = net_spacing(dist)
    diameter = float(dist.max())
    entries = []
    for lam in scales:
        if lam <= spacing:
            raise ResolutionError(f"scale {lam} is not above the net spacing {spacing:.6g}")
        if max_bound * lam >= diameter:
            # a single element would already be admissible
            raise ResolutionError(f"scale {lam} is too coarse for a net of diameter {diameter:.6g}")
        attempts = ([(None, seeding(lam))] if seeding is not None
                    else [(factor, None) for factor in RADIUS_LADDER])
        found = None
        for families in range(1, max_order + 1):
            for factor, groups in attempts:
                try:
                    cover = greedy_colored_cover(
                        space, metric_kind, params, net, lam, families,
                        radius=None if factor is None else factor * lam, groups=groups, dist=dist)
                except InsufficientColors:
                    continue
                stats = cover_stats(space, cover, dist, scale=lam)
                if stats.mesh <= max_bound * lam:
                    sep = min(stats.min_family_separation)
                    found = ProfileEntry(lam, cover.n_colors,
                                         math.nan if factor is None else factor * lam,
                                         stats.mesh, stats.mesh / lam, sep)
                    break
            if found:
                break
        if found is None:
            raise InsufficientColors(f"no greedy cover with <= {max_order} families at scale {lam}",
                                     point=-1)
        entries.append(found)
    return CdimProfile(tuple(entries), spacing)


# ---------------------------------------------------------------------------
# visual -> Moran capacity transfer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransferReport:
    preconditions_met: bool
    reason: str
    c: float
    k: float
    scale: float
    mesh_moran: float
    lebesgue_moran: float
    capacity_moran: float
    required_capacity: float
    f1_scale: float = math.nan
    f2_scale: float = math.nan
    f1_c_scale: float = math.nan
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.preconditions_met and all(self.checks.values())


def capacity_transfer_check(stats_v: CoverStats, stats_m: CoverStats,
                            consts: SandwichConstants, tol: float = 1e-12) -> TransferReport:
    """Check that a visual-metric cover keeps capacity above ``c/(1+k)``
    when re-measured in Moran's metric.

    ``c`` is the visual capacity capped at 1; concavity only gives
    ``f(cx) >= c f(x)`` for ``c <= 1``.
    """
    lam = stats_v.mesh
    c = min(stats_v.capacity, 1.0)
    required = c / (1.0 + consts.k)
    limit = min(math.exp(-2.0), consts.B)
    common = dict(c=c, k=consts.k, scale=lam, mesh_moran=stats_m.mesh,
                  lebesgue_moran=stats_m.lebesgue, capacity_moran=stats_m.capacity,
                  required_capacity=required)
    if not 0 < lam <= limit:
        return TransferReport(False, f"visual mesh {lam:.6g} not in (0, min(e^-2, B) = {limit:.6g}]",
                              **common)
    f1, f2 = comparison_bounds(consts, lam)
    f1c, _ = comparison_bounds(consts, c * lam)
    checks = {
        "mesh_M < f2(lambda)": stats_m.mesh <= f2 + tol,
        "lebesgue_M > f1(c lambda)": stats_m.lebesgue >= f1c - tol,
        "f1(c lambda) >= c f1(lambda)": f1c >= c * f1 - tol,
        "f2(lambda) < 1": f2 < 1.0,
        "capacity_M > c/(1+k)": stats_m.capacity > required,
    }
    return TransferReport(True, "", f1_scale=f1, f2_scale=f2, f1_c_scale=f1c, checks=checks, **common)
