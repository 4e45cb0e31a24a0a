"""Pointed model CAT(0) spaces: rooted metric trees, the line, the plane,
the hyperbolic plane and binary products.

Every space is an immutable handle with a basepoint, a distance, unit-speed
rays from the basepoint and a finite boundary net.  Tree arithmetic is exact
(:class:`fractions.Fraction`); the other spaces use floats.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Union

from .errors import HorizonExceeded, InvalidSpecError, PointSpaceMismatch, ResolutionError

KINDS = ("tree", "line", "plane", "hyperbolic_plane", "product")

#: default slim-triangle constant for the hyperbolic plane
H2_DEFAULT_DELTA = math.log(3.0)

#: rays in H^2 are cut off here; sinh(r1) * sinh(r2) overflows near r = 355
H2_HORIZON = 300.0

TWO_PI = 2.0 * math.pi


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float) and math.isfinite(x):
        return Fraction(x)
    raise InvalidSpecError(f"cannot convert {x!r} to an exact rational")


# ---------------------------------------------------------------------------
# specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    tree_branching: int | None = None
    edge_length: Fraction = Fraction(1)
    truncation_depth: int = 8
    delta: float | None = None
    factors: tuple["SpaceSpec", "SpaceSpec"] | None = None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise InvalidSpecError(f"unknown space kind {self.kind!r}")
        if not isinstance(self.truncation_depth, int) or self.truncation_depth < 2:
            raise InvalidSpecError("truncation_depth must be an integer >= 2")
        if self.kind == "tree":
            if not isinstance(self.tree_branching, int) or self.tree_branching < 2:
                raise InvalidSpecError("tree_branching must be an integer >= 2")
            if _as_fraction(self.edge_length) <= 0:
                raise InvalidSpecError("edge_length must be positive")
        if self.kind in ("tree", "line") and self.delta not in (None, 0, 0.0):
            raise InvalidSpecError(f"{self.kind} is 0-hyperbolic; delta must be 0")
        if self.kind == "plane" and self.delta is not None:
            raise InvalidSpecError("the Euclidean plane is not Gromov hyperbolic")
        if self.kind == "hyperbolic_plane" and self.delta is not None and not self.delta > 0:
            raise InvalidSpecError("hyperbolic plane needs delta > 0")
        if self.kind == "product":
            if self.factors is None or len(self.factors) != 2:
                raise InvalidSpecError("product needs exactly two factors")
            if self.delta is not None:
                raise InvalidSpecError("products of unbounded factors contain flats; no delta")
            for f in self.factors:
                if not isinstance(f, SpaceSpec):
                    raise InvalidSpecError("product factors must be SpaceSpec values")
                f.validate()
        elif self.factors is not None:
            raise InvalidSpecError("only products take factors")

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kind": self.kind, "truncation_depth": self.truncation_depth}
        if self.kind == "tree":
            doc["tree_branching"] = self.tree_branching
            doc["edge_length"] = str(_as_fraction(self.edge_length))
        if self.delta is not None:
            doc["delta"] = self.delta
        if self.factors is not None:
            doc["factors"] = [f.to_json() for f in self.factors]
        return doc

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "SpaceSpec":
        if not isinstance(doc, dict) or "kind" not in doc:
            raise InvalidSpecError("space document must be an object with a 'kind'")
        known = {"kind", "tree_branching", "edge_length", "truncation_depth", "delta",
                 "factors", "schema_version"}
        extra = set(doc) - known
        if extra:
            raise InvalidSpecError(f"unknown space keys: {sorted(extra)}")
        factors = doc.get("factors")
        if factors is not None:
            if not isinstance(factors, list) or len(factors) != 2:
                raise InvalidSpecError("'factors' must be a list of two space documents")
            factors = (cls.from_json(factors[0]), cls.from_json(factors[1]))
        try:
            edge = _as_fraction(doc.get("edge_length", 1))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidSpecError(f"bad edge_length: {exc}") from None
        spec = cls(
            kind=doc["kind"],
            tree_branching=doc.get("tree_branching"),
            edge_length=edge,
            truncation_depth=doc.get("truncation_depth", 8),
            delta=doc.get("delta"),
            factors=factors,
        )
        spec.validate()
        return spec


def tree_spec(branching: int, depth: int, edge_length=1) -> SpaceSpec:
    return SpaceSpec("tree", tree_branching=branching, truncation_depth=depth,
                     edge_length=_as_fraction(edge_length))


def product_spec(first: SpaceSpec, second: SpaceSpec) -> SpaceSpec:
    depth = max(first.truncation_depth, second.truncation_depth)
    return SpaceSpec("product", truncation_depth=depth, factors=(first, second))


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreePoint:
    """Vertex ``path`` (labels from the root), moved ``offset`` down the edge
    to child ``toward``.  ``offset == 0`` means the vertex itself."""

    path: tuple[int, ...]
    offset: Fraction = Fraction(0)
    toward: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(self.path))
        object.__setattr__(self, "offset", _as_fraction(self.offset))
        if self.offset == 0:
            object.__setattr__(self, "toward", None)
        elif self.toward is None:
            raise InvalidSpecError("a tree point off a vertex needs the child label 'toward'")

    def key(self, edge: Fraction) -> tuple[tuple[int, ...], Fraction]:
        """(labels of the lower end of the carrying edge, depth)."""
        if self.offset:
            return self.path + (self.toward,), len(self.path) * edge + self.offset
        return self.path, len(self.path) * edge


@dataclass(frozen=True)
class LinePoint:
    x: float


@dataclass(frozen=True)
class PlanePoint:
    x: float
    y: float


@dataclass(frozen=True)
class PolarPoint:
    """Point of H^2 in geodesic polar coordinates about the basepoint."""

    r: float
    theta: float


@dataclass(frozen=True)
class ProductPoint:
    first: Any
    second: Any


Point = Union[TreePoint, LinePoint, PlanePoint, PolarPoint, ProductPoint]


# ---------------------------------------------------------------------------
# boundary points
# ---------------------------------------------------------------------------


def _primitive_period(period: tuple[int, ...]) -> tuple[int, ...]:
    n = len(period)
    for d in range(1, n + 1):
        if n % d == 0 and period[:d] * (n // d) == period:
            return period[:d]
    return period


@dataclass(frozen=True)
class TreeEnd:
    """Eventually periodic label sequence ``preperiod + period^inf``.

    Stored in canonical form, so two ends are equal iff their sequences are.
    """

    preperiod: tuple[int, ...]
    period: tuple[int, ...] = (0,)

    def __post_init__(self):
        pre = tuple(self.preperiod)
        per = tuple(self.period)
        if not per:
            raise InvalidSpecError("tree end period must be nonempty")
        per = _primitive_period(per)
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1:] + per[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    def label(self, i: int) -> int:
        n = len(self.preperiod)
        if i < n:
            return self.preperiod[i]
        return self.period[(i - n) % len(self.period)]

    def prefix(self, n: int) -> tuple[int, ...]:
        return tuple(self.label(i) for i in range(n))


@lru_cache(maxsize=1 << 18)
def divergence_index(xi: TreeEnd, eta: TreeEnd) -> int | None:
    """First label index where two ends differ; ``None`` if they are equal."""
    if xi == eta:
        return None
    # canonical ends that differ must differ within this many labels
    n = max(len(xi.preperiod), len(eta.preperiod)) + math.lcm(len(xi.period), len(eta.period))
    for i in range(n):
        if xi.label(i) != eta.label(i):
            return i
    raise AssertionError("distinct canonical ends agree on a full period")


@dataclass(frozen=True)
class LineEnd:
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidSpecError("line end sign must be +1 or -1")


@dataclass(frozen=True)
class AngleEnd:
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)


@dataclass(frozen=True)
class ProductEnd:
    """Ray ``t -> (g1(t cos alpha), g2(t sin alpha))``."""

    first: Any
    second: Any
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= math.pi / 2:
            raise InvalidSpecError("product end angle must lie in [0, pi/2]")


BoundaryPoint = Union[TreeEnd, LineEnd, AngleEnd, ProductEnd]


def angle_gap(a: float, b: float) -> float:
    """Angular separation in [0, pi]."""
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Space:
    spec: SpaceSpec

    kind = "abstract"

    @property
    def delta(self) -> float | None:
        return None

    @property
    def horizon(self) -> float:
        return math.inf

    @property
    def basepoint(self) -> Point:
        raise NotImplementedError

    def check_point(self, p) -> None:
        raise NotImplementedError

    def check_end(self, xi) -> None:
        raise NotImplementedError

    def distance(self, p, q):
        raise NotImplementedError

    def ray_eval(self, xi, t):
        raise NotImplementedError

    def boundary_net(self, resolution) -> list:
        raise NotImplementedError

    def ray_horizon(self, xi) -> float:
        """Largest ``t`` at which the ray towards ``xi`` can be evaluated."""
        return float(self.horizon)

    def pair_signature(self, xi, eta):
        """Hashable key such that pairs with equal keys have the same
        displacement function, or ``None`` when no such key is known."""
        return None

    def ray_distance(self, xi, s, eta, t) -> float:
        """Float distance between ``g_xi(s)`` and ``g_eta(t)``."""
        return float(self.distance(self.ray_eval(xi, s), self.ray_eval(eta, t)))

    def _check_t(self, t) -> None:
        if t < 0:
            raise ValueError("ray parameter must be nonnegative")
        if t > self.horizon:
            raise HorizonExceeded(f"t={float(t)} exceeds the horizon {float(self.horizon)}")


@dataclass(frozen=True, eq=False)
class TreeSpace(Space):
    kind = "tree"

    @property
    def branching(self) -> int:
        return self.spec.tree_branching

    @property
    def edge(self) -> Fraction:
        return _as_fraction(self.spec.edge_length)

    @property
    def delta(self) -> float:
        return 0.0

    @cached_property
    def horizon(self) -> Fraction:
        return self.spec.truncation_depth * self.edge

    @property
    def basepoint(self) -> TreePoint:
        return TreePoint(())

    def check_point(self, p) -> None:
        if not isinstance(p, TreePoint):
            raise PointSpaceMismatch(f"{p!r} is not a tree point")
        b = self.branching
        if any(not 0 <= c < b for c in p.path) or (p.toward is not None and not 0 <= p.toward < b):
            raise PointSpaceMismatch(f"labels of {p!r} out of range for branching {b}")
        if not 0 <= p.offset < self.edge:
            raise PointSpaceMismatch(f"offset of {p!r} must lie in [0, edge_length)")
        if p.key(self.edge)[1] > self.horizon:
            raise HorizonExceeded(f"{p!r} lies beyond the truncation horizon")

    def check_end(self, xi) -> None:
        if not isinstance(xi, TreeEnd):
            raise PointSpaceMismatch(f"{xi!r} is not a tree end")
        b = self.branching
        if any(not 0 <= c < b for c in xi.preperiod + xi.period):
            raise PointSpaceMismatch(f"labels of {xi!r} out of range for branching {b}")

    def distance(self, p: TreePoint, q: TreePoint) -> Fraction:
        self.check_point(p)
        self.check_point(q)
        return self.key_distance(p.key(self.edge), q.key(self.edge))

    def key_distance(self, k1, k2) -> Fraction:
        l1, d1 = k1
        l2, d2 = k2
        m = 0
        for a, b in zip(l1, l2):
            if a != b:
                break
            m += 1
        meet = min(m * self.edge, d1, d2)
        return d1 + d2 - 2 * meet

    def ray_eval(self, xi: TreeEnd, t) -> TreePoint:
        self.check_end(xi)
        t = _as_fraction(t)
        self._check_t(t)
        n = math.floor(t / self.edge)
        offset = t - n * self.edge
        toward = xi.label(n) if offset else None
        return TreePoint(xi.prefix(n), offset, toward)

    def point_at(self, labels, depth) -> TreePoint:
        """Point at ``depth`` on the geodesic from the root through ``labels``."""
        depth = _as_fraction(depth)
        n = math.floor(depth / self.edge)
        offset = depth - n * self.edge
        if n > len(labels) or (offset and n >= len(labels)):
            raise ValueError("labels too short for the requested depth")
        return TreePoint(tuple(labels[:n]), offset, labels[n] if offset else None)

    def end_gromov_product(self, xi: TreeEnd, eta: TreeEnd):
        """Exact Gromov product of two ends: depth of their divergence vertex."""
        self.check_end(xi)
        self.check_end(eta)
        i = divergence_index(xi, eta)
        return math.inf if i is None else i * self.edge

    def pair_signature(self, xi, eta):
        return ("divergence", divergence_index(xi, eta))

    def ray_distance(self, xi, s, eta, t) -> float:
        # both points lie on rays from the root, so they meet at depth
        # min(divergence depth, s, t)
        self.check_end(xi)
        self.check_end(eta)
        s, t = float(s), float(t)
        h = float(self.horizon)
        if s < 0 or t < 0:
            raise ValueError("ray parameter must be nonnegative")
        if s > h or t > h:
            raise HorizonExceeded(f"ray parameter exceeds the horizon {h}")
        i = divergence_index(xi, eta)
        g = math.inf if i is None else i * float(self.edge)
        return s + t - 2.0 * min(g, s, t)

    def boundary_net(self, resolution: int) -> list[TreeEnd]:
        """One end per depth-k cylinder, continued by the all-0 tail."""
        k = int(resolution)
        if k < 0:
            raise ResolutionError("net depth must be nonnegative")
        if k > self.spec.truncation_depth:
            raise ResolutionError(f"net depth {k} exceeds truncation depth {self.spec.truncation_depth}")
        return [TreeEnd(labels) for labels in itertools.product(range(self.branching), repeat=k)]


@dataclass(frozen=True, eq=False)
class LineSpace(Space):
    kind = "line"

    @property
    def delta(self) -> float:
        return 0.0

    @property
    def basepoint(self) -> LinePoint:
        return LinePoint(0.0)

    def check_point(self, p) -> None:
        if not isinstance(p, LinePoint):
            raise PointSpaceMismatch(f"{p!r} is not a point of the line")

    def check_end(self, xi) -> None:
        if not isinstance(xi, LineEnd):
            raise PointSpaceMismatch(f"{xi!r} is not an end of the line")

    def distance(self, p, q) -> float:
        self.check_point(p)
        self.check_point(q)
        return abs(p.x - q.x)

    def ray_eval(self, xi: LineEnd, t) -> LinePoint:
        self.check_end(xi)
        self._check_t(t)
        return LinePoint(xi.sign * float(t))

    def boundary_net(self, resolution=None) -> list[LineEnd]:
        return [LineEnd(1), LineEnd(-1)]


def _angle_net(m: int) -> list[AngleEnd]:
    if int(m) < 1:
        raise ResolutionError("angular net needs at least one point")
    return [AngleEnd(TWO_PI * j / m) for j in range(int(m))]


@dataclass(frozen=True, eq=False)
class PlaneSpace(Space):
    kind = "plane"

    @property
    def basepoint(self) -> PlanePoint:
        return PlanePoint(0.0, 0.0)

    def check_point(self, p) -> None:
        if not isinstance(p, PlanePoint):
            raise PointSpaceMismatch(f"{p!r} is not a point of the plane")

    def check_end(self, xi) -> None:
        if not isinstance(xi, AngleEnd):
            raise PointSpaceMismatch(f"{xi!r} is not a direction in the plane")

    def distance(self, p, q) -> float:
        self.check_point(p)
        self.check_point(q)
        return math.hypot(p.x - q.x, p.y - q.y)

    def ray_eval(self, xi: AngleEnd, t) -> PlanePoint:
        self.check_end(xi)
        self._check_t(t)
        t = float(t)
        return PlanePoint(t * math.cos(xi.theta), t * math.sin(xi.theta))

    def pair_signature(self, xi, eta):
        return ("gap", angle_gap(xi.theta, eta.theta))

    def ray_distance(self, xi, s, eta, t) -> float:
        self.check_end(xi)
        self.check_end(eta)
        s, t = float(s), float(t)
        if s < 0 or t < 0:
            raise ValueError("ray parameter must be nonnegative")
        # law of cosines in the stable form (s-t)^2 + 4 s t sin^2(dtheta/2)
        h = math.sin(angle_gap(xi.theta, eta.theta) / 2.0)
        return math.sqrt((s - t) ** 2 + 4.0 * s * t * h * h)

    def boundary_net(self, resolution: int) -> list[AngleEnd]:
        return _angle_net(resolution)


@dataclass(frozen=True, eq=False)
class HyperbolicPlane(Space):
    kind = "hyperbolic_plane"

    @property
    def delta(self) -> float:
        return H2_DEFAULT_DELTA if self.spec.delta is None else float(self.spec.delta)

    @property
    def horizon(self) -> float:
        return H2_HORIZON

    @property
    def basepoint(self) -> PolarPoint:
        return PolarPoint(0.0, 0.0)

    def check_point(self, p) -> None:
        if not isinstance(p, PolarPoint):
            raise PointSpaceMismatch(f"{p!r} is not a point of H^2")
        if p.r < 0:
            raise PointSpaceMismatch("polar radius must be nonnegative")
        if p.r > self.horizon:
            raise HorizonExceeded(f"{p!r} lies beyond the horizon")

    def check_end(self, xi) -> None:
        if not isinstance(xi, AngleEnd):
            raise PointSpaceMismatch(f"{xi!r} is not a direction in H^2")

    def distance(self, p, q) -> float:
        # cosh d = cosh r1 cosh r2 - sinh r1 sinh r2 cos(dtheta), rewritten as
        # sinh^2(d/2) = sinh^2((r1-r2)/2) + sinh r1 sinh r2 sin^2(dtheta/2)
        # to keep full relative precision for nearby points
        self.check_point(p)
        self.check_point(q)
        half = math.sinh((p.r - q.r) / 2.0)
        s = math.sin(angle_gap(p.theta, q.theta) / 2.0)
        w = half * half + math.sinh(p.r) * math.sinh(q.r) * s * s
        return 2.0 * math.asinh(math.sqrt(w))

    def ray_eval(self, xi: AngleEnd, t) -> PolarPoint:
        self.check_end(xi)
        self._check_t(t)
        return PolarPoint(float(t), xi.theta)

    def pair_signature(self, xi, eta):
        return ("gap", angle_gap(xi.theta, eta.theta))

    def ray_distance(self, xi, s, eta, t) -> float:
        self.check_end(xi)
        self.check_end(eta)
        self._check_t(s)
        self._check_t(t)
        s, t = float(s), float(t)
        half = math.sinh((s - t) / 2.0)
        h = math.sin(angle_gap(xi.theta, eta.theta) / 2.0)
        return 2.0 * math.asinh(math.sqrt(half * half + math.sinh(s) * math.sinh(t) * h * h))

    def boundary_net(self, resolution: int) -> list[AngleEnd]:
        return _angle_net(resolution)


@dataclass(frozen=True, eq=False)
class ProductSpace(Space):
    factors: tuple[Space, Space] = field(default=None)

    kind = "product"

    @property
    def horizon(self) -> float:
        return min(self.factors[0].horizon, self.factors[1].horizon)

    @property
    def basepoint(self) -> ProductPoint:
        return ProductPoint(self.factors[0].basepoint, self.factors[1].basepoint)

    def check_point(self, p) -> None:
        if not isinstance(p, ProductPoint):
            raise PointSpaceMismatch(f"{p!r} is not a product point")
        self.factors[0].check_point(p.first)
        self.factors[1].check_point(p.second)

    def check_end(self, xi) -> None:
        if not isinstance(xi, ProductEnd):
            raise PointSpaceMismatch(f"{xi!r} is not a product end")
        self.factors[0].check_end(xi.first)
        self.factors[1].check_end(xi.second)

    def distance(self, p, q) -> float:
        self.check_point(p)
        self.check_point(q)
        d1 = self.factors[0].distance(p.first, q.first)
        d2 = self.factors[1].distance(p.second, q.second)
        return math.sqrt(d1 * d1 + d2 * d2)

    def ray_eval(self, xi: ProductEnd, t) -> ProductPoint:
        self.check_end(xi)
        if t < 0:
            raise ValueError("ray parameter must be nonnegative")
        t = float(t)
        return ProductPoint(
            self.factors[0].ray_eval(xi.first, t * math.cos(xi.alpha)),
            self.factors[1].ray_eval(xi.second, t * math.sin(xi.alpha)),
        )

    def ray_horizon(self, xi) -> float:
        c, s = math.cos(xi.alpha), math.sin(xi.alpha)
        h1 = float(self.factors[0].ray_horizon(xi.first))
        h2 = float(self.factors[1].ray_horizon(xi.second))
        return min(h1 / c if c > 0 else math.inf, h2 / s if s > 0 else math.inf)

    def pair_signature(self, xi, eta):
        first = self.factors[0].pair_signature(xi.first, eta.first)
        second = self.factors[1].pair_signature(xi.second, eta.second)
        if first is None or second is None:
            return None
        return ("product", first, second, xi.alpha, eta.alpha)

    def ray_distance(self, xi, s, eta, t) -> float:
        self.check_end(xi)
        self.check_end(eta)
        s, t = float(s), float(t)
        d1 = self.factors[0].ray_distance(xi.first, s * math.cos(xi.alpha), eta.first, t * math.cos(eta.alpha))
        d2 = self.factors[1].ray_distance(xi.second, s * math.sin(xi.alpha), eta.second, t * math.sin(eta.alpha))
        return math.sqrt(d1 * d1 + d2 * d2)

    def boundary_net(self, resolution) -> list[ProductEnd]:
        """``resolution = (res1, res2, alpha_count)``.

        Angles are cell midpoints ``(j + 1/2) * (pi/2) / alpha_count`` so no
        net point sits on a factor boundary, where distinct labels would
        name the same ray.
        """
        try:
            r1, r2, g = resolution
        except (TypeError, ValueError):
            raise ResolutionError("product net resolution is (res1, res2, alpha_count)") from None
        g = int(g)
        if g < 1:
            raise ResolutionError("alpha grid needs at least one angle")
        n1 = self.factors[0].boundary_net(r1)
        n2 = self.factors[1].boundary_net(r2)
        alphas = [(j + 0.5) * (math.pi / 2) / g for j in range(g)]
        return [ProductEnd(a, b, al) for a in n1 for b in n2 for al in alphas]


def build_space(spec: SpaceSpec) -> Space:
    """Validate ``spec`` and return an immutable space handle."""
    if not isinstance(spec, SpaceSpec):
        raise InvalidSpecError("build_space expects a SpaceSpec")
    spec.validate()
    if spec.kind == "tree":
        return TreeSpace(spec)
    if spec.kind == "line":
        return LineSpace(spec)
    if spec.kind == "plane":
        return PlaneSpace(spec)
    if spec.kind == "hyperbolic_plane":
        return HyperbolicPlane(spec)
    return ProductSpace(spec, (build_space(spec.factors[0]), build_space(spec.factors[1])))


def distance(space: Space, p, q):
    return space.distance(p, q)


def ray_eval(space: Space, xi, t):
    return space.ray_eval(xi, t)


def boundary_net(space: Space, resolution=None) -> list:
    return space.boundary_net(resolution)


def displacement(space: Space, xi, eta, t) -> float:
    """Distance between the two rays at common time ``t``."""
    return space.ray_distance(xi, t, eta, t)


# ---------------------------------------------------------------------------
# serialization of points and boundary points
# ---------------------------------------------------------------------------


def end_to_json(xi) -> dict[str, Any]:
    if isinstance(xi, TreeEnd):
        return {"pre": list(xi.preperiod), "period": list(xi.period)}
    if isinstance(xi, LineEnd):
        return {"sign": xi.sign}
    if isinstance(xi, AngleEnd):
        return {"theta": xi.theta}
    if isinstance(xi, ProductEnd):
        return {"first": end_to_json(xi.first), "second": end_to_json(xi.second), "alpha": xi.alpha}
    raise PointSpaceMismatch(f"not a boundary point: {xi!r}")


def end_from_json(doc: dict[str, Any]):
    if "pre" in doc:
        return TreeEnd(tuple(doc["pre"]), tuple(doc["period"]))
    if "sign" in doc:
        return LineEnd(int(doc["sign"]))
    if "theta" in doc:
        return AngleEnd(float(doc["theta"]))
    if "alpha" in doc:
        return ProductEnd(end_from_json(doc["first"]), end_from_json(doc["second"]), float(doc["alpha"]))
    raise InvalidSpecError(f"unrecognized boundary point document {doc!r}")


def parse_end(space: Space, text: str):
    """Parse a command-line boundary point literal.

    tree: digits of the preperiod with an optional parenthesised period,
    e.g. ``012`` or ``01(21)`` (period defaults to ``0``); line: ``+``/``-``;
    plane and H^2: an angle in radians; product: ``first;second;alpha``.
    """
    text = text.strip()
    if isinstance(space, ProductSpace):
        parts = text.split(";")
        if len(parts) != 3:
            raise InvalidSpecError(f"product end literal needs 'first;second;alpha': {text!r}")
        return ProductEnd(parse_end(space.factors[0], parts[0]), parse_end(space.factors[1], parts[1]),
                          float(parts[2]))
    if isinstance(space, TreeSpace):
        pre, _, rest = text.partition("(")
        period = rest.rstrip(")") if rest else "0"
        try:
            xi = TreeEnd(tuple(int(c) for c in pre), tuple(int(c) for c in period))
        except ValueError:
            raise InvalidSpecError(f"bad tree end literal {text!r}") from None
        space.check_end(xi)
        return xi
    if isinstance(space, LineSpace):
        if text not in ("+", "-"):
            raise InvalidSpecError("line end literal is '+' or '-'")
        return LineEnd(1 if text == "+" else -1)
    try:
        return AngleEnd(float(text))
    except ValueError:
        raise InvalidSpecError(f"bad angle literal {text!r}") from None
