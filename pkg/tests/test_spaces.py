import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catbound.errors import DomainError, HorizonExceeded, InvalidSpecError, PointSpaceMismatch
from catbound.experiments import random_distinct_ends, random_end
from catbound.spaces import (
    AngleEnd,
    LineEnd,
    LinePoint,
    PlanePoint,
    ProductEnd,
    ProductPoint,
    SpaceSpec,
    TreeEnd,
    TreePoint,
    boundary_net,
    build_space,
    distance,
    end_from_json,
    end_to_json,
    parse_end,
    product_spec,
    ray_eval,
    tree_spec,
)

TREE = build_space(tree_spec(3, 8))
PLANE = build_space(SpaceSpec("plane"))
LINE = build_space(SpaceSpec("line", delta=0.0))
H2 = build_space(SpaceSpec("hyperbolic_plane", delta=math.log(3)))
PRODUCT = build_space(product_spec(tree_spec(3, 8), tree_spec(3, 8)))
ALL = {"tree": TREE, "plane": PLANE, "line": LINE, "h2": H2, "product": PRODUCT}


class TestSpecs:
    def test_tree_has_zero_delta(self):
        assert TREE.delta == 0

    def test_plane_has_no_delta(self):
        assert PLANE.delta is None

    @pytest.mark.parametrize("doc", [
        {"kind": "tree", "tree_branching": 1},
        {"kind": "tree", "tree_branching": 3, "truncation_depth": 1},
        {"kind": "tree", "tree_branching": 3, "delta": 0.5},
        {"kind": "plane", "delta": 1.0},
        {"kind": "hyperbolic_plane", "delta": 0.0},
        {"kind": "cube"},
        {"kind": "product", "factors": [{"kind": "plane"}]},
        {"kind": "tree", "tree_branching": 2, "colour": "red"},
    ])
    def test_invalid_specs_are_rejected(self, doc):
        with pytest.raises(InvalidSpecError):
            build_space(SpaceSpec.from_json(doc))

    def test_spec_round_trip(self):
        spec = product_spec(tree_spec(2, 5, Fraction(1, 2)), SpaceSpec("plane"))
        assert SpaceSpec.from_json(spec.to_json()) == spec

    def test_product_of_line_and_tree_carries_no_delta(self):
        prod = build_space(product_spec(SpaceSpec("line", delta=0.0), tree_spec(2, 5)))
        assert prod.delta is None


class TestDistance:
    def test_tree_meet_at_depth_one(self):
        p = TREE.point_at((0, 1, 2), 3)
        q = TREE.point_at((0, 2, 0), 3)
        assert TREE.distance(p, q) == 4
        assert isinstance(TREE.distance(p, q), Fraction)

    def test_plane_345(self):
        assert PLANE.distance(PlanePoint(3, 0), PlanePoint(0, 4)) == 5

    @pytest.mark.parametrize("name", sorted(ALL))
    def test_self_distance_is_zero(self, name):
        space = ALL[name]
        p = space.ray_eval(random_end(space, np.random.default_rng(1)), 2.0)
        assert distance(space, p, p) == 0

    def test_product_is_euclidean_combination(self):
        rng = np.random.default_rng(3)
        f = PRODUCT.factors[0]
        for _ in range(100):
            a, b = random_distinct_ends(PRODUCT, rng, 2)
            p = PRODUCT.ray_eval(a, float(rng.uniform(0, 7)))
            q = PRODUCT.ray_eval(b, float(rng.uniform(0, 7)))
            want = math.hypot(float(f.distance(p.first, q.first)), float(f.distance(p.second, q.second)))
            assert PRODUCT.distance(p, q) == pytest.approx(want, abs=1e-12)

    def test_mismatched_point_is_rejected(self):
        with pytest.raises(PointSpaceMismatch):
            PLANE.distance(LinePoint(1.0), PlanePoint(0, 0))

    def test_h2_antipodal(self):
        p, q = H2.ray_eval(AngleEnd(0.0), 1.0), H2.ray_eval(AngleEnd(math.pi), 1.0)
        assert H2.distance(p, q) == pytest.approx(2.0, abs=1e-12)


class TestRays:
    @pytest.mark.parametrize("name", sorted(ALL))
    def test_ray_starts_at_basepoint(self, name):
        space = ALL[name]
        xi = random_end(space, np.random.default_rng(0))
        assert distance(space, ray_eval(space, xi, 0), space.basepoint) == 0

    def test_tree_ray_example(self):
        p = TREE.ray_eval(TreeEnd((0, 1, 0)), 2.5)
        assert p == TreePoint((0, 1), Fraction(1, 2), 0)

    def test_plane_ray(self):
        p = PLANE.ray_eval(AngleEnd(0.3), 2.0)
        assert (p.x, p.y) == pytest.approx((2 * math.cos(0.3), 2 * math.sin(0.3)))

    def test_horizon_is_a_hard_failure(self):
        with pytest.raises(HorizonExceeded):
            TREE.ray_eval(TreeEnd(()), 8.5)

    def test_product_ray_uses_factor_times(self):
        xi = ProductEnd(TreeEnd((1,)), TreeEnd((2,)), math.pi / 3)
        p = PRODUCT.ray_eval(xi, 4.0)
        f = PRODUCT.factors[0]
        assert float(f.distance(p.first, f.basepoint)) == pytest.approx(2.0)
        assert float(f.distance(p.second, f.basepoint)) == pytest.approx(4.0 * math.sin(math.pi / 3))


class TestNets:
    def test_ternary_depth_two(self):
        net = boundary_net(TREE, 2)
        assert len(net) == 9 and len(set(net)) == 9

    def test_plane_four_angles(self):
        assert [e.theta for e in boundary_net(PLANE, 4)] == pytest.approx([0, math.pi / 2, math.pi, 3 * math.pi / 2])

    def test_product_net_cardinality(self):
        assert len(boundary_net(PRODUCT, (1, 1, 3))) == 27

    def test_tree_net_beyond_truncation(self):
        with pytest.raises(Exception):
            boundary_net(TREE, 9)

    def test_line_has_only_two_ends(self):
        with pytest.raises(DomainError):
            random_distinct_ends(LINE, np.random.default_rng(0), 3)

    def test_line_net(self):
        assert boundary_net(LINE) == [LineEnd(1), LineEnd(-1)]


class TestEnds:
    def test_canonical_form(self):
        assert TreeEnd((0, 1), (0, 1)) == TreeEnd((), (0, 1))
        assert TreeEnd((), (1, 1)) == TreeEnd((), (1,))

    @pytest.mark.parametrize("text,want", [("012", TreeEnd((0, 1, 2))), ("01(21)", TreeEnd((0, 1), (2, 1)))])
    def test_parse_tree(self, text, want):
        assert parse_end(TREE, text) == want

    def test_parse_product(self):
        xi = parse_end(PRODUCT, "0;1;0.5")
        assert xi == ProductEnd(TreeEnd((0,)), TreeEnd((1,)), 0.5)

    def test_json_round_trip(self):
        rng = np.random.default_rng(5)
        for space in ALL.values():
            xi = random_end(space, rng)
            assert end_from_json(end_to_json(xi)) == xi


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, name=st.sampled_from(sorted(ALL)))
def test_metric_axioms(seed, name):
    space = ALL[name]
    rng = np.random.default_rng(seed)
    pts = [space.ray_eval(xi, float(rng.uniform(0, min(7.0, space.ray_horizon(xi)))))
           for xi in (random_end(space, rng) for _ in range(3))]
    x, y, z = pts
    assert distance(space, x, y) == pytest.approx(float(distance(space, y, x)), abs=1e-9)
    assert distance(space, x, y) <= distance(space, x, z) + distance(space, z, y) + 1e-9


@settings(max_examples=60, deadline=None)
@given(seed=seeds, name=st.sampled_from(sorted(ALL)))
def test_unit_speed(seed, name):
    space = ALL[name]
    rng = np.random.default_rng(seed)
    xi = random_end(space, rng)
    s, t = sorted(float(x) for x in rng.uniform(0, min(7.0, space.ray_horizon(xi)), size=2))
    assert float(distance(space, space.ray_eval(xi, s), space.ray_eval(xi, t))) == pytest.approx(t - s, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, name=st.sampled_from(sorted(ALL)))
def test_displacement_ratio(seed, name):
    space = ALL[name]
    rng = np.random.default_rng(seed)
    xi, eta = random_distinct_ends(space, rng, 2) if name != "line" else (LineEnd(1), LineEnd(-1))
    t = float(rng.uniform(0.01, min(7.0, space.ray_horizon(xi), space.ray_horizon(eta))))
    s = float(rng.uniform(0, t))
    near, far = space.ray_distance(xi, s, eta, s), space.ray_distance(xi, t, eta, t)
    assert near <= s / t * far + 1e-9
    if name in ("plane", "line"):
        assert near == pytest.approx(s / t * far, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, name=st.sampled_from(["tree", "line", "h2"]))
def test_displacement_and_gromov_product_are_monotone(seed, name):
    space = ALL[name]
    rng = np.random.default_rng(seed)
    xi, eta = random_distinct_ends(space, rng, 2) if name != "line" else (LineEnd(1), LineEnd(-1))
    grid = np.linspace(0, 7, 29)
    d = [space.ray_distance(xi, t, eta, t) for t in grid]
    gp = [t - x / 2 for t, x in zip(grid, d)]
    assert all(b >= a - 1e-12 for a, b in zip(d, d[1:]))
    assert all(b >= a - 1e-12 for a, b in zip(gp, gp[1:]))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, name=st.sampled_from(sorted(ALL)))
def test_fast_ray_distance_matches_points(seed, name):
    space = ALL[name]
    rng = np.random.default_rng(seed)
    xi, eta = random_distinct_ends(space, rng, 2) if name != "line" else (LineEnd(1), LineEnd(-1))
    s, t = (float(x) for x in rng.uniform(0, 6, size=2))
    slow = float(space.distance(space.ray_eval(xi, s), space.ray_eval(eta, t)))
    assert space.ray_distance(xi, s, eta, t) == pytest.approx(slow, abs=1e-9)
