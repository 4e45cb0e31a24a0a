import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catbound.buildings import (
    MINUS_END,
    PLUS_END,
    Neighborhood,
    Rectangle,
    Segment,
    apartment_boundary_net,
    apartment_cover,
    apartment_retraction,
    build_building,
    building_bounds,
    component_bound_check,
    default_bounds,
    preimage_components,
    pullback_bounds_check,
    pullback_cover,
    retract_end,
    to_apartment_point,
)
from catbound.errors import InvalidSpecError
from catbound.experiments import random_end
from catbound.spaces import (
    LineEnd,
    ProductEnd,
    SpaceSpec,
    TreeEnd,
    build_space,
    product_spec,
    tree_spec,
)

TREE = build_space(tree_spec(3, 8))
PROD = build_space(product_spec(tree_spec(2, 5), tree_spec(2, 5)))
BT = build_building(TREE)
BP = build_building(PROD)


class TestModel:
    def test_rank(self):
        assert (BT.rank, BP.rank) == (1, 2)

    def test_chamber_diameter(self):
        assert BT.chamber_diameter == 1.0
        assert BP.chamber_diameter == pytest.approx(math.sqrt(2))

    def test_only_trees_and_products_of_trees(self):
        with pytest.raises(InvalidSpecError):
            build_building(build_space(SpaceSpec("plane")))
        with pytest.raises(InvalidSpecError):
            build_building(build_space(product_spec(tree_spec(2, 5), SpaceSpec("plane"))))

    def test_bounds(self):
        bb = building_bounds(2.0, 1.0, 2.0, 1.0)
        assert bb.r == 2.0 and bb.S_prime == pytest.approx(3.0) and bb.c_prime == pytest.approx(8.0)
        with pytest.raises(InvalidSpecError):
            building_bounds(2.0, 1.0, 2.0, 1.0, r=1.0)

    def test_default_bounds_for_products(self):
        assert default_bounds(BP, 2.0, 1.0).S == pytest.approx(2 * math.sqrt(2))


class TestRetraction:
    def test_apartment_is_fixed(self):
        for end in (PLUS_END, MINUS_END):
            p = TREE.ray_eval(end, 3)
            assert apartment_retraction(BT, p) == p

    def test_tree_side(self):
        assert to_apartment_point(BT, TREE.ray_eval(TreeEnd((0, 2, 1)), 2.5)).x == 2.5
        assert to_apartment_point(BT, TREE.ray_eval(TreeEnd((2, 0)), 1.5)).x == -1.5

    def test_retract_end(self):
        assert retract_end(BT, TreeEnd((2, 1))) == LineEnd(-1)
        zeta = ProductEnd(TreeEnd((1,)), TreeEnd((0,)), math.pi / 6)
        assert retract_end(BP, zeta).theta == pytest.approx(math.pi - math.pi / 6)

    def test_apartment_net(self):
        assert apartment_boundary_net(BT, TREE.boundary_net(2)) == [LineEnd(1), LineEnd(-1)]
        assert len(apartment_boundary_net(BP, PROD.boundary_net((1, 1, 3)))) == 12


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), which=st.sampled_from(["tree", "product"]))
def test_retraction_is_a_contraction_fixing_the_base(seed, which):
    b = BT if which == "tree" else BP
    rng = np.random.default_rng(seed)
    x, y = (b.space.ray_eval(random_end(b.space, rng), float(rng.uniform(0, 5))) for _ in range(2))
    rx, ry = apartment_retraction(b, x), apartment_retraction(b, y)
    o = b.basepoint
    assert float(b.space.distance(rx, o)) == pytest.approx(float(b.space.distance(x, o)), abs=1e-12)
    assert float(b.space.distance(rx, ry)) <= float(b.space.distance(x, y)) + 1e-12


class TestComponents:
    @pytest.mark.parametrize("lo,hi,count", [(-1, 1, 1), (1, 2, 1), (2, 3, 3), (-3, -2, 6)])
    def test_tree_counts(self, lo, hi, count):
        comps = preimage_components(BT, Segment(lo, hi), Fraction(1, 4))
        assert len(comps) == count
        assert max(comps.diameters) == pytest.approx(2.0)

    def test_component_lookup(self):
        comps = preimage_components(BT, Segment(2, 3), Fraction(1, 4))
        a = comps.component_of(TREE.ray_eval(TreeEnd((0, 0)), 2.5))
        b = comps.component_of(TREE.ray_eval(TreeEnd((0, 0, 2)), 3))
        c = comps.component_of(TREE.ray_eval(TreeEnd((0, 1)), 2.5))
        assert a == b != c

    @pytest.mark.parametrize("lo,hi", [(-2, 3), (0.5, 4), (-5, -1)])
    def test_tree_bound(self, lo, hi):
        assert component_bound_check(BT, Segment(lo, hi), Fraction(1, 4)).passed

    def test_product_rectangle(self):
        rep = component_bound_check(BP, Rectangle(0.5, 2, -1, 1), Fraction(1, 2))
        assert rep.passed and len(rep.diameters) >= 1

    def test_neighborhood_slices(self):
        nb = Neighborhood(((2.0, 0.0),), 0.5)
        assert nb.contains((2.2, 0.1)) and not nb.contains((1.0, 0.0))
        (lo, hi), = nb.slice(2.0)
        assert (lo, hi) == pytest.approx((-0.5, 0.5))


class TestPullback:
    @pytest.mark.parametrize("L", [2.0, 1.0, 0.5])
    def test_tree_pullback(self, L):
        net = TREE.boundary_net(4)
        cover = apartment_cover(BT, net, L, 1.0, 2)
        pulled = pullback_cover(BT, cover, L, 2.0, 1.0, net)
        rep = pullback_bounds_check(BT, pulled, L, 2.0, 1.0, default_bounds(BT, 2.0, 1.0), net)
        assert rep.passed, rep.checks
        assert rep.families_out == rep.families_in
        covered = set().union(*(e.members for e in pulled.elements))
        assert covered == set(range(len(net)))
