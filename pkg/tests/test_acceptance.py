"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line naming its criterion before
asserting.  Run ``python3 tests/test_acceptance.py`` for the lines alone.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from catbound.boundary import (
    MetricParams,
    estimate_R,
    moran_distance_matrix,
    rho_matrix,
    sandwich_constants,
    visual_distance_matrix,
)
from catbound.buildings import build_building
from catbound.errors import CatboundError
from catbound.experiments import (
    H2_DELTA,
    PRODUCT_RAY_DEPTH,
    ExperimentConfig,
    annulus_cover_experiment,
    annulus_summary,
    cdim_campaign,
    component_campaign,
    concavity_campaign,
    moran_oracle_campaign,
    product_space,
    pullback_campaign,
    random_distinct_ends,
    ray_ratio_campaign,
    run_verification_suite,
    sandwich_campaign,
    transfer_campaign,
)
from catbound.spaces import SpaceSpec, build_space, product_spec, tree_spec

# tolerances pinned by the acceptance criteria
TOL_TREE_VISUAL = 1e-12
TOL_ORACLE = 1e-9
TOL_SANDWICH = 1e-9
TOL_TREE_EQUALITY = 1e-12
TOL_RATIO = 1e-9
TOL_LEBESGUE = 1e-12
MESH_VARIATION = 1.05
MIN_TREE_SLOPE = 0.5
SECONDS_PER_ITEM = 60.0

PAIRS = 1000
SEED = 20240607


def _line(n: int, title: str, ok: bool, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'} criterion {n:2d} ({title}): {detail}"


def _report(capsys, n: int, title: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print("\n" + _line(n, title, ok, detail))
    assert ok, detail


# ---------------------------------------------------------------------------
# criterion bodies, each returning (ok, detail)
# ---------------------------------------------------------------------------


def criterion_01():
    tree = build_space(tree_spec(3, 8))
    net = tree.boundary_net(6)
    params = MetricParams(0.5, 0.0, 1.0)
    dv = visual_distance_matrix(tree, params, net)
    rho = rho_matrix(tree, params, net)
    off = ~np.eye(len(net), dtype=bool)
    err = float(np.abs(dv - rho)[off].max())
    return len(net) == 729 and err <= TOL_TREE_VISUAL, f"729-point net, max |d_v - rho| = {err:.2e}"


def criterion_02():
    rng = np.random.default_rng(SEED)
    spaces = {
        "tree": build_space(tree_spec(3, 24)),
        "plane": build_space(SpaceSpec("plane")),
        "h2": build_space(SpaceSpec("hyperbolic_plane", delta=H2_DELTA)),
    }
    errs = {}
    for key, space in spaces.items():
        pairs = [tuple(random_distinct_ends(space, rng, 2)) for _ in range(PAIRS)]
        errs[key] = moran_oracle_campaign(space, 1.0, pairs)
    ok = all(e <= TOL_ORACLE for e in errs.values())
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()) + f" over {PAIRS} pairs each"


def criterion_03():
    tree = build_space(tree_spec(3, 8))
    tnet = tree.boundary_net(5)
    R = estimate_R(tree, tnet, 1.0)
    t = sandwich_campaign(tree, MetricParams(0.5, 0.0, 1.0), tnet, R)
    tree_ok = t.passed(TOL_SANDWICH) and t.equality_error <= TOL_TREE_EQUALITY
    detail = (f"tree: {t.pairs_in_range} pairs in range, equality error {t.equality_error:.1e}"
              f" ({'ok' if tree_ok else 'violated'})")
    try:
        h2 = build_space(SpaceSpec("hyperbolic_plane", delta=H2_DELTA))
        hnet = h2.boundary_net(64)
        params = MetricParams(0.5, H2_DELTA, 1.0)
        consts = sandwich_constants(params, estimate_R(h2, hnet, 1.0))
        h = sandwich_campaign(h2, params, hnet, consts.R)
        h2_ok = h.passed(TOL_SANDWICH)
        detail += f"; H2: {h.pairs_in_range} pairs in range"
    except CatboundError as exc:
        h2_ok = False
        detail += f"; H2 at eps=0.5, delta=ln 3 is undefined: {exc}"
    return tree_ok and h2_ok, detail


def criterion_04():
    rows = {}
    for key, params, R in (("tree", MetricParams(0.5, 0.0, 1.0), 3.0),
                           ("h2", MetricParams(0.3, H2_DELTA, 1.0), 2.25)):
        c = sandwich_constants(params, R)
        rows[key] = concavity_campaign(c.a, c.b, 10_000)
    ok = all(r["max_second_derivative"] < 0 and r["scaling_excess"] <= 0 and r["split_excess"] <= 0
             for r in rows.values())
    worst = max(r["max_second_derivative"] for r in rows.values())
    return ok, f"max f'' = {worst:.3g} on 10^4 points, both inequalities hold for c = 0.1..0.9"


def criterion_05():
    rng = np.random.default_rng(SEED + 5)
    spaces = {
        "tree": build_space(tree_spec(3, 24)),
        "plane": build_space(SpaceSpec("plane")),
        "h2": build_space(SpaceSpec("hyperbolic_plane", delta=H2_DELTA)),
        "product": build_space(product_spec(tree_spec(2, 24), tree_spec(2, 24))),
    }
    res = {k: ray_ratio_campaign(s, rng, PAIRS) for k, s in spaces.items()}
    ok = all(r["excess"] <= TOL_RATIO for r in res.values()) and res["plane"]["equality_error"] <= TOL_RATIO
    worst = max(r["excess"] for r in res.values())
    return ok, f"worst excess {worst:.1e}, plane equality error {res['plane']['equality_error']:.1e}"


def criterion_06():
    rows = transfer_campaign(ExperimentConfig(), 20)
    ok = len(rows) == 20 and all(r.passed for _, r in rows)
    margin = min(r.capacity_moran - r.required_capacity for _, r in rows)
    return ok, f"{len(rows)} covers meet the preconditions, smallest capacity margin {margin:.3g}"


def criterion_07():
    cfg = ExperimentConfig()
    tree = build_space(tree_spec(3, 8))
    t_reps = pullback_campaign(build_building(tree), tree.boundary_net(4), (2.0, 1.0, 0.5), 2.0, 1.0)
    prod = build_space(product_spec(tree_spec(2, 5), tree_spec(2, 5)))
    p_reps = pullback_campaign(build_building(prod), prod.boundary_net((2, 2, 8)), (1.0, 0.75, 0.5),
                               2.0, 1.0, moran_space=product_space(cfg, PRODUCT_RAY_DEPTH))
    reps = t_reps + p_reps
    failed = [f"L={r.L}: {k}" for r in reps for k, v in r.checks.items() if not v]
    return not failed, f"{len(reps)} pullbacks (3 tree, 3 product), failures: {failed or 'none'}"


def criterion_08():
    rows = component_campaign(np.random.default_rng(SEED + 8), 50)
    ok = len(rows) == 50 and all(r["passed"] for r in rows)
    margin = max(r["max_diameter"] - r["bound"] for r in rows)
    return ok, f"50 segments, D = 0, M = edge length, worst diameter - bound = {margin:.3g}"


def criterion_09():
    prof = cdim_campaign(ExperimentConfig())
    fam = {k: set(p.families) for k, p in prof.items()}
    ok = fam["tree"] == {1} and fam["circle"] == {2} and fam["product"] == {2}
    return ok, ", ".join(f"{k} families {sorted(v)} (estimate {prof[k].estimate})" for k, v in fam.items())


def criterion_10():
    plane = annulus_cover_experiment("plane", 1.0, 10.0, (10, 20, 40, 80, 100))
    tree = annulus_cover_experiment("tree", 1.0, 10.0, (10, 20, 40, 80))
    ratio = annulus_summary(plane)["mesh_ratio"]
    leb = max(abs(r.lebesgue - 1.0) for r in plane)
    slope = annulus_summary(tree)["M_slope"]
    ok = ratio <= MESH_VARIATION and leb <= TOL_LEBESGUE and slope > MIN_TREE_SLOPE
    return ok, f"plane mesh ratio {ratio:.4f}, |L - A| = {leb:.1e}, tree M slope {slope:.3f}"


def criterion_11():
    cfg = ExperimentConfig(seed=7)
    first = run_verification_suite(cfg).dumps()
    second = run_verification_suite(cfg).dumps()
    return first == second, f"two runs with seed 7: {len(first)} bytes each, identical={first == second}"


CRITERIA = [
    (1, "tree visual metric is exact", criterion_01),
    (2, "Moran bisection matches closed forms", criterion_02),
    (3, "visual and Moran metrics compare", criterion_03),
    (4, "comparison function concavity", criterion_04),
    (5, "ray displacement ratio", criterion_05),
    (6, "capacity survives the change of metric", criterion_06),
    (7, "pullback bounds", criterion_07),
    (8, "preimage component diameters", criterion_08),
    (9, "capacity dimension witnesses", criterion_09),
    (10, "annulus covers", criterion_10),
    (11, "deterministic reports", criterion_11),
]


def _timed(body):
    start = time.perf_counter()
    ok, detail = body()
    elapsed = time.perf_counter() - start
    return ok and elapsed < SECONDS_PER_ITEM, f"{detail} [{elapsed:.1f} s]"


@pytest.mark.parametrize("number,title,body", CRITERIA, ids=[f"criterion_{n:02d}" for n, _, _ in CRITERIA])
def test_acceptance_criterion(capsys, number, title, body):
    ok, detail = _timed(body)
    _report(capsys, number, title, ok, detail)


def test_h2_comparison_at_admissible_epsilon():
    """The H2 comparison holds at eps = 0.3, where eps' is below 1/2."""
    cfg = ExperimentConfig()
    report = run_verification_suite(cfg, only=["H2 metric comparison"])
    assert report.passed, report.dumps()


if __name__ == "__main__":
    for n, title, body in CRITERIA:
        try:
            ok, detail = _timed(body)
        except Exception as exc:  # report and continue with the next criterion
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        print(_line(n, title, ok, detail), flush=True)
