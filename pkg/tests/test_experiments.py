import json

import numpy as np
import pytest

from catbound.errors import InvalidParamsError, InvalidSpecError
from catbound.experiments import (
    ExperimentConfig,
    VerificationReport,
    annulus_cover_experiment,
    annulus_summary,
    clustered_angle_net,
    quasisymmetry_distortion,
    retraction_campaign,
    run_verification_suite,
    suite_definitions,
    tree_refinement_campaign,
)
from catbound.buildings import build_building
from catbound.spaces import build_space, product_spec, tree_spec


class TestConfig:
    def test_defaults_validate(self):
        ExperimentConfig().validate()

    def test_json_round_trip(self):
        cfg = ExperimentConfig(seed=3, product_net=(2, 2, 6))
        assert ExperimentConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg

    def test_unknown_key(self):
        with pytest.raises(InvalidSpecError):
            ExperimentConfig.from_json({"seed": 1, "sede": 2})

    def test_inadmissible_h2_epsilon(self):
        with pytest.raises(InvalidParamsError, match="sqrt"):
            ExperimentConfig(epsilon_h2=0.5).h2_params()

    def test_bad_scale(self):
        with pytest.raises(InvalidSpecError):
            ExperimentConfig(A=0).validate()


class TestSuite:
    def test_names_are_unique(self):
        names = [name for name, _, _ in suite_definitions(ExperimentConfig())]
        assert len(names) == len(set(names)) >= 25

    def test_anchors_are_descriptive(self):
        for _, anchor, _ in suite_definitions(ExperimentConfig()):
            assert anchor and not any(ch.isdigit() for ch in anchor.split()[0])

    def test_subset_is_deterministic(self):
        only = ["tree visual metric equals rho", "ray displacement ratio"]
        a = run_verification_suite(ExperimentConfig(seed=11), only=only)
        b = run_verification_suite(ExperimentConfig(seed=11), only=only)
        assert a.passed and a.dumps() == b.dumps()
        assert [c.name for c in a.checks] == only

    def test_runtime_excluded_by_default(self):
        rep = run_verification_suite(ExperimentConfig(), only=["rays have unit speed"])
        assert "runtime" not in json.dumps(rep.to_json())
        assert "runtime" in json.dumps(rep.to_json(include_runtime=True))

    def test_inadmissible_config_is_rejected_up_front(self):
        with pytest.raises(InvalidParamsError):
            run_verification_suite(ExperimentConfig(epsilon_h2=0.5), only=["H2 metric comparison"])

    def test_report_shape(self):
        rep = run_verification_suite(ExperimentConfig(), only=["Moran metric axioms"])
        assert isinstance(rep, VerificationReport)
        assert rep.counts == {"pass": 1, "fail": 0, "skipped": 0}


class TestCampaigns:
    def test_clustered_net(self):
        net = clustered_angle_net(4, 3, 1e-3)
        assert len(net) == 12 and len(set(net)) == 12

    def test_refinement(self):
        res = tree_refinement_campaign(ExperimentConfig())
        assert max(res["fine"]) <= max(res["coarse"]) + 1

    def test_retraction(self):
        b = build_building(build_space(product_spec(tree_spec(2, 5), tree_spec(2, 5))))
        res = retraction_campaign(b, np.random.default_rng(0), 100)
        assert res["radial_error"] <= 1e-12 and res["stretch"] <= 1e-12

    def test_quasisymmetry_rows(self):
        tree = build_space(tree_spec(3, 24))
        rows = quasisymmetry_distortion(tree, 1.0, 2.0, 50, 0)
        assert len(rows) == 50
        assert all(r > 0 and s > 0 for r, s in rows)


class TestAnnulus:
    def test_plane(self):
        rows = annulus_cover_experiment("plane", 1.0, 10.0, (10, 40))
        assert all(r.lebesgue == pytest.approx(1.0, abs=1e-12) for r in rows)
        assert annulus_summary(rows)["mesh_ratio"] <= 1.05

    def test_tree(self):
        rows = annulus_cover_experiment("tree", 1.0, 10.0, (10, 20, 40))
        assert annulus_summary(rows)["M_slope"] > 0.5
        assert all(r.lebesgue >= 1.0 for r in rows)

    def test_rejects_other_spaces(self):
        with pytest.raises((InvalidSpecError, ValueError)):
            annulus_cover_experiment("hyperbolic_plane", 1.0, 10.0, (10,))
