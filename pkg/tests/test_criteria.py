"""Finite-size criteria, certificates, and the inequality verification suite."""

import json
import math

import numpy as np
import pytest

from ffgap import criteria
from ffgap.coefficients import (
    SQRT6,
    coeffs_1d,
    optimal_x,
    threshold_1d,
    threshold_2d,
)
from ffgap.coarse_grain import EffectiveModel1D, effective_1d
from ffgap.criteria import (
    SuiteConfig,
    certify_2d,
    certify_periodic,
    certify_quasi1d,
    certify_thm1,
    certify_thm2,
    chiral_exclusion,
    hsquared_identity_residual,
    interchange_residual,
    interchange_residual_matfree,
    rewrite_margin,
    standard_instance_plan,
    verify_chain_instance,
    verify_inequality_suite,
    window_gap_margins,
)
from ffgap.operators import LocalProjector
from ffgap.spectra import GapProfile, gap_profile


def synthetic_profile(bulk_list, left, right, boundary_trivial=False) -> GapProfile:
    return GapProfile(
        n=len(bulk_list) + 1,
        bulk=bulk_list[-1],
        left=tuple(left),
        right=tuple(right),
        edge_min=min(1.0, min(left + right)),
        bulk_list=tuple(bulk_list),
        boundary_trivial=boundary_trivial,
    )


class TestCertifyThm1:
    def test_certified_when_gaps_clear_threshold(self):
        profile = synthetic_profile(
            (1.0, 0.9, 0.8), (1.0, 0.9, 0.8), (1.0, 0.9, 0.8)
        )
        cert = certify_thm1(profile, 4)
        assert cert.local_gap == pytest.approx(min(0.8, 0.9))
        assert cert.threshold == pytest.approx(threshold_1d(4, "exact"))
        assert cert.prefactor == pytest.approx(1.0 / (2**8 * math.sqrt(24.0)))
        assert cert.verdict == "certified_gapped"
        assert cert.bound == pytest.approx(cert.prefactor * (cert.local_gap - cert.threshold))
        assert cert.bound > 0

    def test_inconclusive_below_threshold(self):
        profile = synthetic_profile(
            (0.1, 0.1, 0.1), (0.1, 0.1, 0.1), (0.1, 0.1, 0.1)
        )
        cert = certify_thm1(profile, 4)
        assert cert.verdict == "inconclusive"
        assert cert.bound < 0

    def test_three_site_case(self):
        profile = synthetic_profile((1.0, 0.9), (1.0, 0.9), (1.0, 0.9))
        cert = certify_thm1(profile, 3)
        assert cert.prefactor == pytest.approx(2.0)
        assert cert.threshold == pytest.approx(0.5)
        assert cert.local_gap == pytest.approx(0.9)
        assert cert.bound == pytest.approx(2.0 * 0.4)

    def test_asymptotic_mode_threshold(self):
        profile = synthetic_profile(
            (1.0,) * 5, (1.0,) * 5, (1.0,) * 5
        )
        cert = certify_thm1(profile, 6, mode="asymptotic")
        assert cert.threshold == pytest.approx(threshold_1d(6, "asymptotic"))
        assert cert.threshold == pytest.approx(2.0 * SQRT6 * 6.0**-1.5)

    def test_aklt_certified(self, aklt_spec):
        profile = gap_profile(aklt_spec.payload, 5)
        cert = certify_thm1(profile, 5)
        assert cert.verdict == "certified_gapped"
        assert cert.local_gap == pytest.approx(
            min(profile.bulk_list[3], profile.edge_min_at(4))
        )
        assert cert.bound > 0

    def test_input_validation(self):
        profile = synthetic_profile((1.0, 1.0), (1.0, 1.0), (1.0, 1.0))
        with pytest.raises(ValueError):
            certify_thm1(profile, 2)
        with pytest.raises(ValueError):
            certify_thm1(profile, 5)  # profile only covers up to n=3


class TestCertifyThm2:
    def test_never_below_plain_criterion(self, random_chain_d3_boundary):
        model = random_chain_d3_boundary.payload
        profile = gap_profile(model, 4)
        plain = certify_thm1(profile, 4)
        strong = certify_thm2(model, profile, 4)
        assert strong.local_gap >= plain.local_gap - 1e-15
        assert strong.bound >= plain.bound - 1e-15
        assert strong.threshold == plain.threshold

    def test_short_edge_dip_averaged_out(self, random_chain_d3_boundary):
        # a small gap at the shortest edge window hurts the plain minimum
        # but only enters the strong criterion through weighted averages
        model = random_chain_d3_boundary.payload
        profile = synthetic_profile((1.0, 0.9, 0.8), (0.2, 0.9, 0.9), (0.2, 0.9, 0.9))
        plain = certify_thm1(profile, 4)
        strong = certify_thm2(model, profile, 4)
        assert plain.local_gap == pytest.approx(0.2)
        assert strong.local_gap > plain.local_gap + 0.01

    def test_mode_controls_x(self, random_chain_d3_boundary):
        model = random_chain_d3_boundary.payload
        profile = gap_profile(model, 4)
        exact = certify_thm2(model, profile, 4, mode="exact")
        asym = certify_thm2(model, profile, 4, mode="asymptotic")
        assert exact.constants["x"] == pytest.approx(optimal_x(4)[0])
        assert asym.constants["x"] == pytest.approx(SQRT6)

    def test_input_validation(self, random_chain_d3_boundary):
        model = random_chain_d3_boundary.payload
        profile = gap_profile(model, 4)
        with pytest.raises(ValueError):
            certify_thm2(model, profile, 3)
        with pytest.raises(ValueError):
            certify_thm2(model, profile, 5)


class TestCertifyPeriodic:
    def test_hand_arithmetic(self):
        cert = certify_periodic(0.5, n=5, m=12)
        assert cert.prefactor == pytest.approx(25.0)
        assert cert.threshold == pytest.approx(0.2)
        assert cert.verdict == "certified_gapped"
        assert cert.bound == pytest.approx(7.5)

    def test_inconclusive(self):
        cert = certify_periodic(0.1, n=5, m=12)
        assert cert.verdict == "inconclusive"

    def test_input_validation(self):
        with pytest.raises(ValueError):
            certify_periodic(0.5, n=4, m=12)
        with pytest.raises(ValueError):
            certify_periodic(0.5, n=5, m=2)
        with pytest.raises(ValueError):
            certify_periodic(0.5, n=5, m=11)


class TestCertifyQuasi1d:
    def test_unit_block_constants(self, commuting_cell_spec):
        eff = EffectiveModel1D(
            metaspin_dim=2,
            P_eff=LocalProjector.zero(2, 2),
            lambda_min=1.0,
            lambda_max=1.0,
            R=1,
            m2=1,
        )
        gaps = {l: 10.0 for l in range(2, 5)}
        cert = certify_quasi1d(
            commuting_cell_spec.payload, 1, 1, 4, gaps, effective=eff
        )
        assert cert.constants["C1"] == pytest.approx(1.0 / (2**10 * math.sqrt(24.0)))
        assert cert.constants["C2"] == pytest.approx(8.0 * SQRT6)
        assert cert.threshold == pytest.approx(8.0 * SQRT6 * 4.0**-1.5)
        assert cert.verdict == "certified_gapped"

    def test_default_effective_model(self, commuting_cell_spec):
        gaps = {l: 0.1 for l in range(2, 5)}
        cert = certify_quasi1d(commuting_cell_spec.payload, 1, 1, 4, gaps)
        assert cert.constants["C1_1d"] == pytest.approx(0.5)
        assert cert.constants["C2_1d"] == pytest.approx(2.0)
        assert cert.local_gap == pytest.approx(0.1)
        assert cert.verdict == "inconclusive"

    def test_missing_window_rejected(self, commuting_cell_spec):
        with pytest.raises(ValueError, match=r"missing gap entries.*3"):
            certify_quasi1d(commuting_cell_spec.payload, 1, 1, 4, {2: 1.0, 4: 1.0})
        with pytest.raises(ValueError):
            certify_quasi1d(commuting_cell_spec.payload, 1, 1, 3, {})


class TestChiralExclusion:
    def test_pinned_examples(self):
        n0, table = chiral_exclusion(2.0, 1, 1.0)
        assert n0 == 5
        n0_big, _ = chiral_exclusion(10.0, 3, 2.0)
        assert n0_big == 3601

    def test_trivial_limit(self):
        n0, _ = chiral_exclusion(1.1, 1, 0.1)
        assert n0 == 1

    def test_contradiction_table(self):
        n0, table = chiral_exclusion(2.0, 1, 1.0)
        assert table["rhs_over_C1"] > 0
        lhs = [row["lhs"] for row in table["rows"]]
        assert lhs == sorted(lhs, reverse=True)
        assert lhs[-1] < table["rhs_over_C1"] * 1e-2  # lhs drops below rhs

    def test_input_validation(self):
        with pytest.raises(ValueError):
            chiral_exclusion(1.0, 1, 1.0)
        with pytest.raises(ValueError):
            chiral_exclusion(2.0, 0, 1.0)
        with pytest.raises(ValueError):
            chiral_exclusion(2.0, 1, 0.0)


class TestCertify2d:
    def test_commuting_cell_certificate(self, commuting_cell_spec):
        gaps = {(l1, l2): 10.0 for l1 in (1, 2) for l2 in (1, 2)}
        cert = certify_2d(commuting_cell_spec.payload, 1, 2, gaps)
        assert cert.constants["C1_2d"] == pytest.approx(0.25)
        assert cert.constants["C2_2d"] == pytest.approx(4.0)
        assert cert.threshold == pytest.approx(4.0 * threshold_2d(2))
        assert cert.threshold == pytest.approx(9.6)
        assert cert.local_gap == pytest.approx(10.0)
        assert cert.verdict == "certified_gapped"
        assert cert.bound > 0
        for key in ("alpha", "sigma", "c_mid", "g_2d", "metaspin_dim"):
            assert key in cert.constants

    def test_window_coverage_required(self, commuting_cell_spec):
        with pytest.raises(ValueError, match="missing gap entries"):
            certify_2d(commuting_cell_spec.payload, 1, 2, {(1, 1): 1.0})

    def test_even_window_required(self, commuting_cell_spec):
        with pytest.raises(ValueError):
            certify_2d(commuting_cell_spec.payload, 1, 3, {})

    def test_certificate_serializes(self, commuting_cell_spec):
        gaps = {(l1, l2): 10.0 for l1 in (1, 2) for l2 in (1, 2)}
        cert = certify_2d(commuting_cell_spec.payload, 1, 2, gaps)
        doc = cert.to_json()
        assert doc["schema_version"] == criteria.SCHEMA_VERSION
        assert doc["criterion"] == "two_d"
        assert doc["verdict"] == "certified_gapped"
        json.dumps(doc)  # must be JSON-serializable as-is


class TestOperatorChecks:
    def test_hsquared_identity(self, random_chain_d2):
        assert hsquared_identity_residual(random_chain_d2.payload, 6) < 1e-12

    def test_interchange_identity(self, random_chain_d2):
        coeffs = coeffs_1d(4, SQRT6)
        assert interchange_residual(random_chain_d2.payload, 8, 4, coeffs) < 1e-12

    def test_interchange_matfree(self, random_chain_d2):
        coeffs = coeffs_1d(4, SQRT6)
        res = interchange_residual_matfree(random_chain_d2.payload, 8, 4, coeffs, seed=7)
        assert res < 1e-11

    def test_rewrite_margin_nonnegative(self, random_chain_d2):
        coeffs = coeffs_1d(4, SQRT6)
        margin, scale = rewrite_margin(random_chain_d2.payload, 8, 4, coeffs)
        assert scale >= 1.0
        assert margin >= -1e-9 * scale

    def test_rewrite_margin_matfree_matches_dense(self, monkeypatch, random_chain_d2):
        coeffs = coeffs_1d(4, SQRT6)
        dense_margin, dense_scale = rewrite_margin(random_chain_d2.payload, 8, 4, coeffs)
        monkeypatch.setattr(criteria, "_DENSE_SUITE_CUTOFF", 100)
        free_margin, free_scale = rewrite_margin(
            random_chain_d2.payload, 8, 4, coeffs, seed=5
        )
        assert free_margin == pytest.approx(dense_margin, abs=1e-9 * dense_scale)
        assert free_scale == pytest.approx(dense_scale, rel=1e-4)

    def test_rewrite_margin_window_bounds(self, random_chain_d2):
        coeffs = coeffs_1d(4, SQRT6)
        with pytest.raises(ValueError):
            rewrite_margin(random_chain_d2.payload, 6, 4, coeffs)  # n > m/2

    def test_window_gap_margins(self, random_chain_d2):
        model = random_chain_d2.payload
        coeffs = coeffs_1d(4, SQRT6)
        profile = gap_profile(model, 4)
        windows = window_gap_margins(
            model, 8, 4, coeffs, profile.bulk_list[2], profile.edge_min_at(3)
        )
        assert len(windows) == 9
        regimes = [w["regime"] for w in windows]
        assert regimes == ["bulk"] * 5 + ["edge"] * 4
        assert all(w["margin"] >= -1e-9 * w["scale"] for w in windows)
        assert all(w["kappa"] > 0 for w in windows)


class TestSuite:
    def test_instance_plan_cycles(self):
        plan = standard_instance_plan(8)
        assert [p["d"] for p in plan] == [2, 2, 2, 3, 2, 2, 2, 3]
        assert [p["identity_m"] for p in plan[:3]] == [4, 5, 6]
        assert plan[3]["identity_m"] == 4
        assert all(p["rank_bulk"] == 1 and p["rank_boundary"] == 0 for p in plan if p["d"] == 2)
        assert all(p["rank_bulk"] == 2 and p["rank_boundary"] == 1 for p in plan if p["d"] == 3)

    def test_chain_instance_record(self, random_chain_d2):
        record = verify_chain_instance(random_chain_d2.payload, 4, SuiteConfig(), seed=1)
        for key in (
            "ff",
            "identity_residual",
            "interchange_residual",
            "rewrite_margin",
            "windows",
            "pass",
        ):
            assert key in record
        assert record["pass"]

    def test_suite_deterministic(self):
        a = verify_inequality_suite(3, 2, SuiteConfig())
        b = verify_inequality_suite(3, 2, SuiteConfig())
        assert a == b
        assert a["pass"]
        assert a["schema_version"] == criteria.SCHEMA_VERSION
        assert len(a["instances"]) == 2
        assert a["suite"] == "1d"
