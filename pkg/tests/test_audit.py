import json
import math

import numpy as np
import pytest

from bykovlab import audit as au
from bykovlab import circlemap as cm
from bykovlab.model import (CylinderFunction, Perturbation, TrigPoly,
                            named_profile, reference_params)


class TestH1:
    def test_reports_finite_k(self, params_k5, pert):
        v = au.audit_H1(params_k5, pert, sample_size=500)
        assert math.isfinite(v.evidence["k"])
        assert v.evidence["injectivity_collisions"] == 0

    def test_cap_controls_verdict(self, params_k5, pert):
        tight = au.audit_H1(params_k5, pert, sample_size=500,
                            thresholds={**au.DEFAULT_THRESHOLDS,
                                        "h1_ratio_cap": 1.0})
        assert tight.status == "FAIL"
        loose = au.audit_H1(params_k5, pert, sample_size=500,
                            thresholds={**au.DEFAULT_THRESHOLDS,
                                        "h1_ratio_cap": 1e9})
        assert loose.status == "PASS"

    def test_largest_lambda_cap_held_reported(self, params_k5, pert):
        v = au.audit_H1(params_k5, pert, sample_size=500)
        assert "largest_lambda_cap_held" in v.evidence


class TestH2H3:
    def test_reference_pass(self, ref_params, pert):
        v = au.audit_H2_H3(ref_params, pert, a=1.0)
        assert v.status == "PASS"
        assert all(v.evidence["monotone"].values())

    def test_larger_twist_needs_more_n(self, pert):
        # lambda_n = exp(-2 pi n / K): larger K decays slower per step
        small = reference_params(omega=1.0)
        large = reference_params(omega=5.0)
        r_small = cm.singular_limit_convergence(small, pert, 1.0, range(4, 9))
        r_large = cm.singular_limit_convergence(large, pert, 1.0, range(4, 9))
        assert r_large[-1].value_err > r_small[-1].value_err


class TestH4:
    def test_diffeo_regime_fails(self, family_k03):
        v = au.audit_H4(family_k03)
        assert v.status == "FAIL"
        assert "increase K_omega" in v.evidence["reason"]

    def test_k5_pass_set(self, family_k5):
        v = au.audit_H4(family_k5, n_a=64)
        assert v.status == "PASS"
        assert len(v.evidence["passing"]) >= 1
        for entry in v.evidence["passing"]:
            assert entry["lambda0"] > 0.0


class TestH5:
    def test_reference_pass(self, family_k5):
        v = au.audit_H5_proxy(family_k5, 0.0)
        assert v.status == "PASS"
        assert v.proxy
        assert v.evidence["margin"] > 1e-3

    def test_fd_step_consistency(self, family_k5):
        margins = []
        for h in (1e-5, 1e-4, 1e-3):
            v = au.audit_H5_proxy(
                family_k5, 0.0,
                thresholds={**au.DEFAULT_THRESHOLDS, "h5_fd_step": h})
            margins.append(v.evidence["margin"])
        assert max(margins) - min(margins) < 1e-6

    def test_no_critical_points_fails(self, family_k03):
        v = au.audit_H5_proxy(family_k03, 0.0)
        assert v.status == "FAIL"


class TestH6:
    def test_y_independent_closed_form(self, params_k5, pert, family_k5):
        crit = cm.critical_points(family_k5)
        v = au.audit_H6(params_k5, pert, crit)
        assert v.status == "PASS"
        for c, d in zip(crit.points, v.evidence["derivatives"]):
            want = -params_k5.k_omega / pert.phi2(float(c), 0.0)
            assert d == pytest.approx(want, rel=1e-6)

    def test_engineered_cancellation_fails(self, params_k5):
        # Phi2 = (1.1 + sin x)(1 - y): height-derivative at ybar = 0 is
        # -K (1 + dPhi2/dy) / Phi2 with dPhi2/dy = -Phi2(x,0), so the
        # numerator is 1 - Phi2(x,0), which vanishes where Phi2(x,0) = 1
        phi2 = CylinderFunction(TrigPoly(1.1, ((1, 0.0, 1.0),)),
                                slope=TrigPoly(-1.1, ((1, 0.0, -1.0),)))
        pert_bad = Perturbation(phi1=named_profile("cosine"), phi2=phi2)
        # place the "critical set" at the cancellation point sin x = -0.1
        x_cancel = math.asin(-0.1) + 2 * math.pi
        crit = cm.CriticalSet(points=np.array([x_cancel]),
                              second_derivs=np.array([1.0]))
        v = au.audit_H6(params_k5, pert_bad, crit)
        assert v.status == "FAIL"


class TestH7Arithmetic:
    def test_threshold_examples(self):
        assert au.h7_accepts_lambda0(2.2)          # exp(2.2/3) = 2.08 > 2
        assert not au.h7_accepts_lambda0(2.0)
        assert au.abundance_accepts_lambda0(0.9)   # e^0.9 = 2.46 > ln 10
        assert not au.abundance_accepts_lambda0(0.8)

    def test_boundary_exactness(self):
        lo = 3.0 * math.log(2.0)
        assert au.h7_accepts_lambda0(lo + 1e-12)
        assert not au.h7_accepts_lambda0(lo - 1e-12)
        lo2 = math.log(math.log(10.0))
        assert au.abundance_accepts_lambda0(lo2 + 1e-12)
        assert not au.abundance_accepts_lambda0(lo2 - 1e-12)

    def test_matrix_part(self, family_k5):
        v = au.audit_H7(family_k5, 0.0, lambda0=2.2)
        assert v.evidence["primitive"] and v.evidence["primitive_N"] == 1
        assert v.status == "PASS"
        v_lo = au.audit_H7(family_k5, 0.0, lambda0=1.0)
        assert v_lo.status == "FAIL"


class TestOrchestrator:
    def test_report_is_deterministic_and_ordered(self, params_k5, pert):
        rep1 = au.run_audit(params_k5, pert, n_a=8, seed=0)
        rep2 = au.run_audit(params_k5, pert, n_a=8, seed=0)
        j1 = json.dumps(rep1.to_report(), sort_keys=True)
        j2 = json.dumps(rep2.to_report(), sort_keys=True)
        assert j1 == j2
        names = [v.name for v in rep1.verdicts]
        assert names == ["H1", "H2H3", "H4", "H5", "H6", "H7"]

    def test_overall_logic(self, params_k5, pert):
        rep = au.run_audit(params_k5, pert, n_a=8, seed=0)
        statuses = {v.name: v.status for v in rep.verdicts}
        if all(s == "PASS" for s in statuses.values()):
            assert rep.overall == "numerically supported"
        else:
            assert rep.overall in ("FAIL", "INCONCLUSIVE")

    def test_unknown_threshold_rejected(self, params_k5, pert):
        with pytest.raises(ValueError):
            au.run_audit(params_k5, pert, thresholds={"bogus": 1.0})


class TestFraction:
    def test_diffeo_regime_near_zero(self, pert):
        from bykovlab.orbits import Budget
        params = reference_params(omega=0.05)
        out = au.strange_attractor_fraction(
            params, pert, r=0.01, samples=100, seed=0,
            budget=Budget(n_iter=2000, burn_in=500, curve_thresh=0.02))
        assert out["fraction"] <= 0.05

    def test_sample_floor(self, params_k5, pert):
        with pytest.raises(ValueError):
            au.strange_attractor_fraction(params_k5, pert, r=0.01, samples=10)
