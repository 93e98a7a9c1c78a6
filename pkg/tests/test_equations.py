"""Equation registry: right-hand sides, derived constants, KPP checks."""

import math

import numpy as np
import pytest

from rdwaves.equations import (
    CubicPolynomial,
    EquationError,
    Fisher,
    GeneralFamily,
    GeneralizedFisher,
    KPPGeneric,
    PerturbedFisher,
    PowerLaw,
    QuadraticDecay,
    SigmaFamily,
    build_eq47,
    derived_constants,
    kpp_check,
    rhs_eval,
    spec_from_json,
    spec_to_json,
)


class TestDerivedConstants:
    @pytest.mark.parametrize("n,k,lam", [(3, 1, 2), (2, 2, 6), (-1, -1, 0)])
    def test_values(self, n, k, lam):
        dc = derived_constants(n)
        assert dc.k == pytest.approx(k, abs=1e-15)
        assert dc.lam == pytest.approx(lam, abs=1e-15)

    def test_n_one_rejected(self):
        with pytest.raises(EquationError):
            derived_constants(1.0)

    def test_recomputable(self):
        for n in (1.5, 2.0, 4.7, -3.0):
            dc = derived_constants(n)
            assert dc.k * (n - 1) == pytest.approx(2.0, abs=1e-14)


class TestRhs:
    def test_fisher_equilibria(self):
        assert rhs_eval(Fisher(), 0.0) == 0.0
        assert rhs_eval(Fisher(), 1.0) == 0.0

    def test_power_law_n3(self):
        assert rhs_eval(PowerLaw(3), 2.0) == pytest.approx(-16.0, abs=1e-12)

    def test_generalized_fisher_reduces_to_fisher(self):
        u = np.linspace(0.0, 1.0, 500)
        gf = GeneralizedFisher(c1=-1.0)
        assert np.max(np.abs(gf.rhs(u) - Fisher().rhs(u))) < 1e-14

    def test_quadratic_decay(self):
        assert rhs_eval(QuadraticDecay(), 3.0) == -9.0

    def test_fractional_power_domain_error(self):
        with pytest.raises(EquationError, match="non-positive base"):
            rhs_eval(GeneralFamily(n=2.0, lambda2=1.0), -0.5)

    def test_perturbed_fisher_domain(self):
        pf = PerturbedFisher(epsilon=0.3)
        assert rhs_eval(pf, 1.0) == pytest.approx(0.3 * math.sqrt(0.5), abs=1e-15)
        with pytest.raises(EquationError):
            rhs_eval(pf, 2.0)

    def test_cubic_alpha_validation(self):
        with pytest.raises(EquationError):
            CubicPolynomial(alpha=2, b=0.0, c=0.0)

    def test_sigma_family_factored_form(self):
        # n = 2 rhs equals (u + nu)(-3u + sigma sqrt(u) - nu) pointwise
        nu, sigma = -1.5, 0.7
        sf = SigmaFamily(n=2.0, nu=nu, sigma=sigma)
        u = np.linspace(0.05, 3.0, 400)
        factored = (u + nu) * (-3.0 * u + sigma * np.sqrt(u) - nu)
        assert np.max(np.abs(sf.rhs(u) - factored)) < 1e-12

    def test_sigma_family_sigma_zero_is_cubic_factorization(self):
        nu = 0.8
        sf = SigmaFamily(n=2.0, nu=nu, sigma=0.0)
        u = np.linspace(0.05, 3.0, 400)
        assert np.max(np.abs(sf.rhs(u) - (u + nu) * (-3.0 * u - nu))) < 1e-12

    def test_kpp_generic_callable(self):
        spec = KPPGeneric(f=lambda u: np.zeros_like(u), label="zero")
        assert rhs_eval(spec, 0.7) == 0.0


class TestKPPCheck:
    def test_fisher(self):
        rep = kpp_check(Fisher())
        assert rep.all_ok
        assert rep.fprime0 == pytest.approx(1.0, abs=1e-5)

    def test_fitzhugh_nagumo_equilibria(self):
        c = 0.4
        rep = kpp_check(CubicPolynomial(alpha=-1, b=-c - 1.0, c=c))
        assert rep.f0_zero and rep.f1_zero

    def test_power_law_fails_at_one(self):
        rep = kpp_check(PowerLaw(3))
        assert not rep.f1_zero
        assert rep.f1 == pytest.approx(-2.0, abs=1e-12)


class TestBuildEq47:
    def test_fisher_after_rescaling(self):
        # n = 2, c1 = -1, lambda2 = 0: f(u) = 6 u (1 - u), the Fisher rhs
        # times the tau = 6t time rescaling factor
        build = build_eq47(2.0, -1.0, 0.0)
        u = np.linspace(0.0, 1.0, 300)
        assert np.max(np.abs(build.spec.rhs(u) - 6.0 * u * (1.0 - u))) < 1e-12

    def test_front_condition_and_velocity(self):
        build = build_eq47(2.0, -1.0, 0.0)
        assert build.kpp_condition_holds
        assert build.velocity == pytest.approx(5.0, abs=1e-13)
        assert build_eq47(3.0, -1.0, 0.0).velocity == pytest.approx(3.0, abs=1e-13)
        assert build_eq47(2.0, -2.0, -3.0).velocity == pytest.approx(7.0, abs=1e-13)
        assert not build_eq47(2.0, -1.0, 0.5).kpp_condition_holds

    @pytest.mark.parametrize("n", [2.0, 3.0, 4.0, 5.0])
    @pytest.mark.parametrize("c1", [-2.0, -1.0, 0.5, 2.0])
    def test_constant_state_is_equilibrium(self, n, c1):
        k = derived_constants(n).k
        if c1 < 0 and abs(k - round(k)) > 1e-12:
            pytest.skip("c1^k complex for fractional k")
        build = build_eq47(n, c1, 0.7)
        u0 = c1**k
        assert abs(rhs_eval(build.spec, u0)) < 1e-10

    def test_n_one_rejected(self):
        with pytest.raises(EquationError):
            build_eq47(1.0, -1.0, 0.0)

    def test_negative_branch_recorded(self):
        assert build_eq47(2.0, -2.0, -3.0).spec.halfpower_sign == -1
        assert build_eq47(2.0, 1.5, 0.0).spec.halfpower_sign == 1
        assert build_eq47(3.0, -1.0, 0.0).spec.halfpower_sign == 1


class TestSerialization:
    @pytest.mark.parametrize(
        "spec",
        [
            Fisher(),
            CubicPolynomial(alpha=-1, b=-1.4, c=0.4),
            PowerLaw(3.0),
            GeneralFamily(n=2.0, lambda1=3.0, lambda2=-3.0, halfpower_sign=-1),
            SigmaFamily(n=2.0, nu=-1.5, sigma=0.9),
            PerturbedFisher(epsilon=0.3),
            GeneralizedFisher(c1=2.0),
            QuadraticDecay(),
        ],
    )
    def test_round_trip(self, spec):
        assert spec_from_json(spec_to_json(spec)) == spec

    def test_kpp_generic_not_deserializable(self):
        obj = spec_to_json(KPPGeneric(f=lambda u: u, label="ident"))
        with pytest.raises(EquationError):
            spec_from_json(obj)

    def test_unknown_variant(self):
        with pytest.raises(EquationError):
            spec_from_json({"variant": "Nope", "params": {}})
