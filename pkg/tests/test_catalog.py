"""Catalog construction: chain recurrence, closed-form cross-checks, samplers."""

import math

import numpy as np
import pytest

from rdwaves.catalog import (
    FAMILIES,
    CatalogError,
    build_family,
    chain_constant,
    closed_forms,
    cosh_cos_solution,
    crosscheck_closed_forms,
    elliptic_solution,
    family_info,
    fisher_exponential,
    fisher_front,
    fisher_weierstrass,
    generalized_fisher,
    perturbed_fisher_bell,
    phi_chain,
    plane_wave,
    potential_transform,
    quadratic_rational,
    solitary_wave,
    z_from_phi,
    z_plane_wave,
)
from rdwaves.elliptic import MODULUS_INV_SQRT2, complete_elliptic_K, jacobi_sn_cn_dn

K = complete_elliptic_K(MODULUS_INV_SQRT2)
SQRT6 = math.sqrt(6.0)


def chain_samples(index: int, n: int = 300, lo: float = 0.05, seed: int = 3):
    """Random y avoiding poles/zeros of every element up to the given index."""
    rng = np.random.default_rng(seed)
    y = rng.uniform(lo, 2 * K - lo, 40 * n)
    keep = np.ones_like(y, dtype=bool)
    for j in range(index + 1):
        phi, dphi, ok = phi_chain(j).eval(y)
        keep &= ok & (np.abs(phi) > 5e-2) & (np.abs(phi) < 4e1) & (np.abs(dphi) < 4e3)
    y = y[keep]
    assert y.size >= n, f"only {y.size} clean samples for index {index}"
    return y[:n]


class TestPhiChain:
    def test_seed_values_and_derivative(self):
        # phi0 = ds with phi0' = -cs*ns, cross-checked by finite differences
        y = 1.0
        phi, dphi, ok = phi_chain(0).eval(y)
        sn, cn, dn = jacobi_sn_cn_dn(y, MODULUS_INV_SQRT2)
        assert bool(ok)
        assert phi == pytest.approx(dn / sn, abs=1e-14)
        h = 1e-5
        f = lambda q: phi_chain(0).eval(q)[0]
        fd = (f(y - 2 * h) - 8 * f(y - h) + 8 * f(y + h) - f(y + 2 * h)) / (12 * h)
        assert dphi == pytest.approx(fd, abs=1e-10)
        assert dphi == pytest.approx(-cn / sn**2, abs=1e-12)

    def test_first_element_is_cs_over_dn(self):
        y = chain_samples(1, 50)
        phi, _, ok = phi_chain(1).eval(y)
        sn, cn, dn = jacobi_sn_cn_dn(y, MODULUS_INV_SQRT2)
        assert ok.all()
        assert np.max(np.abs(phi - (-cn / sn / dn))) < 1e-12

    def test_constants(self):
        assert chain_constant(0) == -0.25
        assert chain_constant(1) == 1.0
        assert chain_constant(3) == 16.0
        for n in range(6):
            assert chain_constant(n + 1) == -4.0 * chain_constant(n)

    @pytest.mark.parametrize("index", range(7))
    def test_first_integral_along_chain(self, index):
        y = chain_samples(index, 200)
        phi, dphi, ok = phi_chain(index).eval(y)
        assert ok.all()
        resid = dphi**2 - phi**4 - chain_constant(index)
        assert np.max(np.abs(resid)) < 1e-8

    def test_derivative_propagation_matches_fd(self):
        # analytic derivative of each element vs a finite difference on it
        for index in (1, 2, 3):
            y = chain_samples(index, 40)
            h = 1e-5
            f = lambda q: phi_chain(index).eval(q)[0]
            fd = (f(y - 2 * h) - 8 * f(y - h) + 8 * f(y + h) - f(y + 2 * h)) / (12 * h)
            _, dphi, _ = phi_chain(index).eval(y)
            assert np.max(np.abs(dphi - fd)) < 1e-6

    def test_negative_index_rejected(self):
        with pytest.raises(CatalogError):
            phi_chain(-1)


class TestClosedForms:
    def test_u2_exact(self):
        y = chain_samples(2, 100)
        chain, _, _ = phi_chain(2).eval(y)
        closed, ok = closed_forms(y)["u2"]
        assert ok.all()
        assert np.max(np.abs(chain - closed)) < 1e-9

    def test_u3_corrected_exact(self):
        y = chain_samples(3, 100)
        chain, _, _ = phi_chain(3).eval(y)
        closed, ok = closed_forms(y)["u3_corrected"]
        sel = ok & np.isfinite(closed)
        assert sel.sum() >= 90
        assert np.max(np.abs(chain[sel] - closed[sel])) < 1e-9

    def test_u3_printed_is_not_the_chain(self):
        # transcribed inner constant (9/4) sqrt2 fails: the mismatch is not even
        # a constant factor
        rep = crosscheck_closed_forms(100)
        assert rep["u3_printed"]["max_abs_deviation"] > 1e-3
        assert rep["u3_printed"]["ratio_spread"] > 0.1
        assert rep["u3_corrected"]["max_abs_deviation"] < 1e-9

    def test_tilde1_and_hat0_match_up_to_sign(self):
        rep = crosscheck_closed_forms(100)
        assert rep["tilde1"]["max_abs_deviation"] < 1e-9
        assert rep["hat0"]["max_abs_deviation"] < 1e-9
        assert rep["u2"]["max_abs_deviation"] < 1e-9

    def test_hat2_corrected_matches(self):
        rep = crosscheck_closed_forms(100)
        assert rep["hat2"]["max_abs_deviation"] < 1e-9

    def test_tilde3_printed_reported_not_hidden(self):
        rep = crosscheck_closed_forms(100)
        assert rep["tilde3_printed"]["ratio_spread"] > 0.1  # y-dependent mismatch


class TestEllipticSolution:
    def test_index0_is_x_ds_form(self):
        s = elliptic_solution("direct", 0)
        x = np.array([0.4, 0.8, 1.1])
        t = np.array([0.02, 0.05, 0.01])
        u, ok = s.sample(x, t)
        y = x**2 + 6 * t
        sn, cn, dn = jacobi_sn_cn_dn(y, MODULUS_INV_SQRT2)
        assert ok.all()
        assert np.max(np.abs(u - 2 * x * dn / sn)) < 1e-13

    def test_hat0_is_x_sd(self):
        s = elliptic_solution("focusing", 0)
        x, t = 0.7, 0.03
        u, ok = s.sample(x, t)
        y = x**2 + 6 * t
        sn, cn, dn = jacobi_sn_cn_dn(y, MODULUS_INV_SQRT2)
        assert bool(ok)
        assert float(u) == pytest.approx(x * sn / dn, abs=1e-13)

    def test_parity_errors(self):
        with pytest.raises(CatalogError):
            elliptic_solution("inverse", 2)
        with pytest.raises(CatalogError):
            elliptic_solution("focusing", 1)
        with pytest.raises(CatalogError):
            elliptic_solution("nope", 1)

    def test_index2_closed_form_agreement(self):
        s = elliptic_solution("direct", 2)
        y = chain_samples(2, 100)
        # map y-samples onto (x, t) pairs with x = 0.5
        x = np.full_like(y, 0.5)
        t = (y - 0.25) / 6.0
        u, ok = s.sample(x, t)
        closed, okc = closed_forms(y)["u2"]
        assert (ok & okc).all()
        assert np.max(np.abs(np.abs(u) - np.abs(2 * x * closed))) < 1e-9

    def test_sign_flag(self):
        sp = elliptic_solution("direct", 1, sign=1)
        sm = elliptic_solution("direct", 1, sign=-1)
        u1, _ = sp.sample(0.5, 0.05)
        u2, _ = sm.sample(0.5, 0.05)
        assert float(u1) == pytest.approx(-float(u2), abs=1e-14)

    def test_pole_masking(self):
        s = elliptic_solution("direct", 0)
        u, ok = s.sample(0.0, 0.0)  # y = 0 is a pole of ds
        assert not bool(ok)
        assert np.isnan(float(u))


class TestSamplers:
    def test_plane_wave_constant_solution(self):
        s = plane_wave(2.0, -1.0, 0.0, 0.0)
        u, ok = s.sample(np.linspace(-2, 2, 9), 0.1)
        assert ok.all()
        assert np.max(np.abs(u - 1.0)) < 1e-14

    def test_plane_wave_equals_exponential_fisher(self):
        # n=2, c1=-1, lambda2=0 front at (x, t) equals the exponential Fisher
        # form at (y, tau) = (sqrt6 x, 6 t)
        c2 = 0.8
        s = plane_wave(2.0, -1.0, c2, 0.0)
        f = fisher_exponential(c2)
        x = np.linspace(-2, 2, 41)
        t = 0.13
        upw, _ = s.sample(x, t)
        uaz, _ = f.sample(SQRT6 * x, 6 * t)
        assert np.max(np.abs(upw - uaz)) < 1e-12

    def test_plane_wave_velocity_metadata(self):
        assert plane_wave(2.0, -1.0, 1.0, 0.0).predicted_velocity == pytest.approx(5.0)
        assert plane_wave(3.0, -1.0, 1.0, 0.0).predicted_velocity == pytest.approx(3.0)
        assert plane_wave(2.0, -2.0, 1.0, -3.0).predicted_velocity == pytest.approx(7.0)

    def test_plane_wave_fractional_k_guard(self):
        with pytest.raises(CatalogError):
            plane_wave(2.5, -1.0, 1.0, 0.0)

    def test_plane_wave_singular_line_masked(self):
        s = plane_wave(2.0, -1.0, -1.0, 0.0)  # c2 < 0: denominator crosses 0
        u, ok = s.sample(np.array([0.0]), np.array([0.0]))
        assert not ok.any()

    def test_solitary_branch_guards(self):
        with pytest.raises(CatalogError):
            solitary_wave(2.0, 0.5, 0.3, "tanh")
        with pytest.raises(CatalogError):
            solitary_wave(2.0, -0.5, 0.3, "tan")
        with pytest.raises(CatalogError):
            solitary_wave(2.0, 0.5, 0.3, "rational")
        with pytest.raises(CatalogError):
            solitary_wave(2.0, -0.5, 0.3, "sech")

    def test_solitary_tan_poles_masked(self):
        s = solitary_wave(2.0, 0.8, 0.5, "tan", C=0.0)
        b = math.sqrt(0.8 / 2.0)
        x_pole = (math.pi / 2.0) / b
        u, ok = s.sample(np.array([x_pole]), np.array([0.0]))
        assert not ok.any()

    def test_solitary_valid_side_mask(self):
        s = solitary_wave(2.0, -1.5, 0.9, "tanh", C=0.0)
        _, ok_neg = s.sample(-3.0, 0.0)
        _, ok_pos = s.sample(3.0, 0.0)
        assert bool(ok_pos) and not bool(ok_neg)

    def test_solitary_transforms_to_bell(self):
        # nu -> -3/2, sigma = 3 eps, u_bell = 3/2 - u_sol at (x/sqrt3, t/3):
        # the solitary theta equals the bell argument s point for point
        eps = 0.3
        sol = solitary_wave(2.0, -1.5, 3.0 * eps, "tanh", C=0.4)
        bell = perturbed_fisher_bell(eps, C=0.4)
        x = np.linspace(1.0, 5.0, 17)
        t = 0.6
        ub, okb = bell.sample(x, t)
        us, oks = sol.sample(x / math.sqrt(3.0), t / 3.0)
        assert okb.all() and oks.all()
        assert np.max(np.abs(ub - (1.5 - us))) < 1e-12

    def test_fisher_front_center_value(self):
        s = fisher_front("tanh", c=0.0)
        u, _ = s.sample(0.0, 0.0)  # theta = 0: u = 1/4
        assert float(u) == pytest.approx(0.25, abs=1e-15)

    def test_fisher_front_complement_flagged(self):
        s = fisher_front("tanh", complement=True)
        assert not s.residual_clean
        u, _ = s.sample(0.0, 0.0)
        assert float(u) == pytest.approx(0.75, abs=1e-15)

    def test_fisher_coth_singular_line(self):
        s = fisher_front("coth", c=0.0)
        u, ok = s.sample(0.0, 0.0)
        assert not bool(ok)

    def test_generalized_fisher_reduces_to_fisher(self):
        gf = generalized_fisher(-1.0, "tanh", c=0.0)
        ff = fisher_front("tanh", c=0.0)
        y = np.linspace(-6, 6, 101)
        tau = 0.37
        ug, _ = gf.sample(y, tau)
        uf, _ = ff.sample(y, tau)
        assert np.max(np.abs(ug - uf)) < 1e-12

    def test_generalized_fisher_velocities(self):
        assert abs(generalized_fisher(2.0).predicted_velocity) == pytest.approx(1.0 / SQRT6)
        assert abs(generalized_fisher(-2.0).predicted_velocity) == pytest.approx(7.0 / SQRT6)
        assert generalized_fisher(1.5).predicted_velocity == pytest.approx(0.0, abs=1e-15)

    def test_generalized_fisher_amplitude(self):
        # amplitude is c1^2: theta -> +inf gives u -> c1^2
        gf = generalized_fisher(2.0, "tanh", c=0.0)
        u, _ = gf.sample(200.0, 0.0)
        assert float(u) == pytest.approx(4.0, rel=1e-10)

    def test_bell_mask_and_peak(self):
        bell = perturbed_fisher_bell(0.3, C=0.0)
        u, ok = bell.sample(1.0, 0.0)
        assert bool(ok)
        assert float(u) == pytest.approx(1.5 / math.cosh(0.5) ** 2, abs=1e-14)
        _, ok2 = bell.sample(-1.0, 0.0)
        assert not bool(ok2)

    def test_quadratic_rational_value(self):
        # corrected closed form at (x, t) = (0, 1), plus branch
        s = quadratic_rational(+1)
        u, ok = s.sample(0.0, 1.0)
        expect = 120.0 * (12.0 + 5.0 * SQRT6) / (10.0 * (3.0 + SQRT6)) ** 2
        assert bool(ok)
        assert float(u) == pytest.approx(expect, rel=1e-14)

    def test_quadratic_rational_decay(self):
        s = quadratic_rational(+1)
        x = np.array([100.0, 200.0, 400.0])
        u, _ = s.sample(x, 1.0)
        assert np.max(np.abs(u * x**2 / (12.0 * (4.0 + SQRT6)) - 1.0)) < 1e-2

    def test_quadratic_rational_singular_circle_masked(self):
        s = quadratic_rational(+1)
        beta = 10.0 * (3.0 + SQRT6)
        t = -1.0
        x = math.sqrt(beta)  # x^2 + beta t = 0
        u, ok = s.sample(np.array([x]), np.array([t]))
        assert not ok.any()

    def test_weierstrass_c_zero_rejected(self):
        with pytest.raises(CatalogError):
            fisher_weierstrass(0.0)

    def test_weierstrass_bounded_window(self):
        s = fisher_weierstrass(1e6, 0.0)
        y = np.linspace(1.0, 9.0, 33)
        tau = np.full_like(y, -3.0)
        u, ok = s.sample(y, tau)
        assert ok.all()
        assert np.all(np.isfinite(u))
        assert np.max(np.abs(u)) < 10.0

    def test_translation_covariance(self):
        s = fisher_front("tanh").shifted(2.0, 0.5)
        u, _ = s.sample(2.0, 0.5)
        u0, _ = fisher_front("tanh").sample(0.0, 0.0)
        assert float(u) == pytest.approx(float(u0), abs=1e-15)


class TestPotentialTransform:
    def test_exponential_gives_constant(self):
        from rdwaves.catalog import ZSampler

        a = 0.7
        z = ZSampler(z=lambda x, t: np.exp(a * x), z_x=lambda x, t: a * np.exp(a * x),
                     label="exp")
        s = potential_transform(z, 1.0)
        u, ok = s.sample(np.linspace(-1, 1, 11), 0.0)
        assert ok.all()
        assert np.max(np.abs(u - a)) < 1e-14

    def test_plane_wave_potential_reproduces_front(self):
        n, c1, c2, lam2 = 2.0, -1.0, 0.8, 0.0
        s_direct = plane_wave(n, c1, c2, lam2)
        s_pot = potential_transform(z_plane_wave(n, c1, c2, lam2), 2.0)
        x = np.linspace(-2, 2, 31)
        t = 0.1
        u1, _ = s_direct.sample(x, t)
        u2, ok = s_pot.sample(x, t)
        assert ok.all()
        assert np.max(np.abs(u1 - u2)) < 1e-12

    def test_chain_potential_identity(self):
        # z = phi0(x^2+6t), k=1: u = 2x phi0'/phi0 = first chain solution
        s_pot = potential_transform(z_from_phi(0), 1.0)
        s_chain = elliptic_solution("direct", 1)
        x = np.linspace(0.3, 0.7, 9)
        t = 0.02
        u1, ok1 = s_pot.sample(x, t)
        u2, ok2 = s_chain.sample(x, t)
        sel = ok1 & ok2
        assert sel.all()
        assert np.max(np.abs(u1 - u2)) < 1e-11


class TestRegistry:
    def test_every_family_listed_and_buildable(self):
        info = family_info()
        assert set(info) == set(FAMILIES)
        for fid in FAMILIES:
            s = build_family(fid)
            assert s.family_id == fid
            x0, x1, t0, t1 = s.suggested_window
            u, ok = s.sample(np.linspace(x0, x1, 21), np.full(21, 0.5 * (t0 + t1)))
            assert ok.mean() > 0.9
            assert np.all(np.isfinite(u[ok]))

    def test_unknown_family(self):
        with pytest.raises(CatalogError):
            build_family("nope")

    def test_shift_params(self):
        s = build_family("fisher-front", {"x_shift": 1.0})
        u, _ = s.sample(1.0, 0.0)
        assert float(u) == pytest.approx(0.25, abs=1e-15)
