"""Residual verifiers: convergence orders, chain checks, negative controls."""

import math

import numpy as np
import pytest

from rdwaves.catalog import (
    Sampler,
    ZSampler,
    elliptic_solution,
    fisher_front,
    phi_chain,
    z_from_phi,
    z_plane_wave,
)
from rdwaves.equations import Fisher, QuadraticDecay
from rdwaves.verify import (
    Grid2D,
    VerificationImpossibleError,
    clean_chain_samples,
    ode_residual,
    pde_residual,
    potential_residual,
    proposition_suite,
)

SQRT6 = math.sqrt(6.0)


def constant_sampler(value: float, equation) -> Sampler:
    def fn(x, t):
        u = np.full_like(np.asarray(x, dtype=float), value)
        return u, np.ones_like(u, dtype=bool)

    return Sampler(fn=fn, equation=equation, family_id="constant", params={"value": value})


class TestGrid:
    def test_spacing_and_refinement(self):
        g = Grid2D(0.0, 1.0, 11, 0.0, 2.0, 9)
        assert g.h_x == pytest.approx(0.1)
        assert g.h_t == pytest.approx(0.25)
        r = g.refined()
        assert r.n_x == 21 and r.n_t == 17
        assert r.h_x == pytest.approx(0.05)
        assert set(np.round(g.x, 12)).issubset(set(np.round(r.x, 12)))

    def test_minimum_points(self):
        with pytest.raises(ValueError):
            Grid2D(0.0, 1.0, 4, 0.0, 1.0, 9)

    def test_extent(self):
        with pytest.raises(ValueError):
            Grid2D(1.0, 0.0, 9, 0.0, 1.0, 9)


class TestPdeResidual:
    def test_fisher_front_spec_window(self):
        # finest spacing 0.02 on x in [-20, 20], t in [0, 5]
        s = fisher_front("tanh")
        g = Grid2D(-20.0, 20.0, 501, 0.0, 5.0, 64)
        rep = pde_residual(s, s.equation, g, 4)
        assert rep.max_abs <= 1e-7
        assert rep.order_estimate is not None and rep.order_estimate >= 3.5

    def test_constant_solution_residual_zero(self):
        s = constant_sampler(1.0, Fisher())
        g = Grid2D(-5.0, 5.0, 17, 0.0, 1.0, 9)
        rep = pde_residual(s, s.equation, g, 4)
        assert rep.max_abs == 0.0

    def test_negative_control_wrong_equation(self):
        s = fisher_front("tanh")
        g = Grid2D(-10.0, 10.0, 33, 0.0, 0.5, 17)
        rep = pde_residual(s, QuadraticDecay(), g, 4)
        assert rep.max_abs > 0.1
        assert rep.order_estimate is None or rep.order_estimate < 1.0

    def test_negative_control_perturbed_sampler(self):
        s = fisher_front("tanh").perturbed(0.01)
        g = Grid2D(-10.0, 10.0, 33, 0.0, 0.5, 17)
        rep = pde_residual(s, Fisher(), g, 4)
        assert rep.max_abs > 1e-3
        assert rep.order_estimate is None or rep.order_estimate < 1.0

    def test_second_order_stencil(self):
        s = fisher_front("tanh")
        g = Grid2D(-10.0, 10.0, 41, 0.0, 0.5, 17)
        rep = pde_residual(s, s.equation, g, 2)
        assert rep.order_estimate == pytest.approx(2.0, abs=0.3)

    def test_masked_hole_does_not_leak(self):
        # garbage values under the mask must never touch any used stencil
        base = fisher_front("tanh")

        def fn(x, t):
            u, ok = base.fn(x, t)
            hole = (np.abs(x) < 1.0) & (t > 0.2) & (t < 0.3)
            u = np.where(hole, 1e300, u)
            return u, ok & ~hole

        s = Sampler(fn=fn, equation=Fisher(), family_id="holed", params={})
        g = Grid2D(-10.0, 10.0, 65, 0.0, 0.5, 33)
        rep = pde_residual(s, Fisher(), g, 4)
        assert rep.defined_fraction < 1.0
        assert rep.max_abs < 1e-5

    def test_verification_impossible_when_mostly_masked(self):
        def fn(x, t):
            u = np.zeros_like(x)
            ok = np.abs(x) < 0.05
            return u, ok

        s = Sampler(fn=fn, equation=Fisher(), family_id="sliver", params={},
                    domain_note="almost everything masked")
        g = Grid2D(-10.0, 10.0, 33, 0.0, 0.5, 17)
        with pytest.raises(VerificationImpossibleError, match="masked"):
            pde_residual(s, Fisher(), g, 4)

    def test_translation_covariance(self):
        # autonomous equations: shifted samplers still verify
        s = fisher_front("tanh").shifted(1.5, 0.25)
        g = Grid2D(-8.0, 10.0, 33, 0.0, 0.6, 17)
        rep = pde_residual(s, Fisher(), g, 4)
        assert rep.order_estimate is not None and rep.order_estimate >= 3.5
        assert rep.max_abs < 1e-6

    def test_order_estimate_within_band(self):
        # observed order stays within [stencil_order - 0.5, stencil_order + 1]
        for order in (2, 4):
            s = fisher_front("tanh")
            g = Grid2D(-10.0, 10.0, 41, 0.0, 0.5, 17)
            rep = pde_residual(s, s.equation, g, order)
            assert order - 0.5 <= rep.order_estimate <= order + 1.0

    def test_worst_offenders_reported(self):
        s = fisher_front("tanh")
        g = Grid2D(-10.0, 10.0, 33, 0.0, 0.5, 17)
        rep = pde_residual(s, s.equation, g, 4)
        assert 0 < len(rep.worst) <= 10
        assert abs(rep.worst[0][2]) == pytest.approx(rep.max_abs)

    def test_report_serializes(self):
        s = fisher_front("tanh")
        g = Grid2D(-10.0, 10.0, 33, 0.0, 0.5, 17)
        rep = pde_residual(s, s.equation, g, 4)
        obj = rep.to_json()
        assert obj["stencil_order"] == 4
        assert len(obj["level_max_abs"]) == 3


class TestOdeResidual:
    def test_seed_constant(self):
        y = clean_chain_samples(0, 300)
        rep = ode_residual(phi_chain(0), y)
        assert rep.c_estimate == pytest.approx(-0.25, abs=1e-9)
        assert rep.first_integral_std < 1e-9
        assert rep.second_order_max < 1e-7

    def test_chain3_constant(self):
        y = clean_chain_samples(3, 300)
        rep = ode_residual(phi_chain(3), y)
        assert rep.c_estimate == pytest.approx(16.0, abs=1e-7)
        assert rep.first_integral_std < 1e-7

    def test_reciprocal_element_first_integral_constant(self):
        # hat element sqrt(B0)/phi with B0 = 1/4: (hat')^2 + hat^4 constant
        y = clean_chain_samples(0, 300)
        phi, dphi, _ = phi_chain(0).eval(y)
        hphi = 0.5 / phi
        hdphi = -0.5 * dphi / phi**2
        first = hdphi**2 + hphi**4
        assert np.std(first) < 1e-9
        # the constant is B0 itself, not B0^2
        assert np.mean(first) == pytest.approx(0.25, abs=1e-12)

    def test_all_masked_raises(self):
        with pytest.raises(VerificationImpossibleError):
            ode_residual(phi_chain(0), np.zeros(5))


class TestPropositionSuite:
    def test_all_rows_pass(self):
        rows = proposition_suite(max_index=6, n_samples=200)
        assert all(r.passed for r in rows), [
            (r.index, r.proposition, r.max_deviation) for r in rows if not r.passed
        ]

    def test_structure(self):
        rows = proposition_suite(max_index=3, n_samples=50)
        assert len(rows) == 8  # two rows per index
        odd = [r for r in rows if r.index % 2 == 1]
        assert all("first integral" in r.proposition for r in odd if "chain" not in r.proposition)


class TestPotentialResidual:
    def test_chain_potential_trilinear(self):
        z = z_from_phi(0)
        g = Grid2D(0.45, 0.85, 33, 0.04, 0.1, 17)
        rep = potential_residual(z, {"k": 1.0}, g)
        assert rep.max_abs < 1e-6
        assert rep.order_estimate is not None and rep.order_estimate > 3.0

    def test_plane_wave_potential_trilinear(self):
        z = z_plane_wave(2.0, -1.0, 0.8, 0.0)
        g = Grid2D(-2.0, 2.0, 33, 0.0, 0.3, 17)
        rep = potential_residual(z, {"k": 2.0, "lambda1": 3.0, "lambda2": 0.0}, g)
        assert rep.max_abs < 1e-7
        assert rep.order_estimate is not None and rep.order_estimate > 3.0

    def test_constant_z_identically_zero(self):
        z = ZSampler(z=lambda x, t: np.ones_like(x), z_x=lambda x, t: np.zeros_like(x),
                     label="const")
        g = Grid2D(-1.0, 1.0, 17, 0.0, 1.0, 9)
        rep = potential_residual(z, {"k": 2.0, "lambda1": 1.0}, g)
        assert rep.max_abs == 0.0

    def test_fisher_exponential_reduced_system(self):
        # z = exp(-y/sqrt6 + 5 tau/6) satisfies z_tau = 5 z_yy and
        # 4 z_y z_yyy - z_yy^2 = z_y^2 / 2 with analytic derivatives
        y = np.linspace(-2.0, 2.0, 41)
        tau = 0.3
        z = np.exp(-y / SQRT6 + 5.0 * tau / 6.0)
        z_tau = 5.0 / 6.0 * z
        z_y = -z / SQRT6
        z_yy = z / 6.0
        z_yyy = -z / (6.0 * SQRT6)
        assert np.max(np.abs(z_tau - 5.0 * z_yy)) < 1e-14
        assert np.max(np.abs(4.0 * z_y * z_yyy - z_yy**2 - 0.5 * z_y**2)) < 1e-14
