import math

import numpy as np
import pytest
import scipy.linalg
import scipy.optimize
from hypothesis import given, settings
from hypothesis import strategies as st

from squeezed_rabi import gsrwa
from squeezed_rabi.errors import DegenerateDenominator, TruncationError
from squeezed_rabi.exact import build_hamiltonian, solve_exact
from squeezed_rabi.fock import FockTruncation, ModelParams, annihilation_matrix
from squeezed_rabi.gsrwa import VariationalParams

RESONANT = ModelParams(delta=1.0, omega=1.0, g=0.5, tau=1.0)


def function_elements(x, trunc):
    """cosh, sinh, (a^dag-a)cosh, (a^dag-a)sinh of x(a^dag - a) via Pade expm."""
    a = annihilation_matrix(trunc)
    k = a.T - a
    ep, em = scipy.linalg.expm(x * k), scipy.linalg.expm(-x * k)
    ch, sh = (ep + em) / 2, (ep - em) / 2
    return ch, sh, k @ ch, k @ sh


def transformed_hamiltonian(params, vp, trunc):
    """S U H U^dag S^dag built with scipy's expm, independent of the module."""
    a = annihilation_matrix(trunc)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    u = scipy.linalg.expm(vp.beta * np.kron(sx, a.T - a))
    s = np.kron(np.eye(2), scipy.linalg.expm(vp.lam * (a @ a - a.T @ a.T)))
    h = build_hamiltonian(params, trunc)
    return s @ u @ h @ u.T @ s.T


class TestEta:
    def test_identity_frame(self):
        assert tuple(gsrwa.eta_coeffs(0.0, 0.0, RESONANT)) == (0.0, 1.0, 0.0, 1.0, 1.0)

    def test_unsqueezed(self):
        eta = gsrwa.eta_coeffs(0.3, 0.0, RESONANT)
        assert eta.eta0 == pytest.approx(0.09 - 2 * 0.3 * RESONANT.alpha)
        assert (eta.eta1, eta.eta2, eta.eta3, eta.eta) == (1.0, 0.0, 1.0, 1.0)

    def test_exponentials(self):
        eta = gsrwa.eta_coeffs(0.2, 0.025, RESONANT)
        assert eta.eta3 == pytest.approx(math.exp(0.05), abs=1e-15)
        assert eta.eta == pytest.approx(math.exp(-0.05), abs=1e-15)

    @given(lam=st.floats(-0.5, 0.5), beta=st.floats(-2, 2))
    def test_identities(self, lam, beta):
        eta = gsrwa.eta_coeffs(beta, lam, RESONANT)
        assert eta.eta1 == pytest.approx(math.cosh(4 * lam), rel=1e-13)
        assert eta.eta2 == pytest.approx(math.sinh(4 * lam) / 2, rel=1e-13, abs=1e-16)
        assert eta.eta3 * eta.eta == pytest.approx(1.0, abs=1e-15)
        assert eta.eta1**2 - (2 * eta.eta2) ** 2 == pytest.approx(1.0, abs=1e-12)


class TestCoefficients:
    def test_vanish_without_displacement(self):
        for n in range(5):
            c = gsrwa.coefficients(n, 0.0, 0.03)
            assert (c.G0, c.G2, c.F, c.T, c.D0, c.D2, c.F3) == (1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0)

    def test_vacuum_values(self):
        # 2 beta eta = 0.4 with lam = 0
        assert gsrwa.coeff_G0(0, 0.2, 0.0) == pytest.approx(math.exp(-0.08), abs=1e-15)
        assert gsrwa.coeff_F(0, 0.2, 0.0) == pytest.approx(0.4 * math.exp(-0.08), abs=1e-15)

    @pytest.mark.parametrize("x", [0.1, 0.4, 0.8])
    @pytest.mark.parametrize("lam", [0.0, 0.04])
    def test_match_matrix_elements(self, x, lam):
        tr = FockTruncation(60)
        ch, sh, kch, ksh = function_elements(x, tr)
        beta = x / (2 * math.exp(-2 * lam))
        for n in range(7):
            c = gsrwa.coefficients(n, beta, lam)
            assert c.G0 == pytest.approx(ch[n, n], abs=1e-9)
            assert c.G2 == pytest.approx(ch[n + 2, n] / math.sqrt((n + 1) * (n + 2)), abs=1e-9)
            assert c.F == pytest.approx(sh[n + 1, n] / math.sqrt(n + 1), abs=1e-9)
            assert c.F3 == pytest.approx(sh[n + 3, n], abs=1e-9)
            assert c.T == pytest.approx(kch[n + 1, n] / math.sqrt(n + 1), abs=1e-9)
            assert c.D0 == pytest.approx(ksh[n, n], abs=1e-9)
            assert c.D2 == pytest.approx(ksh[n + 2, n] / math.sqrt((n + 1) * (n + 2)), abs=1e-9)


class TestClosedForms:
    def test_kappa(self):
        assert gsrwa.kappa(ModelParams(1.0, 1.0, 0.0)) == 0.0
        assert gsrwa.kappa(RESONANT) == pytest.approx(0.25, abs=1e-15)
        p = ModelParams(3.0, 1.0, 0.8, 1.0)
        assert gsrwa.kappa(p) == pytest.approx(p.g / (p.omega + p.delta))

    @given(g=st.floats(0, 2), tau=st.floats(0, 3))
    def test_kappa_uses_counter_rotating_coupling(self, g, tau):
        p = ModelParams(2.0, 1.0, g, tau)
        assert gsrwa.kappa(p) == pytest.approx(g * tau / 3.0, abs=1e-14)

    def test_lambda(self):
        assert gsrwa.lambda_closed(ModelParams(1.0, 1.0, 0.0)) == 0.0
        expected = 0.0625 * 0.875 / (2 + 4 * 0.0625 * 0.875)
        assert gsrwa.lambda_closed(RESONANT) == pytest.approx(expected, abs=1e-15)
        assert gsrwa.lambda_closed(RESONANT) == pytest.approx(0.024648, abs=1e-6)

    def test_lambda_numerator_zero(self):
        # tau = 0: gamma = -g/2 and kappa = 0
        assert gsrwa.lambda_closed(ModelParams(1.0, 1.0, 0.7, 0.0)) == 0.0

    def test_kappa_degenerate(self):
        with pytest.raises(DegenerateDenominator):
            gsrwa.kappa(ModelParams(-1.0, 1.0, 0.3))

    def test_beta(self):
        p0 = ModelParams(1.0, 1.0, 0.0)
        assert gsrwa.beta_closed(p0, 0.0) == 0.0
        assert gsrwa.beta_gvm(p0) == 0.0
        assert gsrwa.beta_gvm(RESONANT) == gsrwa.beta_closed(RESONANT, 0.0)
        assert gsrwa.beta_gvm(RESONANT) == pytest.approx(0.5 / (1 + math.exp(-0.125)), abs=1e-15)
        assert gsrwa.beta_gvm(RESONANT) == pytest.approx(0.265605, abs=1e-6)

    def test_beta_adiabatic_limit(self):
        p = ModelParams(0.0, 1.0, 0.6, 1.0)
        assert gsrwa.beta_closed(p, 0.0) == pytest.approx(p.g / p.omega, abs=1e-15)

    def test_grwa_isotropic_only(self):
        assert gsrwa.beta_grwa(RESONANT) == 0.5
        with pytest.raises(ValueError):
            gsrwa.beta_grwa(ModelParams(1.0, 1.0, 0.5, 0.5))

    def test_method_tags(self):
        assert gsrwa.variational_params(RESONANT, "gvm").lam == 0.0
        with pytest.raises(ValueError):
            VariationalParams(0.1, 0.01, "gvm")
        with pytest.raises(ValueError):
            VariationalParams(0.1, 0.0, "nope")


class TestResiduals:
    def test_zero_coupling(self):
        vp = VariationalParams(0.0, 0.0, "gsrwa")
        assert gsrwa.elimination_residuals(ModelParams(1.0, 1.0, 0.0), vp, 0) == (0.0, 0.0)

    def test_gvm_leaves_two_photon_residual(self):
        vp = gsrwa.variational_params(RESONANT, "gvm")
        c = gsrwa.coefficients(0, vp.beta, 0.0)
        crw, two = gsrwa.elimination_residuals(RESONANT, vp, 0)
        assert two == pytest.approx(-(RESONANT.delta / 2 * c.G2), abs=1e-15)
        assert abs(two) > 1e-3

    @pytest.mark.parametrize("tau", [0.5, 1.0, 1.5])
    @pytest.mark.parametrize("n", [0, 2])
    def test_residuals_are_matrix_elements(self, tau, n):
        p = ModelParams(4.0, 1.0, 0.8, tau)
        vp = gsrwa.closed_form_params(p)
        tr = FockTruncation(80)
        h2 = transformed_hamiltonian(p, vp, tr)
        up, dn = 0, tr.size
        crw, two = gsrwa.elimination_residuals(p, vp, n)
        assert h2[up + n + 1, dn + n] == pytest.approx(crw * math.sqrt(n + 1), abs=1e-10)
        assert h2[dn + n + 2, dn + n] == pytest.approx(two * math.sqrt((n + 1) * (n + 2)), abs=1e-10)

    @pytest.mark.parametrize("g", [0.1, 0.2, 0.3, 0.4, 0.5])
    def test_simplified_crw_small(self, g):
        p = ModelParams(1.0, 1.0, g, 1.0)
        r1, _ = gsrwa.simplified_residuals(p, gsrwa.closed_form_params(p))
        assert abs(r1) <= 1e-2

    @pytest.mark.parametrize("g", [0.1, 0.2, 0.3])
    def test_simplified_two_photon_small_at_weak_coupling(self, g):
        p = ModelParams(1.0, 1.0, g, 1.0)
        _, r2 = gsrwa.simplified_residuals(p, gsrwa.closed_form_params(p))
        assert abs(r2) <= 1e-2

    def test_simplified_two_photon_grows(self):
        # the closed forms drop higher orders; the two-photon remainder
        # passes 1e-2 between g = 0.3 and 0.4 at resonance
        p = ModelParams(1.0, 1.0, 0.5, 1.0)
        _, r2 = gsrwa.simplified_residuals(p, gsrwa.closed_form_params(p))
        assert r2 == pytest.approx(-0.04357, abs=1e-4)


class TestFullSolver:
    def test_zero_coupling(self):
        vp = gsrwa.solve_variational_full(ModelParams(1.0, 1.0, 0.0))
        assert (vp.beta, vp.lam) == (0.0, 0.0)
        assert gsrwa.elimination_residuals(ModelParams(1.0, 1.0, 0.0), vp) == (0.0, 0.0)

    def test_resonant_root(self):
        seed = gsrwa.closed_form_params(RESONANT)
        vp = gsrwa.solve_variational_full(RESONANT, 0)
        crw, two = gsrwa.elimination_residuals(RESONANT, vp, 0)
        assert abs(crw) <= 1e-10 and abs(two) <= 1e-10
        assert abs(vp.beta - seed.beta) < 0.02 and abs(vp.lam - seed.lam) < 0.01

        def resid(v):
            return gsrwa.elimination_residuals(RESONANT, VariationalParams(v[0], v[1], "gsrwa-full"))

        ref = scipy.optimize.fsolve(resid, [seed.beta, seed.lam], xtol=1e-12)
        assert vp.beta == pytest.approx(ref[0], abs=1e-10)
        assert vp.lam == pytest.approx(ref[1], abs=1e-10)

    @pytest.mark.parametrize("n", [1, 3])
    def test_higher_blocks(self, n):
        p = ModelParams(4.0, 1.0, 0.7, 0.5)
        vp = gsrwa.solve_variational_full(p, n)
        assert vp.n == n
        assert max(map(abs, gsrwa.elimination_residuals(p, vp, n))) <= 1e-10


class TestBlocks:
    @pytest.mark.parametrize("delta", [0.5, 1.0, 4.0])
    def test_bare(self, delta):
        p = ModelParams(delta, 1.0, 0.0)
        vp = gsrwa.variational_params(p, "gsrwa")
        for n in range(5):
            blk = gsrwa.block_spectrum(p, vp, n)
            assert sorted([blk.E_minus, blk.E_plus]) == pytest.approx(
                sorted([n + delta / 2, n + 1 - delta / 2]), abs=1e-14
            )
            if blk.delta_n > 0:
                assert blk.theta_n == 0.0
            elif blk.delta_n < 0:
                assert blk.theta_n == pytest.approx(math.pi)
            else:
                assert blk.theta_n == pytest.approx(math.pi / 2)
        assert gsrwa.ground_energy(p, vp) == -delta / 2

    def test_unmixed_when_uncoupled(self):
        p = ModelParams(2.0, 1.0, 0.0)
        blk = gsrwa.block_spectrum(p, gsrwa.variational_params(p, "gsrwa"), 3)
        assert blk.R == 0.0 and blk.theta_n == 0.0
        assert np.array_equal(blk.vector("+"), [1.0, 0.0])

    @pytest.mark.parametrize("tau", [0.5, 1.0, 1.5])
    @pytest.mark.parametrize("method", ["gsrwa", "gvm"])
    def test_block_matches_transformed_hamiltonian(self, tau, method):
        p = ModelParams(1.0, 1.0, 1.0, tau)
        vp = gsrwa.variational_params(p, method)
        tr = FockTruncation(100)
        h2 = transformed_hamiltonian(p, vp, tr)
        up, dn = 0, tr.size
        assert h2[dn, dn] == pytest.approx(gsrwa.ground_energy(p, vp), abs=1e-10)
        for n in range(4):
            m = gsrwa.block_spectrum(p, vp, n).matrix
            assert h2[up + n, up + n] == pytest.approx(m[0, 0], abs=1e-10)
            assert h2[dn + n + 1, dn + n + 1] == pytest.approx(m[1, 1], abs=1e-10)
            assert h2[dn + n + 1, up + n] == pytest.approx(m[1, 0], abs=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(
        delta=st.floats(0.1, 5),
        g=st.floats(0, 1.5),
        tau=st.floats(0, 2),
        n=st.integers(0, 8),
    )
    def test_trace_determinant_and_eigenvectors(self, delta, g, tau, n):
        p = ModelParams(delta, 1.0, g, tau)
        blk = gsrwa.block_spectrum(p, gsrwa.variational_params(p, "gsrwa"), n)
        m = blk.matrix
        scale = max(1.0, np.max(np.abs(m)))
        assert blk.E_plus >= blk.E_minus
        assert blk.E_plus + blk.E_minus == pytest.approx(np.trace(m), abs=1e-12 * scale)
        assert blk.E_plus * blk.E_minus == pytest.approx(np.linalg.det(m), abs=1e-12 * scale**2)
        assert m[0, 1] == m[1, 0]
        for br in "+-":
            v = blk.vector(br)
            assert np.allclose(m @ v, blk.energy(br) * v, atol=1e-12 * scale)
        if blk.R >= 0:
            assert 0.0 <= blk.theta_n <= math.pi
            off = blk.R * math.sqrt(n + 1)
            split = math.hypot(blk.delta_n, 2 * off)
            if split > 0:
                assert math.cos(blk.theta_n) == pytest.approx(blk.delta_n / split, abs=1e-12)

    def test_isotropic_drops_gamma_terms(self):
        p = ModelParams(2.0, 1.0, 0.8, 1.0)
        vp = gsrwa.closed_form_params(p)
        blk = gsrwa.block_spectrum(p, vp, 2)
        c = gsrwa.coefficients(2, vp.beta, vp.lam)
        eta = gsrwa.eta_coeffs(vp.beta, vp.lam, p)
        assert blk.R == (p.alpha - vp.beta) * eta.eta3 + p.delta / 2 * c.F
        assert blk.f_n == p.delta / 2 * c.G0

    def test_resonant_block_zero_against_oracle(self):
        vp = gsrwa.closed_form_params(RESONANT)
        blk = gsrwa.block_spectrum(RESONANT, vp, 0)
        ex = solve_exact(RESONANT).energies
        labels = gsrwa.lowest_levels(RESONANT, vp, 4)
        # sorted positions of the n = 0 pair
        pos = {(lv.branch, lv.n): i for i, lv in enumerate(labels)}
        assert pos[("-", 0)] == 1 and pos[("+", 0)] == 3
        assert abs(blk.E_minus - ex[1]) <= 0.05
        assert abs(blk.E_plus - ex[3]) <= 0.05


class TestSpectrum:
    def test_ground_against_oracle(self):
        vp = gsrwa.closed_form_params(RESONANT)
        assert abs(gsrwa.ground_energy(RESONANT, vp) - solve_exact(RESONANT).energies[0]) <= 0.02

    def test_ground_gvm_reduction(self):
        vp = gsrwa.variational_params(RESONANT, "gvm")
        b = vp.beta
        expected = b * b - 2 * b * RESONANT.alpha - RESONANT.delta / 2 * math.exp(-2 * b * b)
        assert gsrwa.ground_energy(RESONANT, vp) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("method", gsrwa.METHODS)
    def test_bare_ladder(self, method):
        p = ModelParams(1.0, 1.0, 0.0)
        levels = gsrwa.full_spectrum(p, gsrwa.variational_params(p, method), 6)
        energies = [lv.energy for lv in levels]
        ladder = sorted([-0.5] + [n + 0.5 for n in range(7)] + [n + 0.5 for n in range(7)])
        assert energies == pytest.approx(ladder, abs=1e-14)
        assert levels[0].branch == "0"

    def test_levels_labelled(self):
        levels = gsrwa.full_spectrum(RESONANT, gsrwa.closed_form_params(RESONANT), 3)
        assert len(levels) == 1 + 2 * 4
        assert {(lv.branch, lv.n) for lv in levels[1:]} == {(b, n) for b in "+-" for n in range(4)}

    def test_high_frequency_atom_beats_gvm(self):
        p = ModelParams(4.0, 1.0, 1.0, 1.0)
        ex = solve_exact(p).energies[:6]
        err = {
            m: np.sum(np.abs(gsrwa.lowest_energies(p, gsrwa.variational_params(p, m), 6) - ex))
            for m in ("gsrwa", "gvm")
        }
        assert err["gsrwa"] < err["gvm"]


class TestStates:
    def test_bare_ground_state(self):
        p = ModelParams(1.0, 1.0, 0.0)
        tr = FockTruncation(10)
        psi = gsrwa.ground_state(p, gsrwa.closed_form_params(p), tr)
        ref = np.zeros(tr.dim)
        ref[tr.size] = 1.0
        assert abs(psi @ ref) == pytest.approx(1.0, abs=1e-14)

    def test_normalized(self):
        tr = FockTruncation(60)
        vp = gsrwa.closed_form_params(RESONANT)
        for n in range(5):
            blk = gsrwa.block_spectrum(RESONANT, vp, n)
            for br in "+-":
                psi = gsrwa.eigenstate_original_frame(RESONANT, vp, blk, br, tr)
                assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-8)

    def test_fidelity_lowest_four(self):
        p = ModelParams(1.0, 1.0, 0.3, 1.0)
        tr = FockTruncation(80)
        vp = gsrwa.closed_form_params(p)
        ex = solve_exact(p, n_max=80)
        for i, lv in enumerate(gsrwa.lowest_levels(p, vp, 4)):
            blk = None if lv.n is None else gsrwa.block_spectrum(p, vp, lv.n)
            psi = gsrwa.eigenstate_original_frame(p, vp, blk, lv.branch, tr)
            assert abs(ex.vectors[:, i] @ psi) >= 0.99

    def test_gvm_uses_displaced_states(self):
        p = ModelParams(1.0, 1.0, 0.6, 1.0)
        tr = FockTruncation(60)
        vp = gsrwa.variational_params(p, "gvm")
        blk = gsrwa.block_spectrum(p, vp, 1)
        psi = gsrwa.eigenstate_original_frame(p, vp, blk, "+", tr).reshape(2, -1)
        c, s = blk.vector("+")
        # x-spin components: (+x) = (up + down)/sqrt2, (-x) = (down - up)/sqrt2
        plus_x = (psi[0] + psi[1]) / math.sqrt(2)
        minus_x = (psi[1] - psi[0]) / math.sqrt(2)
        d_minus = scipy.linalg.expm(-vp.beta * (annihilation_matrix(tr).T - annihilation_matrix(tr)))
        e = np.eye(tr.size)
        assert np.allclose(plus_x, d_minus @ (c * e[1] + s * e[2]) / math.sqrt(2), atol=1e-10)
        assert np.allclose(minus_x, d_minus.T @ (-c * e[1] + s * e[2]) / math.sqrt(2), atol=1e-10)

    def test_truncation_error(self):
        p = ModelParams(1.0, 1.0, 0.5)
        vp = gsrwa.closed_form_params(p)
        with pytest.raises(TruncationError):
            gsrwa.eigenstate_original_frame(p, vp, gsrwa.block_spectrum(p, vp, 9), "+", FockTruncation(10))


class TestObservables:
    def test_zero_coupling(self):
        p = ModelParams(1.0, 1.0, 0.0)
        vp = gsrwa.closed_form_params(p)
        assert gsrwa.mean_a(vp) == 0.0 and gsrwa.mean_n(vp) == 0.0
        assert gsrwa.momentum_variance(p, vp) == 0.5

    def test_gvm_momentum_unsqueezed(self):
        p = ModelParams(1.0, 2.0, 0.8)
        assert gsrwa.momentum_variance(p, gsrwa.variational_params(p, "gvm")) == 1.0

    @given(lam=st.floats(-0.3, 0.3), omega=st.floats(0.2, 5))
    def test_minimum_uncertainty_product(self, lam, omega):
        p = ModelParams(1.0, omega, 0.3)
        vp = VariationalParams(0.1, lam, "gsrwa")
        prod = gsrwa.momentum_variance(p, vp) * gsrwa.position_variance(p, vp)
        assert prod == pytest.approx(0.25, abs=1e-12)

    @pytest.mark.parametrize("g", [0.2, 0.6, 1.0])
    def test_momentum_squeezed(self, g):
        p = ModelParams(4.0, 1.0, g)
        vp = gsrwa.closed_form_params(p)
        assert vp.lam > 0
        assert gsrwa.momentum_variance(p, vp) < 0.5

    def test_against_constructed_states(self):
        p = ModelParams(4.0, 1.0, 1.0)
        tr = FockTruncation(80)
        vp = gsrwa.closed_form_params(p)
        a = annihilation_matrix(tr)
        branch = gsrwa.displaced_squeezed_state(0, +1, vp, tr)
        assert branch @ a @ branch == pytest.approx(gsrwa.mean_a(vp), abs=1e-10)
        var_x = branch @ (a + a.T) @ (a + a.T) @ branch / 2 - (branch @ (a + a.T) @ branch) ** 2 / 2
        assert var_x == pytest.approx(gsrwa.position_variance(p, vp), abs=1e-10)
        psi = gsrwa.ground_state(p, vp, tr).reshape(2, -1)
        n_op = a.T @ a
        assert sum(v @ n_op @ v for v in psi) == pytest.approx(gsrwa.mean_n(vp), abs=1e-10)
        k = a.T - a
        dp = -p.omega / 2 * sum(v @ k @ k @ v for v in psi)
        assert dp == pytest.approx(gsrwa.momentum_variance(p, vp), abs=1e-10)
        # parity symmetric cat: the full state has no net displacement
        assert sum(v @ a @ v for v in psi) == pytest.approx(0.0, abs=1e-12)
