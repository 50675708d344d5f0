"""Closed-form block propagators and the full-grid linear solution operator."""

import numpy as np
import pytest
import scipy.linalg

from helpers import dense_linear_generator, single_mode_state, smooth_state
from veflow import (
    BlockSystem,
    FlowState,
    ParameterError,
    Propagator2x2,
    apply_linear_semigroup,
    decay_exponent,
    eigenvalues,
    make_params,
    propagator,
    propagator_integral,
)
from veflow.oracles import rk4_block_expm, rk4_matrix_exponential
from veflow.semigroup import _entries
from veflow.state import state_from_spectra


@pytest.fixture(scope="module")
def comp():
    return BlockSystem.compressible(make_params())


class TestEigenvalues:
    def test_oscillatory_example(self, comp):
        kp, km = eigenvalues(comp, 1.0)
        assert kp == pytest.approx(-1.0 + 1.0j, abs=1e-14)
        assert km == pytest.approx(-1.0 - 1.0j, abs=1e-14)

    def test_zero_frequency(self, comp):
        assert eigenvalues(comp, 0.0) == (0.0, 0.0)

    def test_overdamped_example(self, comp):
        kp, km = eigenvalues(comp, 2.0)
        assert kp == pytest.approx(-4.0 + 2.0 * np.sqrt(2.0), abs=1e-12)
        assert km == pytest.approx(-4.0 - 2.0 * np.sqrt(2.0), abs=1e-12)

    def test_vieta_relations(self, comp, rng):
        for r in rng.uniform(0.0, 8.0, size=25):
            kp, km = eigenvalues(comp, r)
            assert abs(kp * km - comp.b * r**2) < 1e-12 * (1.0 + r**2)
            assert abs(kp + km + comp.nu * r**2) < 1e-12 * (1.0 + r**2)

    def test_spectral_stability(self, rng):
        for nu, b in [(0.1, 0.5), (1.0, 1.0), (2.0, 2.0), (5.0, 0.2), (0.3, 7.0)]:
            system = BlockSystem(nu, b)
            for r in np.concatenate([[0.0], rng.uniform(0, 10, 40)]):
                kp, km = eigenvalues(system, float(r))
                assert kp.real <= 1e-15
                assert km.real <= 1e-15
                if r > 0:
                    assert kp.real < 0.0

    def test_invalid_block(self):
        with pytest.raises(ParameterError):
            BlockSystem(-1.0, 1.0)


class TestPropagator:
    def test_identity_at_zero_time(self, comp):
        m = propagator(comp, 1.3, 0.0).matrix
        assert np.allclose(m, np.eye(2), atol=1e-15)

    def test_against_rk4_example(self, comp):
        exact = propagator(comp, 1.0, 1.0).matrix
        oracle = rk4_matrix_exponential(comp.nu, comp.b, 1.0, 1.0)
        assert np.max(np.abs(exact - oracle)) < 1e-8

    def test_confluent_continuity(self, comp):
        rstar = comp.confluent_radius
        assert rstar == pytest.approx(np.sqrt(2.0))
        at = propagator(comp, rstar, 1.0).matrix
        below = propagator(comp, rstar - 1e-6, 1.0).matrix
        above = propagator(comp, rstar + 1e-6, 1.0).matrix
        assert np.max(np.abs(at - below)) < 1e-5
        assert np.max(np.abs(at - above)) < 1e-5

    def test_confluent_limit_formula(self, comp):
        rstar = comp.confluent_radius
        t = 0.8
        kappa = -0.5 * comp.nu * rstar**2
        a_mat = np.array([[0.0, -rstar], [comp.b * rstar, -comp.nu * rstar**2]])
        limit = np.exp(kappa * t) * (np.eye(2) + t * (a_mat - kappa * np.eye(2)))
        assert np.max(np.abs(propagator(comp, rstar, t).matrix - limit)) < 1e-12

    def test_group_property(self, comp, rng):
        for _ in range(20):
            r = float(rng.uniform(0.0, 5.0))
            t1, t2 = rng.uniform(0.0, 2.0, size=2)
            p1 = propagator(comp, r, float(t1)).matrix
            p2 = propagator(comp, r, float(t2)).matrix
            p12 = propagator(comp, r, float(t1 + t2)).matrix
            assert np.max(np.abs(p12 - p2 @ p1)) < 1e-9

    def test_determinant_identity(self, comp, rng):
        for _ in range(20):
            r = float(rng.uniform(0.0, 5.0))
            t = float(rng.uniform(0.0, 3.0))
            det = np.linalg.det(propagator(comp, r, t).matrix)
            assert abs(det - np.exp(-comp.nu * r**2 * t)) < 1e-10

    def test_negative_time_rejected(self, comp):
        with pytest.raises(ParameterError):
            propagator(comp, 1.0, -0.1)

    def test_entries_real_and_finite_on_array(self, comp):
        r = np.linspace(0.0, 50.0, 400)
        for t in (0.0, 0.01, 1.0, 100.0, 1e4):
            for e in _entries(comp.nu, comp.b, r, t):
                assert np.all(np.isfinite(e))

    def test_integral_against_quadrature(self, comp):
        # Simpson on the closed-form entries is an independent check of J
        for r in (0.0, 1e-4, 0.3, np.sqrt(2.0), 3.0):
            t = 1.7
            ts = np.linspace(0.0, t, 4001)
            vals = np.stack(
                [np.stack(_entries(comp.nu, comp.b, np.asarray(float(r)), float(s))) for s in ts]
            ).reshape(len(ts), 2, 2)
            from scipy.integrate import simpson

            ref = simpson(vals, x=ts, axis=0)
            got = propagator_integral(comp, float(r), t)
            assert np.max(np.abs(got - ref)) < 1e-9


class TestDecayExponent:
    @pytest.mark.parametrize(
        "l,k,want",
        [(1, 0, 0.75), (1, 1, 1.25), (2, 0, 0.0), (2, 1, 0.5), (1, 2, 1.75)],
    )
    def test_rate_table(self, l, k, want):
        assert decay_exponent(l, k) == pytest.approx(want)


class TestGridSemigroup:
    def test_zero_state_stays_zero(self, grid8, params):
        out = apply_linear_semigroup(FlowState.zero(grid8), params, 2.0)
        assert out.h_norm(2) == 0.0

    def test_identity_at_zero_time(self, grid8, params, rng):
        st = smooth_state(grid8, rng)
        out = apply_linear_semigroup(st, params, 0.0)
        for f0, f1 in zip(st.fields(), out.fields()):
            assert np.max(np.abs(f0.samples - f1.samples)) < 1e-13

    def test_longitudinal_sector_invariance(self, grid16, params):
        x, _, _ = grid16.axes()
        n = 0.01 * np.sin(x) + np.zeros(grid16.shape)
        st = state_from_spectra(
            grid16,
            np.fft.fftn(n) / grid16.n**3,
            np.zeros((3,) + grid16.shape, complex),
            np.zeros((3, 3) + grid16.shape, complex),
            0.0,
        )
        out = apply_linear_semigroup(st, params, 1.5)
        # transverse velocity and curl stay zero: v stays along e1, mode (1,0,0)
        from veflow import curl_matrix, hodge_decompose

        d, omega = hodge_decompose(out.v)
        assert np.max(np.abs(omega.to_physical().samples)) < 1e-12
        assert np.max(np.abs(out.v.samples[1:])) < 1e-12
        assert np.max(np.abs(curl_matrix(out.v).to_physical().samples)) < 1e-12

    def test_shear_sector_invariance_and_oracle(self, grid16, params):
        _, y, _ = grid16.axes()
        v = np.zeros((3,) + grid16.shape)
        v[0] = 0.01 * np.sin(y) + np.zeros(grid16.shape)
        st = state_from_spectra(
            grid16,
            np.zeros(grid16.shape, complex),
            np.fft.fftn(v, axes=(-3, -2, -1)) / grid16.n**3,
            np.zeros((3, 3) + grid16.shape, complex),
            0.0,
        )
        t = 0.9
        out = apply_linear_semigroup(st, params, t)
        assert np.max(np.abs(out.n.samples)) < 1e-12
        from veflow import div, hodge_decompose

        assert np.max(np.abs(div(out.v).to_physical().samples)) < 1e-12
        # per-mode oracle at k = (0, 1, 0)
        xi = np.array([0.0, 1.0, 0.0])
        L = dense_linear_generator(xi, params)
        u0 = np.zeros(13, complex)
        u0[1] = st.v.spectrum[0, 0, 1, 0]
        u_t = scipy.linalg.expm(L * t) @ u0
        assert abs(out.v.spectrum[0, 0, 1, 0] - u_t[1]) < 1e-8
        assert abs(out.E.spectrum[0, 1, 0, 1, 0] - u_t[4 + 3 * 0 + 1]) < 1e-8

    @pytest.mark.parametrize("aval,lam", [(1.0, 0.0), (1.5, 0.3), (0.25, -0.2)])
    def test_matches_dense_exponential_on_random_modes(self, grid8, rng, aval, lam):
        params = make_params(mu=1.0, lam=lam, alpha=aval)
        st_modes = [
            (1, 0, 0),
            (0, 2, 0),
            (1, 1, 1),
            (-2, 1, 0),
            (3, -3, 2),
        ]
        for k in st_modes:
            u0 = 0.01 * (rng.standard_normal(13) + 1j * rng.standard_normal(13))
            st = single_mode_state(grid8, k, u0)
            for t in (0.4, 1.7):
                out = apply_linear_semigroup(st, params, t)
                xi = (2.0 * np.pi / grid8.length) * np.array(k, dtype=float)
                u_exact = scipy.linalg.expm(dense_linear_generator(xi, params) * t) @ u0
                idx = tuple(kk % grid8.n for kk in k)
                got = np.empty(13, complex)
                got[0] = out.n.spectrum[idx]
                for i in range(3):
                    got[1 + i] = out.v.spectrum[(i,) + idx]
                    for j in range(3):
                        got[4 + 3 * i + j] = out.E.spectrum[(i, j) + idx]
                err = np.max(np.abs(got - u_exact)) / np.max(np.abs(u0))
                assert err < 1e-12

    def test_matches_fine_step_pde_integrator(self, grid8, params, rng):
        """RK4 on the spectrally discretized linear system, band-limited data."""
        st = smooth_state(grid8, rng, amp=1e-2, kmax=2)
        t_end = 0.5
        n_steps = 2000
        dt = t_end / n_steps

        g = grid8
        xi = g.xi
        r2 = g.xi_mag**2 * g.nyquist_mask
        a = params.a

        def rhs(n, v, e):
            divv = np.einsum("j...,j...->...", 1j * xi, v)
            dn = -divv
            dive = np.einsum("j...,ij...->i...", 1j * xi, e)
            dv = (
                -params.mu * r2 * v
                - (params.lam + params.mu) * np.einsum("i...,...->i...", xi, np.einsum("j...,j...->...", xi, v))
                - 1j * xi * n[np.newaxis]
                + a * dive
            )
            de = np.einsum("j...,i...->ij...", 1j * xi, v)
            return dn, dv, de

        n = st.n.spectrum.copy()
        v = st.v.spectrum.copy()
        e = st.E.spectrum.copy()
        for _ in range(n_steps):
            k1 = rhs(n, v, e)
            k2 = rhs(n + 0.5 * dt * k1[0], v + 0.5 * dt * k1[1], e + 0.5 * dt * k1[2])
            k3 = rhs(n + 0.5 * dt * k2[0], v + 0.5 * dt * k2[1], e + 0.5 * dt * k2[2])
            k4 = rhs(n + dt * k3[0], v + dt * k3[1], e + dt * k3[2])
            n = n + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            v = v + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            e = e + (dt / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        reference = state_from_spectra(g, n, v, e, t_end)

        out = apply_linear_semigroup(st, params, t_end)
        from veflow.diagnostics import h2_distance

        assert h2_distance(out, reference) < 1e-6

    def test_hermitian_output_gives_real_fields(self, grid8, params, rng):
        st = smooth_state(grid8, rng)
        out = apply_linear_semigroup(st, params, 0.7)
        for f in out.fields():
            assert np.isrealobj(f.samples)

    def test_vectorized_oracle_batch(self, comp):
        radii = np.linspace(0.0, 4.0, 9)
        times = [0.0, 0.5, 2.0]
        batch = rk4_block_expm(comp.nu, comp.b, radii, times)
        for it, t in enumerate(times):
            for ir, r in enumerate(radii):
                exact = Propagator2x2.build(comp, float(r), float(t)).matrix
                assert np.max(np.abs(exact - batch[it, ir])) < 1e-8
