import numpy as np
import pytest

from scnls import Grid
from scnls.errors import ConfigError, GridMismatchError, NumericalGuardError
from scnls.nls import NLSConfig, build_initial_data, evolve_nls, nls_invariants
from scnls.presets import InitialData, gaussian, snap_wavevector


def make_plane_wave_data(grid, amplitude, k_request, epsilon):
    ksnap, _ = snap_wavevector([k_request], grid, epsilon)
    return InitialData(
        grid=grid, a0=np.full(grid.shape, amplitude, dtype=complex),
        a1=np.zeros(grid.shape, dtype=complex),
        phi0_periodic=np.zeros(grid.shape), phi0_wavevector=ksnap,
    ), ksnap[0]


class TestBuildInitialData:
    def test_zero_first_order_term(self, gaussian_data):
        data = InitialData(grid=gaussian_data.grid, a0=gaussian_data.a0,
                           a1=np.zeros(gaussian_data.grid.shape, dtype=complex),
                           phi0_periodic=gaussian_data.phi0_periodic,
                           phi0_wavevector=(0.0,))
        u0 = build_initial_data(data, 0.25)
        assert np.max(np.abs(u0 - data.a0)) < 1e-14

    def test_two_term_amplitude(self, gaussian_data):
        u0 = build_initial_data(gaussian_data, 0.1)
        expected = gaussian_data.a0 + 0.1 * gaussian_data.a1
        assert np.max(np.abs(u0 - expected)) < 1e-14

    def test_phase_factor(self, grid_wide):
        g = grid_wide
        per = 0.3 * np.cos(2 * np.pi * g.axes[0] / g.lengths[0])
        data = InitialData(grid=g, a0=np.ones(g.shape, dtype=complex),
                           a1=np.zeros(g.shape, dtype=complex),
                           phi0_periodic=per, phi0_wavevector=(0.0,))
        eps = 0.2
        u0 = build_initial_data(data, eps)
        assert np.max(np.abs(u0 - np.exp(1j * per / eps))) < 1e-13

    def test_wavevector_snapping_example(self):
        # round(k*L/(2 pi eps)) with k=0.5, eps=1/8, L=2 pi -> mode 4
        g = Grid(64, 2 * np.pi)
        ksnap, modes = snap_wavevector([0.5], g, 0.125)
        assert modes == (4,)
        assert ksnap[0] / 0.125 == pytest.approx(4.0)  # k/eps on the lattice

    def test_snapped_wave_is_periodic(self):
        g = Grid(64, 2 * np.pi)
        eps = 0.125
        data, _ = make_plane_wave_data(g, 1.0, 0.47, eps)
        u0 = build_initial_data(data, eps)
        # single lattice mode: spectrum has exactly one nonzero coefficient
        spectrum = np.abs(np.fft.fft(u0))
        assert np.sum(spectrum > 1e-8 * spectrum.max()) == 1

    def test_epsilon_out_of_range(self, gaussian_data):
        with pytest.raises(ConfigError):
            build_initial_data(gaussian_data, 1.5)


class TestEvolve:
    def test_plane_wave_exact(self):
        # dispersion oracle: u = A exp(i(kx - w t)/eps), w = k^2/2 + |A|^(2s)
        g = Grid(256, 2 * np.pi)
        eps, sigma, A, T = 0.125, 2, 0.8, 0.1
        data, k = make_plane_wave_data(g, A, 0.5, eps)
        u0 = build_initial_data(data, eps)
        cfg = NLSConfig(grid=g, epsilon=eps, sigma=sigma, final_time=T,
                        dt_override=1e-5, self_check=False)
        traj = evolve_nls(u0, cfg)
        omega = k**2 / 2 + A ** (2 * sigma)
        exact = A * np.exp(1j * (k * g.axes[0] - omega * T) / eps)
        assert np.max(np.abs(traj.states[-1] - exact)) < 1e-8

    def test_zero_stays_zero(self, grid_1d):
        cfg = NLSConfig(grid=grid_1d, epsilon=0.5, sigma=1, final_time=0.1,
                        dt_override=1e-3, self_check=False)
        traj = evolve_nls(np.zeros(grid_1d.shape, complex), cfg)
        assert np.max(np.abs(traj.states[-1])) == 0.0

    def test_richardson_self_convergence(self, gaussian_data):
        # second-order splitting: halving dt shrinks the defect ~4x
        g = gaussian_data.grid
        eps = 0.5
        u0 = build_initial_data(gaussian_data, eps)

        def final(dt):
            cfg = NLSConfig(grid=g, epsilon=eps, sigma=2, final_time=0.2,
                            dt_override=dt, self_check=False)
            return evolve_nls(u0, cfg).states[-1]

        f1, f2, f4 = final(2e-3), final(1e-3), final(5e-4)
        ratio = g.l2_norm(f1 - f2) / g.l2_norm(f2 - f4)
        assert 3.5 <= ratio <= 4.5

    def test_energy_drift_second_order(self, gaussian_data):
        # splitting conserves energy up to O(dt^2): halving dt shrinks the
        # accumulated drift by ~4
        g = gaussian_data.grid
        eps, sigma, T = 0.5, 2, 0.2
        u0 = build_initial_data(gaussian_data, eps)

        def drift(dt):
            cfg = NLSConfig(grid=g, epsilon=eps, sigma=sigma, final_time=T,
                            dt_override=dt, self_check=False)
            traj = evolve_nls(u0, cfg)
            e0 = nls_invariants(traj.states[0], 0.0, g, eps, sigma).energy
            eT = nls_invariants(traj.states[-1], T, g, eps, sigma).energy
            return abs(eT - e0)

        ratio = drift(2e-3) / drift(1e-3)
        assert 3.5 <= ratio <= 4.5

    def test_mass_drift_1000_steps(self, gaussian_data):
        g = gaussian_data.grid
        u0 = build_initial_data(gaussian_data, 0.125)
        cfg = NLSConfig(grid=g, epsilon=0.125, sigma=2, final_time=0.1,
                        dt_override=1e-4, self_check=False)
        traj = evolve_nls(u0, cfg)  # exactly 1000 steps
        m = traj.mass_history
        assert abs(m[-1] - m[0]) / m[0] < 1e-12

    def test_gauge_covariance(self, gaussian_data):
        g = gaussian_data.grid
        u0 = build_initial_data(gaussian_data, 0.25)
        theta = 0.7
        cfg = NLSConfig(grid=g, epsilon=0.25, sigma=2, final_time=0.05,
                        dt_override=1e-3, self_check=False)
        t1 = evolve_nls(u0, cfg).states[-1]
        t2 = evolve_nls(np.exp(1j * theta) * u0, cfg).states[-1]
        assert np.max(np.abs(t2 - np.exp(1j * theta) * t1)) < 1e-12

    def test_translation_equivariance(self, gaussian_data):
        g = gaussian_data.grid
        u0 = build_initial_data(gaussian_data, 0.25)
        cfg = NLSConfig(grid=g, epsilon=0.25, sigma=2, final_time=0.05,
                        dt_override=1e-3, self_check=False)
        t1 = evolve_nls(u0, cfg).states[-1]
        t2 = evolve_nls(np.roll(u0, 1), cfg).states[-1]
        assert np.max(np.abs(t2 - np.roll(t1, 1))) < 1e-12 * np.max(np.abs(t1))

    def test_observation_snapshots(self, gaussian_data):
        g = gaussian_data.grid
        u0 = build_initial_data(gaussian_data, 0.25)
        cfg = NLSConfig(grid=g, epsilon=0.25, sigma=2, final_time=0.1,
                        self_check=False)
        obs = np.linspace(0.0, 0.1, 6)
        seen = []
        traj = evolve_nls(u0, cfg, obs, observers=[lambda t, u: seen.append(t)])
        assert np.allclose(traj.times, obs)
        assert len(traj.states) == 6
        assert seen == list(obs)

    def test_self_check_guard_raises(self, gaussian_data):
        g = gaussian_data.grid
        u0 = build_initial_data(gaussian_data, 0.5)
        cfg = NLSConfig(grid=g, epsilon=0.5, sigma=2, final_time=0.2,
                        dt_override=0.05, self_check=True,
                        self_check_factor=1e-9)
        with pytest.raises(NumericalGuardError):
            evolve_nls(u0, cfg)

    def test_self_check_passes_at_sane_dt(self, gaussian_data):
        g = gaussian_data.grid
        u0 = build_initial_data(gaussian_data, 0.25)
        cfg = NLSConfig(grid=g, epsilon=0.25, sigma=2, final_time=0.05)
        traj = evolve_nls(u0, cfg)
        assert traj.self_check_ok
        assert traj.self_check_error < 0.05 * 0.25 * g.l2_norm(u0)

    def test_grid_mismatch(self, gaussian_data):
        cfg = NLSConfig(grid=gaussian_data.grid, epsilon=0.25, sigma=2,
                        final_time=0.05, self_check=False)
        with pytest.raises(GridMismatchError):
            evolve_nls(np.zeros(17, complex), cfg)

    def test_dt_must_fit_final_time(self, grid_1d):
        with pytest.raises(ConfigError):
            NLSConfig(grid=grid_1d, epsilon=1.0, sigma=1, final_time=0.005)


class TestInvariants:
    def test_plane_wave_mass_momentum(self):
        # direct integrals: mass = |A| sqrt(L), momentum = |A|^2 k L
        g = Grid(256, 2 * np.pi)
        eps = 0.125
        data, k = make_plane_wave_data(g, 1.0, 0.5, eps)
        u0 = build_initial_data(data, eps)
        inv = nls_invariants(u0, 0.0, g, eps, 2)
        L = g.lengths[0]
        assert inv.mass == pytest.approx(np.sqrt(L), rel=1e-12)
        assert inv.momentum[0] == pytest.approx(k * L, rel=1e-12)

    def test_conservation_along_run(self, gaussian_data):
        g = gaussian_data.grid
        eps, sigma = 0.25, 2
        u0 = build_initial_data(gaussian_data, eps)
        cfg = NLSConfig(grid=g, epsilon=eps, sigma=sigma, final_time=0.2,
                        dt_override=5e-4, self_check=False)
        obs = np.linspace(0.0, 0.2, 5)
        traj = evolve_nls(u0, cfg, obs)
        invs = [nls_invariants(u, float(t), g, eps, sigma)
                for t, u in zip(traj.times, traj.states)]
        e0 = invs[0]
        for inv in invs[1:]:
            assert abs(inv.mass - e0.mass) / e0.mass < 1e-12
            assert abs(inv.energy - e0.energy) / abs(e0.energy) < 1e-6
            assert abs(inv.momentum[0] - e0.momentum[0]) < 1e-10
            assert abs(inv.weighted_mass_center[0]
                       - e0.weighted_mass_center[0]) < 1e-6 * e0.mass

    def test_pseudo_conformal_critical_case(self, gaussian_data):
        # n=1, sigma=2: the source (2 - n*sigma) vanishes, so the
        # pseudo-conformal quantity is conserved up to discretization error
        g = gaussian_data.grid
        eps, sigma = 0.5, 2
        u0 = build_initial_data(gaussian_data, eps)
        cfg = NLSConfig(grid=g, epsilon=eps, sigma=sigma, final_time=0.5,
                        dt_override=5e-4, self_check=False)
        obs = np.linspace(0.0, 0.5, 6)
        traj = evolve_nls(u0, cfg, obs)
        pcs = [nls_invariants(u, float(t), g, eps, sigma).pseudo_conformal
               for t, u in zip(traj.times, traj.states)]
        drift = max(abs(p - pcs[0]) for p in pcs) / abs(pcs[0])
        assert drift < 1e-4

    def test_pseudo_conformal_source_noncritical(self, gaussian_data):
        # n=1, sigma=1: d/dt PC = t (2 - n sigma)/(sigma+1) ||u||^{2s+2}
        # verified against a centered finite difference of PC(t)
        g = gaussian_data.grid
        eps, sigma = 0.5, 1
        u0 = build_initial_data(gaussian_data, eps)
        h = 0.01
        cfg = NLSConfig(grid=g, epsilon=eps, sigma=sigma, final_time=0.2,
                        dt_override=2.5e-4, self_check=False)
        obs = np.linspace(0.0, 0.2, 21)  # spacing h
        traj = evolve_nls(u0, cfg, obs)
        invs = [nls_invariants(u, float(t), g, eps, sigma)
                for t, u in zip(traj.times, traj.states)]
        i = 10
        t_mid = float(traj.times[i])
        dpc = (invs[i + 1].pseudo_conformal - invs[i - 1].pseudo_conformal) / (2 * h)
        u_mid = traj.states[i]
        rho_int = float(g.integral(np.abs(u_mid) ** (2 * sigma + 2)).real)
        expected = t_mid * (2 - 1 * sigma) / (sigma + 1) * rho_int
        assert dpc == pytest.approx(expected, rel=5e-3)

    def test_support_warning_flag(self, grid_1d):
        u = np.ones(grid_1d.shape, dtype=complex)  # constant: mass at boundary
        inv = nls_invariants(u, 0.0, grid_1d, 0.5, 1)
        assert not inv.support_ok

    def test_2d_smoke(self):
        g = Grid((32, 32), (16.0, 16.0))
        x, y = g.coords
        u0 = np.exp(-(x**2 + y**2)).astype(complex)
        cfg = NLSConfig(grid=g, epsilon=0.5, sigma=1, final_time=0.02,
                        dt_override=1e-3, self_check=False)
        traj = evolve_nls(u0, cfg)
        inv0 = nls_invariants(traj.states[0], 0.0, g, 0.5, 1)
        invT = nls_invariants(traj.states[-1], 0.02, g, 0.5, 1)
        assert abs(invT.mass - inv0.mass) / inv0.mass < 1e-12
        assert invT.momentum.shape == (2,)
