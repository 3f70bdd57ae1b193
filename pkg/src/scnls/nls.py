"""Strang-splitting spectral integrator for the semiclassical NLS

    i*eps*du/dt + (eps^2/2)*Lap(u) = |u|^(2*sigma) * u,
    u(0) = (a0 + eps*a1) * exp(i*phi0/eps),

on the periodic cell.  One step of size dt is

    kinetic half step   u_hat <- exp(-i*eps*|xi|^2*dt/4) * u_hat
    nonlinear full step u     <- u * exp(-i*|u|^(2*sigma)*dt/eps)
    kinetic half step

Both substeps preserve |u_hat| resp. |u| pointwise, so the L2 mass is
conserved to roundoff; the nonlinear step is exact because |u| is invariant
under it.  The semiclassical splitting error scales like dt^2/eps, hence the
default step dt = dt0 * eps^(3/2) keeps the solver error o(eps) uniformly
over an epsilon ladder.  Every run can verify itself by repeating the
integration at dt/2 and comparing final states (the halving guard).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GridMismatchError, NumericalGuardError
from .grid import Grid
from .presets import InitialData, snap_wavevector


@dataclass(frozen=True)
class NLSConfig:
    grid: Grid
    epsilon: float
    sigma: int
    final_time: float
    dt0: float = 0.01
    dt_exponent: float = 1.5
    dt_override: float | None = None
    self_check: bool = True
    self_check_factor: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ConfigError("physics.epsilon", f"epsilon must be in (0, 1], got {self.epsilon}")
        if self.sigma < 1:
            raise ConfigError("physics.sigma", f"sigma must be >= 1, got {self.sigma}")
        if self.final_time <= 0:
            raise ConfigError("time.T", "final_time must be positive")
        if self.dt_raw >= self.final_time:
            raise ConfigError("time.dt0", "time step must be smaller than final_time")

    @property
    def dt_raw(self) -> float:
        if self.dt_override is not None:
            return self.dt_override
        return self.dt0 * self.epsilon**self.dt_exponent


@dataclass
class NLSTrajectory:
    grid: Grid
    epsilon: float
    sigma: int
    times: np.ndarray
    states: list[np.ndarray]
    dt: float
    self_check_error: float | None = None
    self_check_ok: bool = True
    mass_history: np.ndarray | None = None

    def state_at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"time {t} not in trajectory")
        return self.states[i]


def build_initial_data(data: InitialData, epsilon: float,
                       epsilon_ref: float | None = None) -> np.ndarray:
    """Wavefunction (a0 + eps*a1) * exp(i*phi0/eps).

    The linear phase part k.x is snapped so that k/eps sits on the spectral
    lattice (plane-wave presets stay grid-periodic).  When the data is shared
    across an epsilon ladder, pass epsilon_ref = max of the ladder so one snap
    serves every member; eps_ref/eps must then be an integer ratio.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ConfigError("physics.epsilon", f"epsilon must be in (0, 1], got {epsilon}")
    grid = data.grid
    amp = data.a0 + epsilon * data.a1
    phase = data.phi0_periodic / epsilon
    if any(k != 0.0 for k in data.phi0_wavevector):
        eref = epsilon if epsilon_ref is None else epsilon_ref
        _, modes = snap_wavevector(data.phi0_wavevector, grid, eref)
        ratio = eref / epsilon
        int_ratio = round(ratio)
        if abs(ratio - int_ratio) > 1e-12:
            raise ConfigError(
                "physics.epsilon_list",
                "epsilon_ref/epsilon must be integer for shared plane-wave phases",
            )
        for j, m in enumerate(modes):
            phase = phase + (2.0 * np.pi * m * int_ratio / grid.lengths[j]) * grid.coords[j]
    return amp * np.exp(1j * phase)


def _split_obs_interval(delta: float, dt_raw: float) -> int:
    return max(1, int(np.ceil(delta / dt_raw - 1e-12)))


def _evolve_raw(u0: np.ndarray, cfg: NLSConfig, obs_times: np.ndarray,
                observers=()) -> tuple[list[np.ndarray], float]:
    grid = cfg.grid
    eps, sigma = cfg.epsilon, cfg.sigma
    deltas = np.diff(obs_times)
    m = _split_obs_interval(float(deltas[0]), cfg.dt_raw)
    dt = float(deltas[0]) / m
    k2 = grid.k_squared
    half_kick = np.exp(-1j * eps * k2 * dt / 4.0)
    full_kick = half_kick * half_kick

    def freeze(arr: np.ndarray) -> np.ndarray:
        # snapshots are shared read-only (observers, concurrent sweep rows)
        arr.setflags(write=False)
        return arr

    u = np.array(u0, dtype=complex)
    states = [freeze(u.copy())]
    for cb in observers:
        cb(float(obs_times[0]), states[0])
    for delta in deltas:
        if abs(delta - deltas[0]) > 1e-12 * max(1.0, abs(delta)):
            raise ConfigError("time.observation_count", "observation times must be uniform")
        uh = np.fft.fftn(u) * half_kick
        for step in range(m):
            u = np.fft.ifftn(uh)
            u = u * np.exp((-1j * dt / eps) * np.abs(u) ** (2 * sigma))
            uh = np.fft.fftn(u) * (full_kick if step < m - 1 else half_kick)
        u = np.fft.ifftn(uh)
        if not np.all(np.isfinite(u.view(float))):
            raise NumericalGuardError(
                f"non-finite wavefunction at t={obs_times[len(states)]:.6g}; reduce dt0"
            )
        states.append(freeze(u.copy()))
        for cb in observers:
            cb(float(obs_times[len(states) - 1]), states[-1])
    return states, dt


def evolve_nls(u0: np.ndarray, cfg: NLSConfig, obs_times=None,
               observers=()) -> NLSTrajectory:
    """Integrate to final_time, returning snapshots at the observation times.

    obs_times must be uniformly spaced, starting at 0 and ending at
    final_time (default: 0 and final_time only).  The actual step divides the
    observation interval, rounded down from dt0*eps^dt_exponent.  With
    self_check enabled the run is repeated at dt/2 and aborts if the final
    states differ by more than self_check_factor*eps*||u|| in L2.
    """
    grid = cfg.grid
    u0 = np.asarray(u0)
    if u0.shape != grid.shape:
        raise GridMismatchError(f"u0 shape {u0.shape} != grid shape {grid.shape}")
    if obs_times is None:
        obs_times = np.array([0.0, cfg.final_time])
    obs_times = np.asarray(obs_times, dtype=float)
    if obs_times[0] != 0.0 or abs(obs_times[-1] - cfg.final_time) > 1e-12:
        raise ConfigError("time.T", "observation times must span [0, final_time]")

    states, dt = _evolve_raw(u0, cfg, obs_times, observers)
    traj = NLSTrajectory(
        grid=grid, epsilon=cfg.epsilon, sigma=cfg.sigma,
        times=obs_times.copy(), states=states, dt=dt,
        mass_history=np.array([grid.l2_norm(s) for s in states]),
    )
    if cfg.self_check:
        fine_cfg = NLSConfig(
            grid=grid, epsilon=cfg.epsilon, sigma=cfg.sigma,
            final_time=cfg.final_time, dt0=cfg.dt0,
            dt_exponent=cfg.dt_exponent,
            dt_override=dt / 2.0, self_check=False,
        )
        fine_states, _ = _evolve_raw(u0, fine_cfg, obs_times)
        err = grid.l2_norm(states[-1] - fine_states[-1])
        tol = cfg.self_check_factor * cfg.epsilon * max(grid.l2_norm(u0), 1e-300)
        traj.self_check_error = err
        traj.self_check_ok = err <= tol
        if not traj.self_check_ok:
            raise NumericalGuardError(
                f"dt-halving self-check failed: |u_dt - u_dt/2| = {err:.3e} "
                f"> {tol:.3e}; reduce dt0 (eps={cfg.epsilon}, dt={dt:.3e})",
                value=err,
            )
    return traj


@dataclass(frozen=True)
class NLSInvariants:
    """Conserved/evolving functionals of one snapshot; x-weighted entries are
    meaningful only when boundary_tail is small (support inside the cell)."""

    time: float
    mass: float
    energy: float
    momentum: np.ndarray
    pseudo_conformal: float
    weighted_mass_center: np.ndarray
    boundary_tail: float
    support_ok: bool = field(default=True)


def nls_invariants(u: np.ndarray, t: float, grid: Grid, epsilon: float,
                   sigma: int, tail_threshold: float = 1e-10) -> NLSInvariants:
    """Mass, energy, momentum, pseudo-conformal quantity, weighted center.

    energy = (1/2)||eps*grad u||_L2^2 + ||u||_{L^{2s+2}}^{2s+2}/(s+1);
    momentum_j = Im int conj(u) * eps * d_j u;
    pseudo_conformal = (1/2)||(x + i*eps*t*grad)u||^2 + t^2/(s+1)*||u||^{2s+2};
    weighted_mass_center_j = int x_j*|u|^2 - t*momentum_j  (conserved).
    """
    gu = grid.gradient(u)
    rho = np.abs(u) ** 2
    mass = grid.l2_norm(u)
    p_pot = float(grid.integral(rho ** (sigma + 1)).real)
    energy = 0.5 * epsilon**2 * float(sum(grid.integral(np.abs(gu[j]) ** 2).real
                                          for j in range(grid.dim))) \
        + p_pot / (sigma + 1)
    momentum = np.array([
        epsilon * float(grid.integral(np.imag(np.conj(u) * gu[j])))
        for j in range(grid.dim)
    ])
    x = grid.coords
    j_op = [x[j] * u + 1j * epsilon * t * gu[j] for j in range(grid.dim)]
    pc = 0.5 * float(sum(grid.integral(np.abs(jj) ** 2).real for jj in j_op)) \
        + t**2 / (sigma + 1) * p_pot
    center = np.array([float(grid.integral(x[j] * rho).real) for j in range(grid.dim)]) \
        - t * momentum
    tail = grid.boundary_tail_fraction(u)
    return NLSInvariants(
        time=t, mass=mass, energy=energy, momentum=momentum,
        pseudo_conformal=pc, weighted_mass_center=center,
        boundary_tail=tail, support_ok=tail < tail_threshold,
    )
