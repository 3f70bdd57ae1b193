"""First-order corrector pair (phi1, w) riding on a limit trajectory.

The next-order phase phi1 and amplitude w solve the linear system

    d_t phi1 + v . grad phi1 + 2*sigma*Re(conj(a) w) |a|^(2*sigma-2) = 0,
    d_t w    + v . grad w + grad phi1 . grad a
             + (1/2) w div v + (1/2) a Lap phi1 = (i/2) Lap a,
    phi1(0) = 0,   w(0) = a1,

with coefficients (v, a) read off the limit flow.  The corrected amplitude is
a_tilde = a * exp(i*phi1); |a_tilde| = |a| pointwise, and phi1 stays
identically zero when a0 is real-valued and a1 purely imaginary (the system
is then homogeneous in (phi1, Re(conj(a) w))).

Integration is classical RK4 with spectral derivatives and 2/3 dealiasing,
run directly on (phi1, w); the corrector step is twice the limit step so
that RK4 stage times land exactly on stored limit nodes (this preserves
fourth-order self-convergence).  Coefficient derivatives (div v, grad a,
Lap a) are cached per node.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalGuardError
from .grid import Grid
from .limit import LimitState, LimitTrajectory


@dataclass(frozen=True)
class CorrectorState:
    grid: Grid
    time: float
    phi1: np.ndarray      # real
    w: np.ndarray         # complex first-order amplitude


@dataclass
class CorrectorTrajectory:
    grid: Grid
    sigma: int
    times: np.ndarray
    phi1: np.ndarray      # (nt, *shape) real
    w: np.ndarray         # (nt, *shape) complex
    dt: float

    def index_at(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"time {t} is not a stored corrector node")
        return i

    def state(self, i: int) -> CorrectorState:
        return CorrectorState(grid=self.grid, time=float(self.times[i]),
                              phi1=self.phi1[i], w=self.w[i])

    def state_at(self, t: float) -> CorrectorState:
        return self.state(self.index_at(t))


@dataclass(frozen=True)
class CorrectedAmplitude:
    grid: Grid
    time: float
    a_tilde: np.ndarray


class _CoefficientCache:
    """Spectral coefficient fields of the limit flow, computed once per node."""

    def __init__(self, traj: LimitTrajectory):
        self.traj = traj
        self.grid = traj.grid
        self._div_v: dict[int, np.ndarray] = {}
        self._grad_a: dict[int, np.ndarray] = {}
        self._lap_a: dict[int, np.ndarray] = {}

    def at(self, i: int):
        g = self.grid
        if i not in self._div_v:
            self._div_v[i] = g.divergence(self.traj.v[i]).real
            self._grad_a[i] = g.gradient(self.traj.a[i])
            self._lap_a[i] = g.laplacian(self.traj.a[i])
        return (self.traj.v[i], self._div_v[i], self.traj.a[i],
                self._grad_a[i], self._lap_a[i])


def _rhs(phi1, w, coeffs, grid: Grid, sigma: int, mask):
    v, div_v, a, grad_a, lap_a = coeffs
    grad_phi1 = grid.gradient(phi1)
    lap_phi1 = grid.laplacian(phi1).real
    abs_pow = np.abs(a) ** (2 * sigma - 2)
    adv_phi1 = sum(v[j] * grad_phi1[j].real for j in range(grid.dim))
    dphi1 = -(adv_phi1 + 2.0 * sigma * np.real(np.conj(a) * w) * abs_pow)
    grad_w = grid.gradient(w)
    adv_w = sum(v[j] * grad_w[j] for j in range(grid.dim))
    cross = sum(grad_phi1[j].real * grad_a[j] for j in range(grid.dim))
    dw = -(adv_w + cross + 0.5 * w * div_v + 0.5 * a * lap_phi1) + 0.5j * lap_a
    dphi1 = np.fft.ifftn(mask * np.fft.fftn(dphi1)).real
    dw = np.fft.ifftn(mask * np.fft.fftn(dw))
    return dphi1, dw


def evolve_corrector(limit_traj: LimitTrajectory, a1: np.ndarray,
                     dt: float | None = None) -> CorrectorTrajectory:
    """Integrate the corrector pair over the limit trajectory's window.

    The limit trajectory must be stored at a uniform step h; the corrector
    step defaults to 2h and must be an even multiple of h so that RK4 stages
    hit stored nodes.  Other steps fall back to linear interpolation of the
    coefficients between nodes (second-order accurate; a warning is issued).
    """
    grid = limit_traj.grid
    sigma = limit_traj.sigma
    a1 = np.asarray(a1, dtype=complex)
    if a1.shape != grid.shape:
        raise ConfigError("initial.a1", "a1 shape does not match grid")
    times = limit_traj.times
    if times.size < 3:
        raise ConfigError("time.T", "limit trajectory too short for the corrector")
    h = float(times[1] - times[0])
    if not np.allclose(np.diff(times), h, rtol=0, atol=1e-9 * max(h, 1.0)):
        raise ConfigError("time.T", "limit trajectory nodes must be uniform")

    if dt is None:
        stride = 1
    else:
        ratio = dt / (2.0 * h)
        stride = int(round(ratio))
        if stride < 1 or abs(ratio - stride) > 1e-9:
            warnings.warn(
                "corrector step is not an even multiple of the limit step; "
                "falling back to linearly interpolated coefficients "
                "(second-order accurate)", stacklevel=2)
            return _evolve_interpolated(limit_traj, a1, float(dt))
    n_nodes = times.size
    n_steps = (n_nodes - 1) // (2 * stride)
    if n_steps < 1:
        raise ConfigError("time.T", "corrector step exceeds the window")
    dtc = 2.0 * stride * h
    mask = grid.dealias_mask
    cache = _CoefficientCache(limit_traj)

    phi1 = np.zeros(grid.shape)
    w = a1.copy()
    out_t = [float(times[0])]
    out_phi1 = [phi1.copy()]
    out_w = [w.copy()]
    for n in range(n_steps):
        i0 = 2 * stride * n
        c0 = cache.at(i0)
        ch = cache.at(i0 + stride)
        c1 = cache.at(i0 + 2 * stride)
        k1 = _rhs(phi1, w, c0, grid, sigma, mask)
        k2 = _rhs(phi1 + 0.5 * dtc * k1[0], w + 0.5 * dtc * k1[1], ch, grid, sigma, mask)
        k3 = _rhs(phi1 + 0.5 * dtc * k2[0], w + 0.5 * dtc * k2[1], ch, grid, sigma, mask)
        k4 = _rhs(phi1 + dtc * k3[0], w + dtc * k3[1], c1, grid, sigma, mask)
        phi1 = phi1 + dtc / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        w = w + dtc / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if not (np.all(np.isfinite(phi1)) and np.all(np.isfinite(w.view(float)))):
            raise NumericalGuardError(
                f"corrector became non-finite at t={times[i0 + 2 * stride]:.6g}")
        out_t.append(float(times[i0 + 2 * stride]))
        out_phi1.append(phi1.copy())
        out_w.append(w.copy())

    return CorrectorTrajectory(
        grid=grid, sigma=sigma, times=np.asarray(out_t),
        phi1=np.asarray(out_phi1), w=np.asarray(out_w), dt=dtc,
    )


def _evolve_interpolated(limit_traj: LimitTrajectory, a1: np.ndarray,
                         dt: float) -> CorrectorTrajectory:
    grid = limit_traj.grid
    sigma = limit_traj.sigma
    times = limit_traj.times
    t_end = float(times[-1])
    n_steps = max(1, int(round(t_end / dt)))
    dtc = t_end / n_steps
    mask = grid.dealias_mask

    def coeffs_at(t: float):
        t = min(max(t, float(times[0])), t_end)
        i = int(np.searchsorted(times, t, side="right")) - 1
        i = min(max(i, 0), times.size - 2)
        lam = (t - times[i]) / (times[i + 1] - times[i])
        v = (1 - lam) * limit_traj.v[i] + lam * limit_traj.v[i + 1]
        a = (1 - lam) * limit_traj.a[i] + lam * limit_traj.a[i + 1]
        return (v, grid.divergence(v).real, a, grid.gradient(a), grid.laplacian(a))

    phi1 = np.zeros(grid.shape)
    w = np.asarray(a1, dtype=complex).copy()
    out_t = [0.0]
    out_phi1 = [phi1.copy()]
    out_w = [w.copy()]
    t = 0.0
    for _ in range(n_steps):
        c0 = coeffs_at(t)
        ch = coeffs_at(t + 0.5 * dtc)
        c1 = coeffs_at(t + dtc)
        k1 = _rhs(phi1, w, c0, grid, sigma, mask)
        k2 = _rhs(phi1 + 0.5 * dtc * k1[0], w + 0.5 * dtc * k1[1], ch, grid, sigma, mask)
        k3 = _rhs(phi1 + 0.5 * dtc * k2[0], w + 0.5 * dtc * k2[1], ch, grid, sigma, mask)
        k4 = _rhs(phi1 + dtc * k3[0], w + dtc * k3[1], c1, grid, sigma, mask)
        phi1 = phi1 + dtc / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        w = w + dtc / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t += dtc
        out_t.append(t)
        out_phi1.append(phi1.copy())
        out_w.append(w.copy())
    return CorrectorTrajectory(
        grid=grid, sigma=sigma, times=np.asarray(out_t),
        phi1=np.asarray(out_phi1), w=np.asarray(out_w), dt=dtc,
    )


def tilde_amplitude(limit_state: LimitState,
                    corrector_state: CorrectorState) -> CorrectedAmplitude:
    """Corrected amplitude a*exp(i*phi1); the factor is unimodular so
    |a_tilde| = |a| pointwise."""
    if abs(limit_state.time - corrector_state.time) > 1e-9 * max(1.0, abs(limit_state.time)):
        raise ValueError(
            f"time mismatch: limit at t={limit_state.time}, "
            f"corrector at t={corrector_state.time}")
    return CorrectedAmplitude(
        grid=limit_state.grid, time=limit_state.time,
        a_tilde=limit_state.a * np.exp(1j * corrector_state.phi1),
    )
