"""Modulated-amplitude diagnostics comparing a wavefunction with the limit flow.

Given a wavefunction u at scale eps and the limit pair (a, phi), the filtered
amplitude is a_eps = u * exp(-i*phi/eps) (same modulus as u, oscillations
removed).  From it:

* q_eps = B(|a_eps|^2, |a|^2)/eps and g_eps = G(...) -- the rescaled
  symmetrized density gap, with eps*q_eps*g_eps = |a_eps|^(2s) - |a|^(2s)
  pointwise;
* the transport residual of beta_eps = eps*q_eps,
      d_t beta + eps*g*div Im(conj(a_eps) grad a_eps)
               + v.grad beta + (s+1)/2 * beta * div v,
  evaluated with a central time difference over three snapshots;
* the local energy density e_eps = |a_eps|^2 + |grad a_eps|^2 + |q_eps|^2,
  whose integral obeys a Gronwall envelope with a constant measured from the
  limit solution;
* position/current density gaps with their expected small-eps rates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError
from .grid import Grid
from .limit import LimitState, LimitTrajectory
from .sigma_algebra import b_sigma, g_sigma


def modulate(u: np.ndarray, phi_total: np.ndarray, epsilon: float,
             grid: Grid) -> np.ndarray:
    """Filtered amplitude u * exp(-i*phi/eps).

    phi_total must contain the full phase samples (periodic part plus any
    linear part built from a lattice-snapped wavevector, so that the factor
    is grid-periodic).  |result| = |u| pointwise.
    """
    u = np.asarray(u)
    if u.shape != grid.shape or np.asarray(phi_total).shape != grid.shape:
        raise GridMismatchError("wavefunction/phase shape does not match grid")
    return u * np.exp(-1j * np.asarray(phi_total) / epsilon)


def q_g_fields(a_eps: np.ndarray, a: np.ndarray, epsilon: float,
               sigma: int) -> tuple[np.ndarray, np.ndarray]:
    """(q_eps, g_eps) with eps*q_eps*g_eps = |a_eps|^(2s) - |a|^(2s)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    r1 = np.abs(np.asarray(a_eps)) ** 2
    r2 = np.abs(np.asarray(a)) ** 2
    beta = b_sigma(r1, r2, sigma)
    g = g_sigma(r1, r2, sigma)
    return beta / epsilon, g


@dataclass
class DiagnosticsRecord:
    """Per-snapshot modulation diagnostics."""

    time: float
    epsilon: float
    sigma: int
    a_eps: np.ndarray                    # filtered amplitude
    psi_eps: np.ndarray                  # grad a_eps, shape (dim, *shape)
    q_eps: np.ndarray
    g_eps: np.ndarray
    beta_eps: np.ndarray
    position_density: np.ndarray         # |u|^2
    current_density: np.ndarray          # Im(eps * conj(u) grad u), (dim, ...)
    sobolev: dict = field(default_factory=dict)   # {"a_eps": {s: norm}, ...}
    modulated_energy: float = 0.0
    residual_transport: float | None = None


def diagnostics_record(u: np.ndarray, t: float, limit_state: LimitState,
                       epsilon: float, sigma: int,
                       sobolev_orders: tuple[float, ...] = ()) -> DiagnosticsRecord:
    grid = limit_state.grid
    a_eps = modulate(u, limit_state.phi_total(), epsilon, grid)
    psi = grid.gradient(a_eps)
    q, g = q_g_fields(a_eps, limit_state.a, epsilon, sigma)
    gu = grid.gradient(u)
    current = np.stack([epsilon * np.imag(np.conj(u) * gu[j])
                        for j in range(grid.dim)])
    sob: dict = {"a_eps": {}, "q_eps": {}}
    for s in sobolev_orders:
        sob["a_eps"][s] = grid.sobolev_norm(a_eps, s)
        if s >= 1:
            sob["q_eps"][s - 1] = grid.sobolev_norm(q, s - 1)
    rec = DiagnosticsRecord(
        time=t, epsilon=epsilon, sigma=sigma, a_eps=a_eps, psi_eps=psi,
        q_eps=q, g_eps=g, beta_eps=epsilon * q,
        position_density=np.abs(u) ** 2, current_density=current,
        sobolev=sob,
    )
    rec.modulated_energy = modulated_energy(rec, grid)
    return rec


def modulated_energy(record: DiagnosticsRecord, grid: Grid) -> float:
    """int (|a_eps|^2 + |grad a_eps|^2 + |q_eps|^2); nonnegative."""
    total = grid.l2_norm(record.a_eps) ** 2 + grid.l2_norm(record.q_eps) ** 2
    for j in range(grid.dim):
        total += grid.l2_norm(record.psi_eps[j]) ** 2
    return float(total)


def gronwall_constant(limit_traj: LimitTrajectory) -> float:
    """Envelope constant sigma*max|div v| + 2*max|grad v| + max|grad div v| + 1
    measured along the computed limit flow (the +1 absorbs lower-order terms)."""
    grid = limit_traj.grid
    sigma = limit_traj.sigma
    best = 0.0
    for i in range(limit_traj.times.size):
        v = limit_traj.v[i]
        grad_v = [grid.gradient(v[j]).real for j in range(grid.dim)]
        div_v = sum(grad_v[j][j] for j in range(grid.dim))
        grad_div = grid.gradient(div_v)
        c = (sigma * float(np.max(np.abs(div_v)))
             + 2.0 * max(float(np.max(np.abs(g))) for g in grad_v)
             + max(float(np.max(np.abs(grad_div[j].real))) for j in range(grid.dim))
             + 1.0)
        best = max(best, c)
    return best


def residual_transport(rec_prev: DiagnosticsRecord, rec_mid: DiagnosticsRecord,
                       rec_next: DiagnosticsRecord, limit_state: LimitState,
                       dt: float, grid: Grid) -> float:
    """L2 norm of the beta transport residual at the middle snapshot.

    Uses a central difference (t-dt, t, t+dt) for d_t beta; the snapshots
    must be equally spaced.  Converges at the combined central-difference +
    solver order as dt -> 0; identically zero (to roundoff) for matched
    plane-wave data where beta vanishes.
    """
    h1 = rec_mid.time - rec_prev.time
    h2 = rec_next.time - rec_mid.time
    if abs(h1 - dt) > 1e-9 * max(dt, 1.0) or abs(h2 - dt) > 1e-9 * max(dt, 1.0):
        raise ValueError("snapshots must be equally spaced by dt")
    sigma = rec_mid.sigma
    eps = rec_mid.epsilon
    dbeta_dt = (rec_next.beta_eps - rec_prev.beta_eps) / (2.0 * dt)
    flux = grid.divergence(
        np.stack([np.imag(np.conj(rec_mid.a_eps) * rec_mid.psi_eps[j])
                  for j in range(grid.dim)])
    ).real
    v = limit_state.v
    grad_beta = grid.gradient(rec_mid.beta_eps)
    adv = sum(v[j] * grad_beta[j].real for j in range(grid.dim))
    div_v = grid.divergence(v).real
    resid = (dbeta_dt + eps * rec_mid.g_eps * flux + adv
             + 0.5 * (sigma + 1) * rec_mid.beta_eps * div_v)
    return grid.l2_norm(resid)


@dataclass(frozen=True)
class DensityMetrics:
    pos_err_lsp1: float          # || |a_eps|^2 - |a|^2 ||_{L^{s+1}}
    cur_err_transport: float     # || (|a_eps|^2-|a|^2) grad phi ||_{L^{s+1}}
    cur_err_l1: float            # || Im(eps conj(a_eps) grad a_eps) ||_{L^1}


def density_metrics(record: DiagnosticsRecord, limit_state: LimitState,
                    sigma: int, epsilon: float) -> DensityMetrics:
    """Position/current density gaps in the norms where they converge."""
    grid = limit_state.grid
    gap = np.abs(record.a_eps) ** 2 - np.abs(limit_state.a) ** 2
    p = sigma + 1
    pos = grid.lebesgue_norm(gap, p)
    v_mag = np.sqrt(np.sum(limit_state.v ** 2, axis=0))
    cur_t = grid.lebesgue_norm(gap * v_mag, p)
    cur_field = np.sqrt(sum(
        np.imag(epsilon * np.conj(record.a_eps) * record.psi_eps[j]) ** 2
        for j in range(grid.dim)))
    cur_1 = grid.lebesgue_norm(cur_field, 1)
    return DensityMetrics(pos_err_lsp1=pos, cur_err_transport=cur_t, cur_err_l1=cur_1)
