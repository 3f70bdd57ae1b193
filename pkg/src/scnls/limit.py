"""Hydrodynamic limit system solved through vacuum-safe unknowns.

The eikonal/transport pair for (phi, a),

    d_t phi + |grad phi|^2/2 + s*|a|^(2*sigma) = 0,
    d_t a   + grad phi . grad a + (1/2) a Lap phi = 0,

is integrated as a first-order system in the unknowns v = grad phi and
S = a^sigma, together with the linear transport of a itself:

    d_t v + (v.grad) v + s * grad(|S|^2) = 0,
    d_t S + v.grad S + (sigma/2) S div v  = 0,
    d_t a + v.grad a + (1/2)  a  div v    = 0.

The (v, S) form stays hyperbolic with a constant symmetrizer through vacuum
(zeros of a), which is what makes sigma >= 2 tractable; S and a^sigma obey
the same linear equation so S = a^sigma propagates.  s = +1 is the defocusing
(well-posed) sign; s = -1 gives the ill-posed elliptic analogue used by the
frequency-growth demo.

The phase is recovered by time quadrature,

    phi(t) = phi0 - int_0^t ( |v|^2/2 + s*|S|^2 ) dtau,

so that d_t(grad phi - v) = 0.  Spatial derivatives are spectral; quadratic
and cubic products are 2/3-dealiased; time stepping is classical RK4, with an
optional per-step CFL-adapted step for breakdown hunting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError, NumericalGuardError
from .grid import Grid
from .presets import InitialData

CFL_NUMBER = 0.5


# ---------------------------------------------------------------------------
# state containers


@dataclass(frozen=True)
class LimitState:
    """One snapshot of the limit flow."""

    grid: Grid
    time: float
    v: np.ndarray           # (dim, *shape), real
    S: np.ndarray           # a^sigma, complex
    a: np.ndarray           # complex
    phi_periodic: np.ndarray
    phi_wavevector: tuple[float, ...]

    @property
    def rho(self) -> np.ndarray:
        return np.abs(self.a) ** 2

    def phi_total(self) -> np.ndarray:
        """Phase samples including the linear (non-periodic) part."""
        out = np.array(self.phi_periodic, dtype=float)
        for j, kj in enumerate(self.phi_wavevector):
            if kj != 0.0:
                out = out + kj * self.grid.coords[j]
        return out


@dataclass
class LimitTrajectory:
    grid: Grid
    sigma: int
    pressure_sign: int
    times: np.ndarray                 # times of stored field snapshots
    v: np.ndarray                     # (nt, dim, *shape)
    S: np.ndarray                     # (nt, *shape)
    a: np.ndarray                     # (nt, *shape)
    phi0_periodic: np.ndarray
    phi0_wavevector: tuple[float, ...]
    dt: float | None                  # uniform step, None if adapted
    status: str                       # completed|cfl|nonfinite|dt_floor|grad_stop
    step_times: np.ndarray            # every accepted step
    grad_v_max: np.ndarray            # max |d_i v_j| per step
    div_v_max: np.ndarray             # max |div v| per step
    total_pressure: np.ndarray        # int rho^(sigma+1) per step
    cfl_numbers: np.ndarray

    @cached_property
    def phi_periodic(self) -> np.ndarray:
        return reconstruct_phase(self)

    def index_at(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"time {t} is not a stored node")
        return i

    def state(self, i: int) -> LimitState:
        return LimitState(
            grid=self.grid, time=float(self.times[i]), v=self.v[i],
            S=self.S[i], a=self.a[i],
            phi_periodic=self.phi_periodic[i],
            phi_wavevector=self.phi0_wavevector,
        )

    def state_at(self, t: float) -> LimitState:
        return self.state(self.index_at(t))


# ---------------------------------------------------------------------------
# right-hand side


def _mask_c(fld: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(mask * np.fft.fftn(fld))


def _rhs(v, S, a, grid: Grid, sigma: int, psign: int, mask: np.ndarray):
    dim = grid.dim
    grad_v = [grid.gradient(v[i]).real for i in range(dim)]  # grad_v[i][j] = d_j v_i
    div_v = sum(grad_v[i][i] for i in range(dim))
    grad_S = grid.gradient(S)
    grad_a = grid.gradient(a)
    grad_p = grid.gradient(np.abs(S) ** 2).real

    dv = np.empty_like(v)
    for i in range(dim):
        adv = sum(v[j] * grad_v[i][j] for j in range(dim))
        dv[i] = _mask_c(-(adv + psign * grad_p[i]), mask).real
    adv_S = sum(v[j] * grad_S[j] for j in range(dim))
    dS = _mask_c(-(adv_S + 0.5 * sigma * S * div_v), mask)
    adv_a = sum(v[j] * grad_a[j] for j in range(dim))
    da = _mask_c(-(adv_a + 0.5 * a * div_v), mask)
    return dv, dS, da


def _wave_speed(v, S, sigma: int) -> float:
    # pressure scale p(rho) = rho^(sigma+1): dP/drho = (sigma+1) rho^sigma
    return float(np.max(np.abs(v))) + math.sqrt(
        (sigma + 1) * float(np.max(np.abs(S) ** 2))
    )


def _v_scalars(v, grid: Grid) -> tuple[float, float]:
    """(max |d_j v_i|, max |div v|) via spectral derivatives."""
    grad_v = [grid.gradient(v[i]).real for i in range(grid.dim)]
    div_v = sum(grad_v[i][i] for i in range(grid.dim))
    gmax = max(float(np.max(np.abs(g))) for g in grad_v)
    return gmax, float(np.max(np.abs(div_v)))


def characteristic_gradient_scale(grid: Grid, v: np.ndarray, S: np.ndarray,
                                  sigma: int) -> float:
    """max |grad v| + sqrt(sigma+1)*max |grad |S||: the slope scale of the
    characteristic speeds v +- sqrt((sigma+1) rho^sigma) of the data.  Used
    as the breakdown-detector baseline; data at rest (v = 0) still carries a
    meaningful scale through the sound-speed gradient."""
    gv, _ = _v_scalars(v, grid)
    grad_c = grid.gradient(np.abs(S))
    gc = max(float(np.max(np.abs(grad_c[j].real))) for j in range(grid.dim))
    return gv + math.sqrt(sigma + 1) * gc


# ---------------------------------------------------------------------------
# integrator


def evolve_limit(
    init: InitialData,
    sigma: int,
    final_time: float,
    dt: float | None = None,
    n_obs: int | None = None,
    pressure_sign: int = 1,
    adaptive: bool = False,
    strict: bool = True,
    store_every: int = 1,
    spectral_cutoff: int | None = None,
    dt_safety: float = 0.1,
    dt_floor_factor: float = 1e-6,
    grad_stop: float | None = None,
    max_steps: int = 2_000_000,
) -> LimitTrajectory:
    """Integrate the limit system up to final_time (or until breakdown).

    With dt=None the step is set from the initial CFL estimate
    dt <= CFL*dx/(max|v| + sqrt((sigma+1)*max rho^sigma)), shrunk by
    dt_safety: RK4 is stable at the CFL bound but the trapezoidal phase
    quadrature is only second order, and the phase-consistency contract
    ||grad phi - v|| < 1e-6 needs the extra headroom.  When n_obs is given
    the step is rounded so each of the n_obs-1 uniform observation intervals
    holds an even number of steps (corrector integration consumes half-step
    nodes).  adaptive=True re-derives dt from the pure CFL rule every step
    and is meant for breakdown hunting; the trajectory then truncates instead
    of raising when dt collapses or fields stop being finite (strict=False).
    """
    if sigma < 1:
        raise ConfigError("physics.sigma", f"sigma must be >= 1, got {sigma}")
    grid = init.grid
    mask = grid.dealias_mask
    if spectral_cutoff is not None:
        mask = mask & grid.mode_mask(spectral_cutoff)

    v0 = np.stack([grid.spectral_derivative(init.phi0_periodic, j).real
                   for j in range(grid.dim)])
    for j, kj in enumerate(init.phi0_wavevector):
        v0[j] += kj
    a0 = np.asarray(init.a0, dtype=complex)
    S0 = a0**sigma
    v = np.stack([_mask_c(v0[j], mask).real for j in range(grid.dim)])
    S = _mask_c(S0, mask)
    a = _mask_c(a0, mask)

    dx_min = min(grid.dx)
    speed0 = _wave_speed(v, S, sigma)
    dt_cfl0 = CFL_NUMBER * dx_min / max(speed0, 1e-12)
    if dt is None:
        # the absolute ceiling keeps the O(dt^2) phase quadrature within its
        # 1e-6 consistency budget for unit-scale data on coarse grids, where
        # the CFL bound alone would allow much larger steps
        dt_target = dt_cfl0 if adaptive else min(dt_safety * dt_cfl0, 8e-4)
        if n_obs is not None and n_obs >= 2:
            delta = final_time / (n_obs - 1)
            m = max(1, math.ceil(delta / (2.0 * dt_target)))
            dt = delta / (2 * m)
        else:
            n_steps = 2 * max(1, math.ceil(final_time / (2.0 * dt_target)))
            dt = final_time / n_steps
    dt = float(dt)
    dt_floor = dt * dt_floor_factor

    times = [0.0]
    vs, Ss, As = [v.copy()], [S.copy()], [a.copy()]
    step_times = [0.0]
    grad_hist, div_hist, press_hist, cfl_hist = [], [], [], []

    def record_scalars(v_now, a_now, step_dt, speed):
        gmax, dmax = _v_scalars(v_now, grid)
        grad_hist.append(gmax)
        div_hist.append(dmax)
        rho = np.abs(a_now) ** 2
        press_hist.append(float(grid.integral(rho ** (sigma + 1)).real))
        cfl_hist.append(step_dt * speed / dx_min)

    record_scalars(v, a, dt, speed0)

    status = "completed"
    t = 0.0
    n = 0
    while t < final_time - 1e-12 and n < max_steps:
        speed = _wave_speed(v, S, sigma)
        if adaptive:
            step_dt = min(CFL_NUMBER * dx_min / max(speed, 1e-12), dt,
                          final_time - t)
            if step_dt < dt_floor:
                status = "dt_floor"
                break
        else:
            step_dt = min(dt, final_time - t)
            if step_dt * speed / dx_min > 2.0 * CFL_NUMBER:
                status = "cfl"
                break

        k1 = _rhs(v, S, a, grid, sigma, pressure_sign, mask)
        h = 0.5 * step_dt
        k2 = _rhs(v + h * k1[0], S + h * k1[1], a + h * k1[2],
                  grid, sigma, pressure_sign, mask)
        k3 = _rhs(v + h * k2[0], S + h * k2[1], a + h * k2[2],
                  grid, sigma, pressure_sign, mask)
        k4 = _rhs(v + step_dt * k3[0], S + step_dt * k3[1], a + step_dt * k3[2],
                  grid, sigma, pressure_sign, mask)
        w = step_dt / 6.0
        v = v + w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        S = S + w * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        a = a + w * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        t += step_dt
        n += 1

        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(S.view(float)))
                and np.all(np.isfinite(a.view(float)))):
            status = "nonfinite"
            break

        step_times.append(t)
        record_scalars(v, a, step_dt, speed)
        if n % store_every == 0 or t >= final_time - 1e-12:
            times.append(t)
            vs.append(v.copy())
            Ss.append(S.copy())
            As.append(a.copy())
        if grad_stop is not None and grad_hist[-1] > grad_stop:
            status = "grad_stop"
            break

    if status != "completed" and strict:
        raise NumericalGuardError(
            f"limit solver stopped at t={t:.6g} with status {status!r}"
        )

    def pack(seq) -> np.ndarray:
        out = np.asarray(seq)
        out.setflags(write=False)  # trajectories are shared read-only
        return out

    return LimitTrajectory(
        grid=grid, sigma=sigma, pressure_sign=pressure_sign,
        times=pack(times), v=pack(vs), S=pack(Ss), a=pack(As),
        phi0_periodic=np.asarray(init.phi0_periodic, dtype=float),
        phi0_wavevector=tuple(init.phi0_wavevector),
        dt=None if adaptive else dt, status=status,
        step_times=pack(step_times),
        grad_v_max=pack(grad_hist),
        div_v_max=pack(div_hist),
        total_pressure=pack(press_hist),
        cfl_numbers=pack(cfl_hist),
    )


def power_consistency(traj: LimitTrajectory, banded: bool = True) -> float:
    """max over stored nodes of ||S - a^sigma||_inf.

    With banded=True the pointwise power a^sigma is projected onto the 2/3
    band first: the evolved S lives there by construction, while a^sigma
    grows out-of-band tails as the solution steepens, so the raw comparison
    measures spectral truncation rather than transport consistency.
    """
    grid = traj.grid
    worst = 0.0
    for i in range(traj.times.size):
        power = traj.a[i] ** traj.sigma
        if banded:
            power = grid.dealias(power)
        worst = max(worst, float(np.max(np.abs(traj.S[i] - power))))
    return worst


def reconstruct_phase(traj: LimitTrajectory) -> np.ndarray:
    """Periodic phase parts on the stored nodes by trapezoidal quadrature of
    |v|^2/2 + s*|S|^2; the linear part of phi0 is carried separately and is
    constant in time.  The quadratic integrand is 2/3-dealiased like every
    other product in the solver.  Consistency check: grad phi(t) = v(t)."""
    grid = traj.grid
    nt = traj.times.size
    phi = np.empty((nt, *grid.shape))
    phi[0] = traj.phi0_periodic

    def integrand(i):
        f = 0.5 * np.sum(traj.v[i] ** 2, axis=0) \
            + traj.pressure_sign * np.abs(traj.S[i]) ** 2
        return grid.dealias(f).real

    f_prev = integrand(0)
    for i in range(1, nt):
        f_next = integrand(i)
        h = traj.times[i] - traj.times[i - 1]
        phi[i] = phi[i - 1] - 0.5 * h * (f_prev + f_next)
        f_prev = f_next
    return phi


# ---------------------------------------------------------------------------
# conserved functionals


@dataclass(frozen=True)
class EulerInvariants:
    time: float
    mass: float
    energy: float
    momentum: np.ndarray
    pseudo_conformal: float
    center_of_mass: np.ndarray
    total_pressure: float
    boundary_tail: float
    support_ok: bool = field(default=True)


def euler_invariants(state: LimitState, sigma: int,
                     tail_threshold: float = 1e-10) -> EulerInvariants:
    """Mass, energy, momentum, pseudo-conformal quantity, mass center,
    total pressure of a limit snapshot (defocusing sign conventions)."""
    grid = state.grid
    rho = state.rho
    t = state.time
    v = state.v
    v2 = np.sum(v**2, axis=0)
    p_int = float(grid.integral(rho ** (sigma + 1)).real)
    mass = float(grid.integral(rho).real)
    energy = float(grid.integral(0.5 * rho * v2).real) + p_int / (sigma + 1)
    momentum = np.array([float(grid.integral(rho * v[j]).real)
                         for j in range(grid.dim)])
    x = grid.coords
    shifted2 = sum((x[j] - t * v[j]) ** 2 for j in range(grid.dim))
    pc = 0.5 * float(grid.integral(shifted2 * rho).real) + t**2 / (sigma + 1) * p_int
    center = np.array([float(grid.integral((x[j] - t * v[j]) * rho).real)
                       for j in range(grid.dim)])
    tail = grid.boundary_tail_fraction(state.a)
    return EulerInvariants(
        time=t, mass=mass, energy=energy, momentum=momentum,
        pseudo_conformal=pc, center_of_mass=center, total_pressure=p_int,
        boundary_tail=tail, support_ok=tail < tail_threshold,
    )


# ---------------------------------------------------------------------------
# breakdown monitor


@dataclass(frozen=True)
class BlowupReport:
    breakdown_flag: bool
    t_estimate: float | None
    t_uncertainty: float
    threshold: float
    baseline: float
    status: str
    times: np.ndarray
    max_grad_v_history: np.ndarray
    pressure_history: np.ndarray
    pressure_envelope: np.ndarray
    envelope_ok: bool


def blowup_monitor(traj: LimitTrajectory, factor: float = 10.0,
                   baseline_floor: float = 1e-8) -> BlowupReport:
    """Flag gradient blow-up along a trajectory.

    Breakdown is declared when max|grad v| exceeds ``factor`` times a
    baseline built from the data's own characteristic-speed gradient scale
    (so data starting at rest is judged against its sound-speed slope, and a
    constant state never fires), or when the run itself stopped on
    non-finite values / a collapsed adaptive step.  The threshold is a
    heuristic; reported times carry a +-2*spacing uncertainty band.  The
    total-pressure history is compared (in log space, while resolved) with
    its transport envelope P(0)*exp(sigma*int max|div v|).
    """
    g = traj.grad_v_max
    ts = traj.step_times
    scale0 = characteristic_gradient_scale(
        traj.grid, traj.v[0], traj.S[0], traj.sigma)
    baseline = max(float(g[0]), scale0, baseline_floor)
    threshold = factor * baseline

    t_est = None
    crossing = np.nonzero(g > threshold)[0]
    if crossing.size:
        i = int(crossing[0])
        t_est = float(ts[i])
    elif traj.status in ("nonfinite", "dt_floor", "cfl", "grad_stop"):
        t_est = float(ts[-1])

    spacing = float(np.max(np.diff(ts))) if ts.size > 1 else 0.0

    # transport envelope for the total pressure, valid while resolved
    cum = np.concatenate([[0.0], np.cumsum(
        0.5 * (traj.div_v_max[1:] + traj.div_v_max[:-1]) * np.diff(ts))])
    log_env = math.log(max(traj.total_pressure[0], 1e-300)) + traj.sigma * cum
    envelope = np.exp(np.minimum(log_env, 700.0))
    resolved = ts <= (t_est if t_est is not None else ts[-1])
    with np.errstate(divide="ignore"):
        log_p = np.log(np.maximum(traj.total_pressure, 1e-300))
    envelope_ok = bool(np.all(log_p[resolved] <= log_env[resolved] + 1e-9))

    return BlowupReport(
        breakdown_flag=t_est is not None,
        t_estimate=t_est,
        t_uncertainty=2.0 * spacing,
        threshold=threshold,
        baseline=baseline,
        status=traj.status,
        times=ts,
        max_grad_v_history=g,
        pressure_history=traj.total_pressure,
        pressure_envelope=envelope,
        envelope_ok=envelope_ok,
    )


# ---------------------------------------------------------------------------
# frequency-growth demo (ill-posed sign)


@dataclass(frozen=True)
class GrowthRow:
    mode: int
    xi: float
    rate: float
    max_growth: float
    w0: float


def focusing_demo(
    init: InitialData,
    perturbation_wavenumbers: list[int],
    sigma: int,
    pressure_sign: int = -1,
    delta: float = 1e-7,
    window: float = 0.35,
    dt: float = 2e-3,
    spectral_cutoff: int | None = None,
    n_snap: int = 36,
) -> list[GrowthRow]:
    """Short-time growth rates of sinusoidal perturbations per wavenumber.

    The background from ``init`` (intended: constant amplitude, zero phase)
    is evolved with the given pressure sign; for each integer mode k a run
    with a0 + delta*cos(2*pi*k*x/L) is compared against it.  The perturbation
    size is the symmetrized wave energy

        W^2 = int ( sigma*rho0^(sigma-1) * drho^2 + rho0 * |dv|^2 ) dx,

    conserved by the linearized defocusing flow, exponentially growing in the
    ill-posed sign.  The rate is the log-linear slope of W over the second
    half of the window.  A spectral cutoff (default 1.5x the largest mode)
    suppresses roundoff-seeded growth above the probed band.
    """
    grid = init.grid
    ks = [int(k) for k in perturbation_wavenumbers]
    if spectral_cutoff is None and ks:
        spectral_cutoff = max(int(1.5 * max(ks)) + 2, max(ks) + 8)
    store = max(1, int(round((window / dt) / (n_snap - 1))))

    def run(a0_field) -> LimitTrajectory:
        data = InitialData(
            grid=grid, a0=a0_field, a1=np.zeros(grid.shape, dtype=complex),
            phi0_periodic=init.phi0_periodic,
            phi0_wavevector=init.phi0_wavevector, label="focusing-demo",
        )
        return evolve_limit(
            data, sigma, window, dt=dt, pressure_sign=pressure_sign,
            strict=False, store_every=store, spectral_cutoff=spectral_cutoff,
        )

    base = run(init.a0)
    rho_bg = np.abs(base.a) ** 2
    rho0 = float(np.mean(rho_bg[0]))

    rows = []
    for k in ks:
        xi = 2.0 * np.pi * k / grid.lengths[0]
        pert = delta * np.cos(xi * grid.coords[0])
        traj = run(init.a0 + pert)
        nt = min(traj.times.size, base.times.size)
        w = np.empty(nt)
        for i in range(nt):
            drho = np.abs(traj.a[i]) ** 2 - rho_bg[i]
            dv = traj.v[i] - base.v[i]
            w[i] = math.sqrt(max(
                sigma * rho0 ** (sigma - 1) * float(grid.integral(drho**2).real)
                + rho0 * float(grid.integral(np.sum(dv**2, axis=0)).real), 0.0))
        w0 = w[0]
        if w0 == 0.0 or np.all(w <= 0):
            rows.append(GrowthRow(mode=k, xi=xi, rate=0.0, max_growth=0.0, w0=0.0))
            continue
        half = nt // 2
        tt = traj.times[half:nt]
        ww = np.log(np.maximum(w[half:nt], 1e-300))
        slope = float(np.polyfit(tt, ww, 1)[0]) if tt.size >= 2 else 0.0
        rows.append(GrowthRow(
            mode=k, xi=xi, rate=slope,
            max_growth=float(np.max(w) / w0), w0=float(w0),
        ))
    return rows
