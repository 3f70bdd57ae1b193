"""Epsilon-ladder sweeps: WKB error curves, uniformity tables, rate fits.

One sweep runs, for a shared limit + corrector solution and each epsilon in a
strictly decreasing ladder, a wavefunction integration with per-snapshot
modulation diagnostics, then reduces everything into a per-epsilon row table:

* one-term / two-term WKB errors  ||u - a e^{i phi/eps}||,
  ||u - a_tilde e^{i phi/eps}|| in sup-over-snapshots L2 and L^inf
  (L^6 instead of L^inf when sigma = 2 in dimension >= 2);
* uniformity norms max_t ||a_eps||_{H^k}, max_t ||q_eps||_{H^(k-1)} with
  k = 2 (sigma <= 2, 1-D), k = 1 (sigma = 2, higher dim), k = sigma otherwise;
* density-gap metrics and the modulated-energy envelope check.

Log-log least squares (fit_rate) turns error columns into convergence rates.
The pipeline is deterministic: identical plans give byte-identical CSV/JSON.
Rows may be computed concurrently (SCNLS_WORKERS); results are keyed and
sorted by epsilon so assembly order cannot matter.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .corrector import CorrectorTrajectory, evolve_corrector, tilde_amplitude
from .diagnostics import (density_metrics, diagnostics_record,
                          gronwall_constant)
from .errors import ConfigError, NumericalGuardError
from .limit import LimitTrajectory, evolve_limit
from .nls import NLSConfig, build_initial_data, evolve_nls
from .presets import InitialData, snap_wavevector


def sobolev_index(sigma: int, dim: int) -> int:
    """Order k of the uniform bound: 2 for sigma<=2 in 1-D (free choice for
    sigma=1, forced for sigma=2), 1 for sigma=2 in dim>=2, sigma otherwise."""
    if sigma >= 3:
        return sigma
    if sigma == 2 and dim >= 2:
        return 1
    return 2


def sup_exponent(sigma: int, dim: int) -> float:
    """Second error norm: L^inf, except L^6 for sigma=2 in dim>=2 where only
    L2 cap L^p control (H^1 embedding) is available."""
    return 6.0 if (sigma == 2 and dim >= 2) else math.inf


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float
    n: int

    @property
    def noisy(self) -> bool:
        return self.r2 < 0.98


def fit_rate(points) -> FitResult:
    """Least-squares fit of log(err) against log(eps).

    points: iterable of (eps, err); needs >= 3 points, all err > 0.
    """
    pts = [(float(e), float(r)) for e, r in points]
    if len(pts) < 3:
        raise ValueError(f"insufficient points for a rate fit: {len(pts)} < 3")
    if any(r <= 0 for _, r in pts):
        raise ValueError("rate fit requires strictly positive error values")
    x = np.log([e for e, _ in pts])
    y = np.log([r for _, r in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return FitResult(slope=float(slope), intercept=float(intercept),
                     r2=r2, n=len(pts))


@dataclass(frozen=True)
class SweepPlan:
    initial: InitialData
    sigma: int
    epsilon_list: tuple[float, ...]
    final_time: float
    n_obs: int = 20
    dt0: float = 0.01
    dt_exponent: float = 1.5
    self_check: bool = True
    config_echo: dict = field(default_factory=dict)

    def __post_init__(self):
        eps = self.epsilon_list
        if len(eps) < 1 or any(not 0 < e <= 1 for e in eps):
            raise ConfigError("physics.epsilon_list", "values must lie in (0, 1]")
        if any(eps[i + 1] >= eps[i] for i in range(len(eps) - 1)):
            raise ConfigError("physics.epsilon_list", "must be strictly decreasing")
        if self.n_obs < 3:
            raise ConfigError("time.observation_count", "needs at least 3 snapshots")


ROW_COLUMNS = (
    "epsilon",
    "err_two_term_l2", "err_two_term_sup",
    "err_one_term_l2", "err_one_term_sup",
    "a_eps_hk_max", "q_eps_hkm1_max",
    "pos_gap_lsp1_max", "pos_gap_pow_max",
    "cur_transport_lsp1_max", "cur_l1_max",
    "mod_energy_0", "mod_energy_max",
    "envelope_ok", "self_check_error", "self_check_ok",
)


@dataclass
class SweepResult:
    plan_echo: dict
    rows: list[dict]
    fits: dict[str, FitResult]
    gronwall_c: float
    sup_p: float
    k_order: int
    environment: dict

    def to_json(self) -> str:
        payload = {
            "plan": self.plan_echo,
            "k_order": self.k_order,
            "sup_p": "inf" if self.sup_p == math.inf else self.sup_p,
            "gronwall_constant": self.gronwall_c,
            "rows": self.rows,
            "fits": {name: vars(f) | {"noisy": f.noisy}
                     for name, f in self.fits.items()},
            "environment": self.environment,
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        payload["content_hash"] = "sha256:" + hashlib.sha256(blob.encode()).hexdigest()
        return json.dumps(payload, sort_keys=True, indent=1)

    def to_csv(self) -> str:
        lines = [
            "# epsilon-sweep result; columns: " + ",".join(ROW_COLUMNS),
            "# config: " + json.dumps(self.plan_echo, sort_keys=True,
                                      separators=(",", ":")),
        ]
        body = [",".join(ROW_COLUMNS)]
        for row in self.rows:
            body.append(",".join(_csv_cell(row[c]) for c in ROW_COLUMNS))
        text = "\n".join(body)
        digest = hashlib.sha256(text.encode()).hexdigest()
        lines.append("# content_hash: sha256:" + digest)
        return "\n".join(lines) + "\n" + text + "\n"


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _sweep_row(eps: float, plan: SweepPlan, limit_traj: LimitTrajectory,
               corr_traj: CorrectorTrajectory, obs_times: np.ndarray,
               eps_ref: float, c_hat: float, k: int, sup_p: float) -> dict:
    grid = plan.initial.grid
    sigma = plan.sigma
    u0 = build_initial_data(plan.initial, eps, epsilon_ref=eps_ref)
    cfg = NLSConfig(grid=grid, epsilon=eps, sigma=sigma,
                    final_time=plan.final_time, dt0=plan.dt0,
                    dt_exponent=plan.dt_exponent, self_check=plan.self_check)
    try:
        traj = evolve_nls(u0, cfg, obs_times)
        check_err = traj.self_check_error
        check_ok = traj.self_check_ok
    except NumericalGuardError as exc:
        # flagged row: rerun without the guard so the sweep can continue
        cfg = NLSConfig(grid=grid, epsilon=eps, sigma=sigma,
                        final_time=plan.final_time, dt0=plan.dt0,
                        dt_exponent=plan.dt_exponent, self_check=False)
        traj = evolve_nls(u0, cfg, obs_times)
        check_err = exc.value if exc.value is not None else -2.0
        check_ok = False

    err2_l2 = err2_sup = err1_l2 = err1_sup = 0.0
    a_hk = q_hk = 0.0
    pos_max = pow_max = cur_t_max = cur_1_max = 0.0
    series: dict[str, list] = {key: [] for key in (
        "time", "err_two_term_l2", "err_one_term_l2", "a_eps_hk",
        "q_eps_hkm1", "pos_gap_lsp1", "cur_l1", "mod_energy")}
    envelope_ok = True
    for t, u in zip(traj.times, traj.states):
        ls = limit_traj.state_at(float(t))
        cs = corr_traj.state_at(float(t))
        til = tilde_amplitude(ls, cs)
        rec = diagnostics_record(u, float(t), ls, eps, sigma,
                                 sobolev_orders=(float(k),))
        carrier = np.exp(1j * ls.phi_total() / eps)
        diff2 = u - til.a_tilde * carrier
        diff1 = u - ls.a * carrier
        e2, e1 = grid.l2_norm(diff2), grid.l2_norm(diff1)
        err2_l2 = max(err2_l2, e2)
        err2_sup = max(err2_sup, grid.lebesgue_norm(diff2, sup_p))
        err1_l2 = max(err1_l2, e1)
        err1_sup = max(err1_sup, grid.lebesgue_norm(diff1, sup_p))
        a_now = rec.sobolev["a_eps"][float(k)]
        q_now = rec.sobolev["q_eps"][float(k) - 1]
        a_hk = max(a_hk, a_now)
        q_hk = max(q_hk, q_now)
        dm = density_metrics(rec, ls, sigma, eps)
        pos_max = max(pos_max, dm.pos_err_lsp1)
        pow_max = max(pow_max, dm.pos_err_lsp1 ** (sigma + 1))
        cur_t_max = max(cur_t_max, dm.cur_err_transport)
        cur_1_max = max(cur_1_max, dm.cur_err_l1)
        series["time"].append(float(t))
        series["err_two_term_l2"].append(e2)
        series["err_one_term_l2"].append(e1)
        series["a_eps_hk"].append(a_now)
        series["q_eps_hkm1"].append(q_now)
        series["pos_gap_lsp1"].append(dm.pos_err_lsp1)
        series["cur_l1"].append(dm.cur_err_l1)
        series["mod_energy"].append(rec.modulated_energy)
    me_vals = series["mod_energy"]
    me0 = me_vals[0]
    for t, me in zip(traj.times, me_vals):
        if me > me0 * math.exp(c_hat * float(t)) * (1.0 + 1e-9):
            envelope_ok = False
    return {
        "epsilon": eps,
        "err_two_term_l2": err2_l2, "err_two_term_sup": err2_sup,
        "err_one_term_l2": err1_l2, "err_one_term_sup": err1_sup,
        "a_eps_hk_max": a_hk, "q_eps_hkm1_max": q_hk,
        "pos_gap_lsp1_max": pos_max, "pos_gap_pow_max": pow_max,
        "cur_transport_lsp1_max": cur_t_max, "cur_l1_max": cur_1_max,
        "mod_energy_0": me0, "mod_energy_max": max(me_vals),
        "envelope_ok": envelope_ok,
        "self_check_error": -1.0 if check_err is None else float(check_err),
        "self_check_ok": bool(check_ok),
        "series": series,  # one diagnostics row per observation time (JSON)
    }


def run_sweep(plan: SweepPlan, workers: int | None = None) -> SweepResult:
    """Execute the sweep: one shared limit/corrector run, one wavefunction run
    per epsilon, diagnostics, and rate fits."""
    grid = plan.initial.grid
    sigma = plan.sigma
    eps_ref = max(plan.epsilon_list)
    obs_times = np.linspace(0.0, plan.final_time, plan.n_obs)

    initial = plan.initial
    if any(kj != 0.0 for kj in initial.phi0_wavevector):
        snapped, _ = snap_wavevector(initial.phi0_wavevector, grid, eps_ref)
        initial = InitialData(
            grid=grid, a0=initial.a0, a1=initial.a1,
            phi0_periodic=initial.phi0_periodic,
            phi0_wavevector=snapped, label=initial.label,
        )

    limit_traj = evolve_limit(initial, sigma, plan.final_time, n_obs=plan.n_obs)
    _ = limit_traj.phi_periodic  # materialize before sharing across workers
    corr_traj = evolve_corrector(limit_traj, initial.a1)
    c_hat = gronwall_constant(limit_traj)
    k = sobolev_index(sigma, grid.dim)
    sup_p = sup_exponent(sigma, grid.dim)

    plan2 = SweepPlan(
        initial=initial, sigma=sigma, epsilon_list=plan.epsilon_list,
        final_time=plan.final_time, n_obs=plan.n_obs, dt0=plan.dt0,
        dt_exponent=plan.dt_exponent, self_check=plan.self_check,
        config_echo=plan.config_echo,
    )

    if workers is None:
        workers = int(os.environ.get("SCNLS_WORKERS", "1"))
    args = [(eps, plan2, limit_traj, corr_traj, obs_times, eps_ref, c_hat, k, sup_p)
            for eps in plan.epsilon_list]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda a: _sweep_row(*a), args))
    else:
        rows = [_sweep_row(*a) for a in args]
    rows.sort(key=lambda r: -r["epsilon"])

    fits: dict[str, FitResult] = {}
    eps = [r["epsilon"] for r in rows]

    def add_fit(name: str, col: str):
        vals = [r[col] for r in rows]
        if all(v > 0 for v in vals) and len(vals) >= 3:
            fits[name] = fit_rate(zip(eps, vals))

    add_fit("two_term_l2", "err_two_term_l2")
    add_fit("two_term_sup", "err_two_term_sup")
    add_fit("one_term_l2", "err_one_term_l2")
    add_fit("pos_gap_pow", "pos_gap_pow_max")
    add_fit("cur_l1", "cur_l1_max")

    plan_echo = {
        "grid": grid.descriptor(),
        "sigma": sigma,
        "epsilon_list": list(plan.epsilon_list),
        "final_time": plan.final_time,
        "n_obs": plan.n_obs,
        "dt0": plan.dt0,
        "dt_exponent": plan.dt_exponent,
        "self_check": plan.self_check,
        "initial_label": initial.label,
        "config": plan.config_echo,
    }
    env = {"package": "scnls", "version": __version__, "numpy": np.__version__}
    return SweepResult(plan_echo=plan_echo, rows=rows, fits=fits,
                       gronwall_c=c_hat, sup_p=sup_p, k_order=k,
                       environment=env)
