"""Command-line surface.

    scnls simulate       config.json   # one wavefunction run + invariants
    scnls limit          config.json   # limit-flow run + conservation/phase checks
    scnls corrector      config.json   # corrector pair on top of the limit flow
    scnls sweep          config.json   # epsilon ladder, error curves, rate fits
    scnls conserve       config.json   # drift table for both systems
    scnls blowup         config.json   # breakdown hunt on compactly supported data
    scnls focusing-demo  config.json   # frequency growth, ill-posed vs control sign
    scnls report         <report.json | run-dir>

Exit codes: 0 success, 2 config error, 3 numerical-guard failure, 4 internal
error.  On failure a machine-readable JSON error record goes to stderr.
Artifacts land in output.directory (override with --out) and embed the
effective config plus a content hash.  --seed is echoed into artifacts only;
the pipeline is deterministic.  SCNLS_WORKERS sets sweep-row parallelism.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, blowup_options, focusing_options, parse_config
from .corrector import evolve_corrector, tilde_amplitude
from .errors import ConfigError, NumericalGuardError
from .grid import Grid
from .limit import (blowup_monitor, characteristic_gradient_scale,
                    euler_invariants, evolve_limit, focusing_demo,
                    power_consistency)
from .nls import NLSConfig, build_initial_data, evolve_nls, nls_invariants
from .presets import InitialData, compact_bump, constant
from .snapshots import write_snapshots
from .sweep import SweepPlan, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_INTERNAL = 0, 2, 3, 4


# ---------------------------------------------------------------------------
# artifact helpers


def _write_json(path: Path, payload: dict, cfg: RunConfig) -> None:
    payload = dict(payload)
    payload["config"] = cfg.effective()
    payload["config_hash"] = cfg.content_hash()
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    payload["content_hash"] = "sha256:" + hashlib.sha256(blob.encode()).hexdigest()
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def _write_csv(path: Path, columns: tuple[str, ...], rows: list[dict],
               cfg: RunConfig) -> None:
    head = [
        "# columns: " + ",".join(columns),
        "# config_hash: " + cfg.content_hash(),
    ]
    body = [",".join(columns)]
    for row in rows:
        body.append(",".join(_cell(row[c]) for c in columns))
    text = "\n".join(body)
    head.append("# content_hash: sha256:" + hashlib.sha256(text.encode()).hexdigest())
    path.write_text("\n".join(head) + "\n" + text + "\n")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, np.ndarray):
        return '"' + ";".join(repr(float(x)) for x in v.ravel()) + '"'
    return str(v)


def _outdir(cfg: RunConfig, override: str | None) -> Path:
    out = Path(override) if override else Path(cfg.directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective_config.json").write_text(cfg.serialize() + "\n")
    return out


def _obs_times(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.final_time, cfg.observation_count)


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(cfg: RunConfig, out: Path) -> None:
    grid = cfg.make_grid()
    data = cfg.make_initial_data(grid)
    u0 = build_initial_data(data, cfg.epsilon)
    ncfg = NLSConfig(grid=grid, epsilon=cfg.epsilon, sigma=cfg.sigma,
                     final_time=cfg.final_time, dt0=cfg.dt0)
    traj = evolve_nls(u0, ncfg, _obs_times(cfg))
    rows = []
    for t, u in zip(traj.times, traj.states):
        inv = nls_invariants(u, float(t), grid, cfg.epsilon, cfg.sigma)
        rows.append({
            "time": float(t), "mass": inv.mass, "energy": inv.energy,
            "momentum": inv.momentum, "pseudo_conformal": inv.pseudo_conformal,
            "weighted_mass_center": inv.weighted_mass_center,
            "boundary_tail": inv.boundary_tail, "support_ok": inv.support_ok,
        })
    cols = ("time", "mass", "energy", "momentum", "pseudo_conformal",
            "weighted_mass_center", "boundary_tail", "support_ok")
    if "csv" in cfg.formats:
        _write_csv(out / "invariants.csv", cols, rows, cfg)
    if "snapshots" in cfg.formats:
        write_snapshots(out / "wavefunction.snap",
                        [("u", float(t), u, grid)
                         for t, u in zip(traj.times, traj.states)],
                        extra={"config_hash": cfg.content_hash()})
    m0, mT = rows[0]["mass"], rows[-1]["mass"]
    summary = {
        "command": "simulate",
        "epsilon": cfg.epsilon, "sigma": cfg.sigma, "dt": traj.dt,
        "mass_drift_rel": abs(mT - m0) / m0 if m0 else 0.0,
        "energy_drift_rel": abs(rows[-1]["energy"] - rows[0]["energy"])
        / max(abs(rows[0]["energy"]), 1e-300),
        "self_check_error": traj.self_check_error,
        "self_check_ok": traj.self_check_ok,
    }
    _write_json(out / "summary.json", summary, cfg)


def cmd_limit(cfg: RunConfig, out: Path) -> None:
    grid = cfg.make_grid()
    data = cfg.make_initial_data(grid)
    traj = evolve_limit(data, cfg.sigma, cfg.final_time, n_obs=cfg.observation_count)
    rows = []
    grad_phi_err = 0.0
    for t in _obs_times(cfg):
        st = traj.state_at(float(t))
        inv = euler_invariants(st, cfg.sigma)
        rows.append({
            "time": float(t), "mass": inv.mass, "energy": inv.energy,
            "momentum": inv.momentum, "pseudo_conformal": inv.pseudo_conformal,
            "center_of_mass": inv.center_of_mass,
            "total_pressure": inv.total_pressure,
            "boundary_tail": inv.boundary_tail, "support_ok": inv.support_ok,
        })
        for j in range(grid.dim):
            dphi = grid.spectral_derivative(st.phi_periodic, j).real \
                + st.phi_wavevector[j]
            grad_phi_err = max(grad_phi_err, grid.l2_norm(dphi - st.v[j]))
    cols = ("time", "mass", "energy", "momentum", "pseudo_conformal",
            "center_of_mass", "total_pressure", "boundary_tail", "support_ok")
    if "csv" in cfg.formats:
        _write_csv(out / "euler_invariants.csv", cols, rows, cfg)
    if "snapshots" in cfg.formats:
        recs = []
        for t in _obs_times(cfg):
            st = traj.state_at(float(t))
            recs.append(("a", float(t), st.a, grid))
            for j in range(grid.dim):
                recs.append((f"v{j}", float(t), st.v[j], grid))
        write_snapshots(out / "limit.snap", recs,
                        extra={"config_hash": cfg.content_hash()})
    summary = {
        "command": "limit", "sigma": cfg.sigma, "dt": traj.dt,
        "status": traj.status,
        "grad_phi_minus_v_l2_max": grad_phi_err,
        "power_consistency_banded_max": power_consistency(traj, banded=True),
        "power_consistency_raw_max": power_consistency(traj, banded=False),
        "mass_drift_rel": abs(rows[-1]["mass"] - rows[0]["mass"])
        / max(rows[0]["mass"], 1e-300),
    }
    _write_json(out / "summary.json", summary, cfg)


def cmd_corrector(cfg: RunConfig, out: Path) -> None:
    grid = cfg.make_grid()
    data = cfg.make_initial_data(grid)
    limit_traj = evolve_limit(data, cfg.sigma, cfg.final_time,
                              n_obs=cfg.observation_count)
    corr = evolve_corrector(limit_traj, data.a1)
    phi1_max = 0.0
    modulus_gap = 0.0
    recs = []
    for t in _obs_times(cfg):
        ls = limit_traj.state_at(float(t))
        cs = corr.state_at(float(t))
        til = tilde_amplitude(ls, cs)
        phi1_max = max(phi1_max, float(np.max(np.abs(cs.phi1))))
        modulus_gap = max(modulus_gap, float(np.max(
            np.abs(np.abs(til.a_tilde) - np.abs(ls.a)))))
        recs.append(("phi1", float(t), cs.phi1, grid))
        recs.append(("w", float(t), cs.w, grid))
        recs.append(("a_tilde", float(t), til.a_tilde, grid))
    if "snapshots" in cfg.formats:
        write_snapshots(out / "corrector.snap", recs,
                        extra={"config_hash": cfg.content_hash()})
    a0, a1 = data.a0, data.a1
    real_data_case = bool(
        np.max(np.abs(a0.imag)) < 1e-14 and np.max(np.abs(a1.real)) < 1e-14)
    summary = {
        "command": "corrector", "sigma": cfg.sigma, "dt": corr.dt,
        "phi1_linf_max": phi1_max,
        "corrected_modulus_gap_max": modulus_gap,
        "real_data_case": real_data_case,
        "phi1_vanishes": phi1_max < 1e-9,
    }
    _write_json(out / "summary.json", summary, cfg)


def cmd_sweep(cfg: RunConfig, out: Path) -> None:
    data = cfg.make_initial_data()
    plan = SweepPlan(initial=data, sigma=cfg.sigma,
                     epsilon_list=cfg.epsilon_list, final_time=cfg.final_time,
                     n_obs=cfg.observation_count, dt0=cfg.dt0,
                     config_echo=cfg.effective())
    result = run_sweep(plan)
    if "csv" in cfg.formats:
        (out / "sweep.csv").write_text(result.to_csv())
    if "json" in cfg.formats:
        (out / "report.json").write_text(result.to_json() + "\n")


def cmd_conserve(cfg: RunConfig, out: Path) -> None:
    grid = cfg.make_grid()
    data = cfg.make_initial_data(grid)
    u0 = build_initial_data(data, cfg.epsilon)
    ncfg = NLSConfig(grid=grid, epsilon=cfg.epsilon, sigma=cfg.sigma,
                     final_time=cfg.final_time, dt0=cfg.dt0)
    traj = evolve_nls(u0, ncfg, _obs_times(cfg))
    ltraj = evolve_limit(data, cfg.sigma, cfg.final_time,
                         n_obs=cfg.observation_count)
    rows = []
    base_n = nls_invariants(traj.states[0], 0.0, grid, cfg.epsilon, cfg.sigma)
    base_e = euler_invariants(ltraj.state_at(0.0), cfg.sigma)
    for t, u in zip(traj.times, traj.states):
        inv = nls_invariants(u, float(t), grid, cfg.epsilon, cfg.sigma)
        ein = euler_invariants(ltraj.state_at(float(t)), cfg.sigma)
        rows.append({
            "time": float(t),
            "nls_mass_drift": abs(inv.mass - base_n.mass) / max(base_n.mass, 1e-300),
            "nls_energy_drift": abs(inv.energy - base_n.energy)
            / max(abs(base_n.energy), 1e-300),
            "nls_momentum_drift": float(np.max(np.abs(inv.momentum - base_n.momentum)))
            / max(float(np.max(np.abs(base_n.momentum))), 1.0),
            "nls_pseudo_conformal": inv.pseudo_conformal,
            "euler_mass_drift": abs(ein.mass - base_e.mass) / max(base_e.mass, 1e-300),
            "euler_energy_drift": abs(ein.energy - base_e.energy)
            / max(abs(base_e.energy), 1e-300),
            "euler_momentum_drift": float(np.max(np.abs(ein.momentum - base_e.momentum)))
            / max(float(np.max(np.abs(base_e.momentum))), 1.0),
            "euler_pseudo_conformal": ein.pseudo_conformal,
            "total_pressure": ein.total_pressure,
        })
    cols = tuple(rows[0].keys())
    if "csv" in cfg.formats:
        _write_csv(out / "conservation.csv", cols, rows, cfg)
    summary = {
        "command": "conserve",
        "max_nls_mass_drift": max(r["nls_mass_drift"] for r in rows),
        "max_nls_energy_drift": max(r["nls_energy_drift"] for r in rows),
        "max_nls_momentum_drift": max(r["nls_momentum_drift"] for r in rows),
        "max_euler_mass_drift": max(r["euler_mass_drift"] for r in rows),
        "max_euler_energy_drift": max(r["euler_energy_drift"] for r in rows),
        "max_euler_momentum_drift": max(r["euler_momentum_drift"] for r in rows),
    }
    _write_json(out / "summary.json", summary, cfg)


def cmd_blowup(cfg: RunConfig, out: Path) -> None:
    opts = blowup_options(cfg)
    grid = Grid(cfg.n, (opts["grid_length"],) * cfg.dim, dim=cfg.dim)
    rows = []
    for amp in opts["amplitudes"]:
        a0 = compact_bump(grid, radius=opts["radius"], amplitude=amp)
        data = InitialData(grid=grid, a0=np.asarray(a0, dtype=complex),
                           a1=np.zeros(grid.shape, dtype=complex),
                           phi0_periodic=np.zeros(grid.shape),
                           phi0_wavevector=(0.0,) * grid.dim,
                           label=f"compact_bump(amp={amp})")
        scale = characteristic_gradient_scale(
            grid, np.zeros((grid.dim, *grid.shape)),
            np.asarray(a0, dtype=complex) ** cfg.sigma, cfg.sigma)
        traj = evolve_limit(data, cfg.sigma, opts["max_time"], adaptive=True,
                            strict=False, store_every=50,
                            grad_stop=40.0 * max(scale, 1e-8))
        rep = blowup_monitor(traj)
        rows.append({
            "amplitude": amp,
            "breakdown_flag": rep.breakdown_flag,
            "t_estimate": rep.t_estimate,
            "t_uncertainty": rep.t_uncertainty,
            "status": rep.status,
            "envelope_ok": rep.envelope_ok,
        })

    def t_or_inf(row):
        return row["t_estimate"] if row["t_estimate"] is not None else math.inf

    monotone = all(
        t_or_inf(rows[i + 1]) < t_or_inf(rows[i])
        for i in range(len(rows) - 1)
        if rows[i]["amplitude"] < rows[i + 1]["amplitude"]
    )
    if "csv" in cfg.formats:
        _write_csv(out / "blowup.csv",
                   ("amplitude", "breakdown_flag", "t_estimate",
                    "t_uncertainty", "status", "envelope_ok"), rows, cfg)
    _write_json(out / "blowup.json", {
        "command": "blowup", "sigma": cfg.sigma, "rows": rows,
        "monotone_in_amplitude": monotone,
        "breakdown_flag": all(r["breakdown_flag"] for r in rows),
        "t_estimate": rows[0]["t_estimate"] if rows else None,
    }, cfg)


def cmd_focusing_demo(cfg: RunConfig, out: Path) -> None:
    opts = focusing_options(cfg)
    length = 2.0 * math.pi
    grid = Grid(cfg.n, (length,) * cfg.dim, dim=cfg.dim)
    a0 = constant(grid, math.sqrt(opts["rho0"]))
    data = InitialData(grid=grid, a0=np.asarray(a0, dtype=complex),
                       a1=np.zeros(grid.shape, dtype=complex),
                       phi0_periodic=np.zeros(grid.shape),
                       phi0_wavevector=(0.0,) * grid.dim,
                       label="constant-background")
    unstable = focusing_demo(data, opts["wavenumbers"], cfg.sigma,
                             pressure_sign=-1, delta=opts["delta"],
                             window=opts["window"], dt=opts["dt"])
    control = focusing_demo(data, opts["wavenumbers"], cfg.sigma,
                            pressure_sign=1, delta=opts["delta"],
                            window=opts["window"], dt=opts["dt"])
    rows = []
    for u, c in zip(unstable, control):
        rows.append({
            "mode": u.mode, "xi": u.xi,
            "rate_focusing": u.rate, "max_growth_focusing": u.max_growth,
            "rate_defocusing": c.rate, "max_growth_defocusing": c.max_growth,
        })
    if "csv" in cfg.formats:
        _write_csv(out / "focusing.csv",
                   ("mode", "xi", "rate_focusing", "max_growth_focusing",
                    "rate_defocusing", "max_growth_defocusing"), rows, cfg)
    increasing = all(rows[i + 1]["rate_focusing"] > rows[i]["rate_focusing"]
                     for i in range(len(rows) - 1))
    _write_json(out / "focusing.json", {
        "command": "focusing-demo", "sigma": cfg.sigma, "rows": rows,
        "rates_increase_with_wavenumber": increasing,
    }, cfg)


def cmd_report(path_arg: str) -> None:
    p = Path(path_arg)
    if p.is_dir():
        p = p / "report.json"
    doc = json.loads(p.read_text())
    plan = doc.get("plan", {})
    print(f"sweep report: sigma={plan.get('sigma')} "
          f"grid={plan.get('grid')} T={plan.get('final_time')}")
    print(f"k_order={doc.get('k_order')} sup_p={doc.get('sup_p')} "
          f"gronwall_constant={doc.get('gronwall_constant')}")
    rows = doc.get("rows", [])
    if rows:
        cols = ["epsilon", "err_two_term_l2", "err_one_term_l2",
                "a_eps_hk_max", "q_eps_hkm1_max", "cur_l1_max",
                "envelope_ok", "self_check_ok"]
        print("  ".join(f"{c:>18}" for c in cols))
        for r in rows:
            print("  ".join(
                f"{r[c]:>18.6g}" if isinstance(r[c], float) else f"{r[c]!s:>18}"
                for c in cols))
    for name, fit in sorted(doc.get("fits", {}).items()):
        tag = " (noisy)" if fit.get("noisy") else ""
        print(f"fit {name}: slope={fit['slope']:.4f} r2={fit['r2']:.5f}{tag}")


# ---------------------------------------------------------------------------
# dispatch


_COMMANDS = {
    "simulate": cmd_simulate,
    "limit": cmd_limit,
    "corrector": cmd_corrector,
    "sweep": cmd_sweep,
    "conserve": cmd_conserve,
    "blowup": cmd_blowup,
    "focusing-demo": cmd_focusing_demo,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="scnls",
        description="semiclassical NLS / hydrodynamic-limit workbench")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("config", help="path to a JSON config document")
        sp.add_argument("--out", default=None, help="output directory override")
        sp.add_argument("--seed", type=int, default=None,
                        help="echoed into artifacts (pipeline is deterministic)")
    rp = sub.add_parser("report")
    rp.add_argument("path", help="report.json or a sweep output directory")

    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            cmd_report(args.path)
            return EXIT_OK
        cfg_path = Path(args.config)
        if not cfg_path.exists():
            raise ConfigError("<document>", f"config file not found: {cfg_path}")
        cfg = parse_config(cfg_path.read_text())
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        out = _outdir(cfg, args.out)
        _COMMANDS[args.command](cfg, out)
        return EXIT_OK
    except ConfigError as exc:
        _emit_error("config", exc)
        return EXIT_CONFIG
    except NumericalGuardError as exc:
        _emit_error("numerical_guard", exc)
        return EXIT_GUARD
    except Exception as exc:  # noqa: BLE001 - surfaced as a machine record
        _emit_error("internal", exc)
        return EXIT_INTERNAL


def _emit_error(kind: str, exc: Exception) -> None:
    record = {"error": {"kind": kind, "type": type(exc).__name__,
                        "message": str(exc)}}
    if isinstance(exc, ConfigError):
        record["error"]["key"] = exc.key
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
