"""Run configuration: a sectioned JSON document, strictly validated.

Sections and keys (all optional unless noted):

    grid:     dim (1|2), N (power of two >= 16, per axis), L (> 0, per axis)
    physics:  sigma (int, 1..6), epsilon (in (0,1]) or epsilon_list
              (strictly decreasing, in (0,1])
    time:     T (> 0), dt0 (> 0), observation_count (int >= 3)
    initial:  a0_preset/a0_params, a1_preset/a1_params,
              phi0_preset/phi0_params (presets module)
    output:   directory, formats (subset of csv, json, snapshots)
    blowup:   max_time, amplitudes, radius, grid_length (breakdown command)
    focusing: wavenumbers, delta, window, dt, rho0 (frequency-growth command)
    seed:     echoed into artifacts; the pipeline itself is deterministic

Unknown sections or keys are rejected, naming the offending key.  The parsed
config serializes back to a canonical document (parse -> serialize -> parse
is the identity), and every artifact embeds the effective config.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .grid import Grid
from .presets import InitialData, make_amplitude, make_phase

DEFAULT_EPSILON_LADDER = (2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6, 2.0**-7)

_SECTIONS = {"grid", "physics", "time", "initial", "output", "blowup",
             "focusing", "seed"}
_KEYS = {
    "grid": {"dim", "N", "L"},
    "physics": {"sigma", "epsilon", "epsilon_list"},
    "time": {"T", "dt0", "observation_count"},
    "initial": {"a0_preset", "a0_params", "a1_preset", "a1_params",
                "phi0_preset", "phi0_params"},
    "output": {"directory", "formats"},
    "blowup": {"max_time", "amplitudes", "radius", "grid_length"},
    "focusing": {"wavenumbers", "delta", "window", "dt", "rho0"},
}
_FORMATS = {"csv", "json", "snapshots"}


@dataclass(frozen=True)
class RunConfig:
    dim: int = 1
    n: tuple[int, ...] = (512,)
    length: tuple[float, ...] = (16.0,)
    sigma: int = 2
    epsilon: float = 0.125
    epsilon_list: tuple[float, ...] = DEFAULT_EPSILON_LADDER
    final_time: float = 0.25
    dt0: float = 0.01
    observation_count: int = 20
    a0_preset: str = "gaussian"
    a0_params: dict = field(default_factory=dict)
    a1_preset: str = "zero"
    a1_params: dict = field(default_factory=dict)
    phi0_preset: str = "zero"
    phi0_params: dict = field(default_factory=dict)
    directory: str = "scnls-out"
    formats: tuple[str, ...] = ("csv", "json")
    blowup: dict = field(default_factory=dict)
    focusing: dict = field(default_factory=dict)
    seed: int | None = None

    # -- builders ----------------------------------------------------------

    def make_grid(self) -> Grid:
        return Grid(self.n, self.length, dim=self.dim)

    def make_initial_data(self, grid: Grid | None = None) -> InitialData:
        grid = grid or self.make_grid()
        a0 = make_amplitude(grid, self.a0_preset, self.a0_params, "initial.a0_preset")
        a1 = make_amplitude(grid, self.a1_preset, self.a1_params, "initial.a1_preset")
        per, kvec = make_phase(grid, self.phi0_preset, self.phi0_params,
                               "initial.phi0_preset")
        label = f"{self.a0_preset}/{self.a1_preset}/{self.phi0_preset}"
        return InitialData(grid=grid, a0=a0, a1=a1, phi0_periodic=per,
                           phi0_wavevector=kvec, label=label)

    # -- serialization -----------------------------------------------------

    def effective(self) -> dict:
        """Canonical nested document with every default filled in."""
        return {
            "grid": {"dim": self.dim, "N": list(self.n), "L": list(self.length)},
            "physics": {"sigma": self.sigma, "epsilon": self.epsilon,
                        "epsilon_list": list(self.epsilon_list)},
            "time": {"T": self.final_time, "dt0": self.dt0,
                     "observation_count": self.observation_count},
            "initial": {"a0_preset": self.a0_preset, "a0_params": self.a0_params,
                        "a1_preset": self.a1_preset, "a1_params": self.a1_params,
                        "phi0_preset": self.phi0_preset,
                        "phi0_params": self.phi0_params},
            "output": {"directory": self.directory, "formats": list(self.formats)},
            "blowup": self.blowup,
            "focusing": self.focusing,
            "seed": self.seed,
        }

    def serialize(self) -> str:
        return json.dumps(self.effective(), sort_keys=True, indent=1)

    def content_hash(self) -> str:
        blob = json.dumps(self.effective(), sort_keys=True, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# validation helpers


def _need(cond: bool, key: str, msg: str):
    if not cond:
        raise ConfigError(key, msg)


def _as_int(value, key: str) -> int:
    _need(isinstance(value, int) and not isinstance(value, bool), key,
          f"expected an integer, got {value!r}")
    return value


def _as_num(value, key: str) -> float:
    _need(isinstance(value, (int, float)) and not isinstance(value, bool), key,
          f"expected a number, got {value!r}")
    return float(value)


def _axis_tuple(value, dim: int, key: str, kind):
    if isinstance(value, list):
        _need(len(value) == dim, key, f"expected {dim} per-axis values")
        return tuple(kind(v, key) for v in value)
    return (kind(value, key),) * dim


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config document (JSON text)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"not valid JSON: {exc}") from exc
    _need(isinstance(doc, dict), "<document>", "top level must be an object")
    unknown = set(doc) - _SECTIONS
    _need(not unknown, sorted(unknown)[0] if unknown else "",
          "unknown top-level section")
    for section, keys in _KEYS.items():
        if section in doc:
            _need(isinstance(doc[section], dict), section, "must be an object")
            bad = set(doc[section]) - keys
            if bad:
                raise ConfigError(f"{section}.{sorted(bad)[0]}", "unknown key")

    g = doc.get("grid", {})
    dim = _as_int(g.get("dim", 1), "grid.dim")
    _need(dim in (1, 2), "grid.dim", f"must be 1 or 2, got {dim}")
    n = _axis_tuple(g.get("N", 512), dim, "grid.N", _as_int)
    for ni in n:
        _need(ni >= 16 and (ni & (ni - 1)) == 0, "grid.N",
              f"must be a power of two >= 16, got {ni}")
    length = _axis_tuple(g.get("L", 16.0), dim, "grid.L", _as_num)
    for li in length:
        _need(li > 0, "grid.L", f"must be positive, got {li}")

    p = doc.get("physics", {})
    sigma = _as_int(p.get("sigma", 2), "physics.sigma")
    _need(1 <= sigma <= 6, "physics.sigma",
          f"must be an integer in 1..6 (positive nonlinearity exponent), got {sigma}")
    epsilon = _as_num(p.get("epsilon", 0.125), "physics.epsilon")
    _need(0.0 < epsilon <= 1.0, "physics.epsilon",
          f"must be in (0, 1], got {epsilon}")
    if "epsilon_list" in p:
        raw = p["epsilon_list"]
        _need(isinstance(raw, list) and raw, "physics.epsilon_list",
              "must be a non-empty list")
        eps_list = tuple(_as_num(v, "physics.epsilon_list") for v in raw)
        for e in eps_list:
            _need(0.0 < e <= 1.0, "physics.epsilon_list",
                  f"values must be in (0, 1], got {e}")
        _need(all(eps_list[i + 1] < eps_list[i] for i in range(len(eps_list) - 1)),
              "physics.epsilon_list", "must be strictly decreasing")
    else:
        eps_list = DEFAULT_EPSILON_LADDER

    tm = doc.get("time", {})
    final_time = _as_num(tm.get("T", 0.25), "time.T")
    _need(final_time > 0, "time.T", "must be positive")
    dt0 = _as_num(tm.get("dt0", 0.01), "time.dt0")
    _need(dt0 > 0, "time.dt0", "must be positive")
    n_obs = _as_int(tm.get("observation_count", 20), "time.observation_count")
    _need(n_obs >= 3, "time.observation_count", "must be >= 3")

    ini = doc.get("initial", {})
    for pk in ("a0_params", "a1_params", "phi0_params"):
        if pk in ini:
            _need(isinstance(ini[pk], dict), f"initial.{pk}", "must be an object")

    out = doc.get("output", {})
    directory = out.get("directory", "scnls-out")
    _need(isinstance(directory, str) and directory, "output.directory",
          "must be a non-empty string")
    formats = tuple(out.get("formats", ["csv", "json"]))
    bad = set(formats) - _FORMATS
    _need(not bad, "output.formats", f"unknown formats: {sorted(bad)}")

    blow = dict(doc.get("blowup", {}))
    foc = dict(doc.get("focusing", {}))
    seed = doc.get("seed")
    if seed is not None:
        seed = _as_int(seed, "seed")

    cfg = RunConfig(
        dim=dim, n=n, length=length, sigma=sigma, epsilon=epsilon,
        epsilon_list=eps_list, final_time=final_time, dt0=dt0,
        observation_count=n_obs,
        a0_preset=ini.get("a0_preset", "gaussian"),
        a0_params=dict(ini.get("a0_params", {})),
        a1_preset=ini.get("a1_preset", "zero"),
        a1_params=dict(ini.get("a1_params", {})),
        phi0_preset=ini.get("phi0_preset", "zero"),
        phi0_params=dict(ini.get("phi0_params", {})),
        directory=directory, formats=formats, blowup=blow, focusing=foc,
        seed=seed,
    )
    # fail fast on bad presets/params
    cfg.make_initial_data(Grid((16,) * dim, length, dim=dim))
    return cfg


def blowup_options(cfg: RunConfig) -> dict:
    b = cfg.blowup
    return {
        "max_time": float(b.get("max_time", 20.0)),
        "amplitudes": [float(a) for a in b.get("amplitudes", [0.5, 1.0])],
        "radius": float(b.get("radius", 3.0)),
        "grid_length": float(b.get("grid_length", cfg.length[0])),
    }


def focusing_options(cfg: RunConfig) -> dict:
    f = cfg.focusing
    return {
        "wavenumbers": [int(k) for k in f.get("wavenumbers", [4, 8, 16, 32])],
        "delta": float(f.get("delta", 1e-7)),
        "window": float(f.get("window", 0.35)),
        "dt": float(f.get("dt", 2e-3)),
        "rho0": float(f.get("rho0", 1.0)),
    }
