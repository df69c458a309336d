"""Run configuration, deterministic serialization and the on-disk wave cache."""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import CacheInvalid, ConfigError
from .spectral import DEFAULT_MODES, PeriodicGrid
from .waves import NEWTON_TOL, ModelParams, TravelingWave, solve_wave

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
CACHE_ENV = "OSTWAVE_CACHE_DIR"
CACHE_POLICIES = ("read", "write", "off")


@dataclass(frozen=True)
class Tolerances:
    newton: float = NEWTON_TOL
    identity: float = 1e-6
    real_part: float = 1e-8
    discriminant: float = 1e-8
    slope: float = 1e-4

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ConfigError(f"tolerance {name} must be positive, got {value}")


@dataclass(frozen=True)
class SweepRect:
    """Rectangle [k_min, k_max] x [P_min, P_max] sampled on an n_k x n_P grid."""

    k_min: float
    k_max: float
    n_k: int
    P_min: float
    P_max: float
    n_P: int
    P_spacing: str = "log"

    def __post_init__(self):
        if self.n_k < 1 or self.n_P < 1:
            raise ConfigError("sweep sample counts must be positive")
        if not (0 < self.k_min <= self.k_max) or not (0 < self.P_min <= self.P_max):
            raise ConfigError("sweep rectangle must have 0 < min <= max in k and P")
        if self.P_spacing not in ("log", "linear"):
            raise ConfigError("P_spacing must be 'log' or 'linear'")

    def points(self) -> list[tuple[float, float]]:
        ks = np.linspace(self.k_min, self.k_max, self.n_k)
        space = np.geomspace if self.P_spacing == "log" else np.linspace
        Ps = space(self.P_min, self.P_max, self.n_P)
        return [(float(k), float(P)) for k in ks for P in Ps]


@dataclass(frozen=True)
class XiGrid:
    xi_min: float = 1e-3
    xi_max: float = 0.1
    count: int = 25

    def __post_init__(self):
        if not (0 < self.xi_min <= self.xi_max < np.pi) or self.count < 1:
            raise ConfigError("xi grid must satisfy 0 < min <= max < pi with count >= 1")

    def values(self) -> np.ndarray:
        return np.linspace(self.xi_min, self.xi_max, self.count)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams)
    n_modes: int = DEFAULT_MODES
    tolerances: Tolerances = field(default_factory=Tolerances)
    sweep: tuple[SweepRect, ...] = ()
    xi: XiGrid = field(default_factory=XiGrid)
    out_dir: str = "out"
    cache: str = "read"
    jobs: int = 1
    force: bool = False
    # single-wave and range commands
    k: float | None = None
    P: float | None = None
    seed_amplitude: float | None = None
    k_min: float = 0.05
    k_max: float = 0.3
    count: int = 26
    P_min: float | None = None
    P_max: float | None = None

    def __post_init__(self):
        if self.n_modes < 4:
            raise ConfigError("modes must be at least 4")
        if self.cache not in CACHE_POLICIES:
            raise ConfigError(f"cache policy must be one of {CACHE_POLICIES}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    @property
    def grid(self) -> PeriodicGrid:
        return PeriodicGrid.for_modes(self.n_modes)

    def sweep_points(self) -> list[tuple[float, float]]:
        """All sweep samples, deduplicated and in (k, P) lexicographic order."""
        return sorted({pt for rect in self.sweep for pt in rect.points()})

    def to_json(self) -> dict:
        d = asdict(self)
        d["sweep"] = [asdict(r) for r in self.sweep]
        return d

    def digest(self) -> str:
        """Hash of everything that affects numbers (not output location or worker count)."""
        d = self.to_json()
        for key in ("out_dir", "jobs", "force", "cache"):
            d.pop(key)
        return hashlib.sha256(canonical_json(d).encode()).hexdigest()


# -- config loading ----------------------------------------------------------------


_TABLE_KEYS = {
    "model": {"gamma", "beta"},
    "grid": {"modes"},
    "tolerances": {"newton", "identity", "real_part", "discriminant", "slope"},
    "xi": {"min", "max", "count"},
    "output": {"dir", "cache"},
    "wave": {"k", "P", "seed_amplitude"},
    "range": {"k_min", "k_max", "count", "P_min", "P_max"},
}


def _check_keys(name: str, table: dict, allowed: set):
    if not isinstance(table, dict):
        raise ConfigError(f"[{name}] must be a table")
    extra = set(table) - allowed
    if extra:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(extra)}")


def config_from_mapping(data: dict) -> RunConfig:
    unknown = set(data) - set(_TABLE_KEYS) - {"sweep"}
    if unknown:
        raise ConfigError(f"unknown config tables: {sorted(unknown)}")
    for name, allowed in _TABLE_KEYS.items():
        _check_keys(name, data.get(name, {}), allowed)
    try:
        model = data.get("model", {})
        params = ModelParams(float(model.get("gamma", 1.0)), float(model.get("beta", 1.0)))
        tol = Tolerances(**{k: float(v) for k, v in data.get("tolerances", {}).items()})
        rects = []
        for rect in data.get("sweep", []):
            k_lo, k_hi = rect["k"]
            P_lo, P_hi = rect["P"]
            rects.append(
                SweepRect(
                    float(k_lo), float(k_hi), int(rect.get("n_k", 1)),
                    float(P_lo), float(P_hi), int(rect.get("n_P", 1)),
                    str(rect.get("P_spacing", "log")),
                )
            )
        xi = data.get("xi", {})
        xi_grid = XiGrid(float(xi.get("min", 1e-3)), float(xi.get("max", 0.1)), int(xi.get("count", 25)))
        out = data.get("output", {})
        wave = data.get("wave", {})
        rng = data.get("range", {})
        opt = lambda d, key: None if d.get(key) is None else float(d[key])  # noqa: E731
        return RunConfig(
            params=params,
            n_modes=int(data.get("grid", {}).get("modes", DEFAULT_MODES)),
            tolerances=tol,
            sweep=tuple(rects),
            xi=xi_grid,
            out_dir=str(out.get("dir", "out")),
            cache=str(out.get("cache", "read")),
            k=opt(wave, "k"),
            P=opt(wave, "P"),
            seed_amplitude=opt(wave, "seed_amplitude"),
            k_min=float(rng.get("k_min", 0.05)),
            k_max=float(rng.get("k_max", 0.3)),
            count=int(rng.get("count", 26)),
            P_min=opt(rng, "P_min"),
            P_max=opt(rng, "P_max"),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path: str | os.PathLike | None, overrides: dict | None = None) -> RunConfig:
    """Read a TOML config (optional) and apply flag overrides, which win over the file."""
    data = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    cfg = config_from_mapping(data)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    if not overrides:
        return cfg
    params = cfg.params
    if "gamma" in overrides or "beta" in overrides:
        try:
            params = ModelParams(overrides.pop("gamma", params.gamma), overrides.pop("beta", params.beta))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    xi = cfg.xi
    xi_over = {k[3:]: overrides.pop(k) for k in ("xi_min", "xi_max", "xi_count") if k in overrides}
    if xi_over:
        xi = replace(xi, **{("count" if k == "count" else f"xi_{k}"): v for k, v in xi_over.items()})
    try:
        return replace(cfg, params=params, xi=xi, **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# -- deterministic serialization -------------------------------------------------------


def canonical_json(obj) -> str:
    """Sorted keys, fixed separators, shortest round-trip float repr."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def dump_json(obj: dict, path: Path):
    payload = {"format_version": FORMAT_VERSION, **obj}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def load_json(path: Path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {data.get('format_version')!r}")
    return data


# -- wave cache ----------------------------------------------------------------------


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "ostwave"


def cache_key(params: ModelParams, k: float, P: float, n_modes: int, tol: Tolerances) -> str:
    ident = {
        "gamma": params.gamma,
        "beta": params.beta,
        "k": float(k),
        "P": float(P),
        "N": int(n_modes),
        "tolerances": asdict(tol),
    }
    return hashlib.sha256(canonical_json(ident).encode()).hexdigest()


class WaveCache:
    """JSON file per wave, keyed by (gamma, beta, k, P, N, tolerances).

    Floats are written with their shortest round-trip representation, so a
    hit reproduces the solved wave bit for bit.
    """

    def __init__(self, root: str | os.PathLike | None = None, policy: str = "read"):
        if policy not in CACHE_POLICIES:
            raise ConfigError(f"cache policy must be one of {CACHE_POLICIES}")
        self.root = Path(root) if root is not None else default_cache_dir()
        self.policy = policy

    def path(self, key: str) -> Path:
        return self.root / f"wave-{key[:24]}.json"

    def load(self, key: str) -> TravelingWave | None:
        if self.policy != "read":
            return None
        path = self.path(key)
        if not path.exists():
            return None
        try:
            data = load_json(path)
            if data["key"] != key:
                raise ValueError("key mismatch")
            return TravelingWave.from_json(data["wave"])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CacheInvalid(f"{path}: {exc}") from exc

    def store(self, key: str, wave: TravelingWave):
        if self.policy == "off":
            return
        try:
            dump_json({"key": key, "wave": wave.to_json()}, self.path(key))
        except OSError as exc:
            log.warning("could not write cache entry %s: %s", self.path(key), exc)


def obtain_wave(cfg: RunConfig, k: float, P: float, cache: WaveCache | None = None) -> tuple[TravelingWave, bool]:
    """Cached solve; returns (wave, hit).  With cfg.force a corrupt entry is replaced."""
    cache = cache or WaveCache(policy="off")
    key = cache_key(cfg.params, k, P, cfg.n_modes, cfg.tolerances)
    try:
        wave = cache.load(key)
    except CacheInvalid:
        if not cfg.force:
            raise
        log.warning("replacing invalid cache entry for k=%g P=%g", k, P)
        wave = None
    if wave is not None:
        return wave, True
    wave = solve_wave(k, P, cfg.params, cfg.grid, seed_amplitude=cfg.seed_amplitude, tol=cfg.tolerances.newton)
    cache.store(key, wave)
    return wave, False
