"""Command-line front end: ``ostwave <command> [options]``.

Exit codes: 0 when every check passes, 1 on a numeric failure, 2 on a
configuration or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import scipy.optimize

from .bloch import spectral_curves
from .errors import BetaZero, CacheInvalid, ConfigError, DegenerateStokes, OstwaveError
from .report import StabilityReport, curves_svg, run_sweep, write_csv
from .store import RunConfig, WaveCache, dump_json, load_config, load_json, obtain_wave
from .waves import continue_family, parameter_jet
from .whitham import critical_frequency, stokes_lighthill, whitham_matrix

log = logging.getLogger("ostwave")

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--out", dest="out_dir", help="output directory (default: out)")
    p.add_argument("--modes", dest="n_modes", type=int, help="Fourier modes N")
    p.add_argument("--jobs", type=int, help="worker processes for sweeps")
    p.add_argument("--force", action="store_true", default=None, help="replace invalid cache entries")
    p.add_argument("--cache", choices=("read", "write", "off"), help="cache policy")
    p.add_argument("--gamma", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("-v", "--verbose", action="store_true")


def _wave_args(p: argparse.ArgumentParser):
    p.add_argument("--k", type=float, help="spatial frequency")
    p.add_argument("--P", type=float, help="momentum")
    p.add_argument("--seed-amplitude", dest="seed_amplitude", type=float)


def _xi_args(p: argparse.ArgumentParser):
    p.add_argument("--xi-min", dest="xi_min", type=float)
    p.add_argument("--xi-max", dest="xi_max", type=float)
    p.add_argument("--xi-count", dest="xi_count", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ostwave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stokes-criterion", help="sign of the Stokes-regime Lighthill product over k")
    _common(p)
    p.add_argument("--k-min", dest="k_min", type=float)
    p.add_argument("--k-max", dest="k_max", type=float)
    p.add_argument("--count", type=int)

    p = sub.add_parser("solve", help="solve one traveling wave and cache it")
    _common(p)
    _wave_args(p)

    p = sub.add_parser("family", help="continue a wave family in P at fixed k")
    _common(p)
    _wave_args(p)
    p.add_argument("--P-min", dest="P_min", type=float)
    p.add_argument("--P-max", dest="P_max", type=float)
    p.add_argument("--count", type=int)

    p = sub.add_parser("whitham", help="Whitham matrices over the sweep")
    _common(p)
    _wave_args(p)

    p = sub.add_parser("bloch", help="spectral curves near the origin for one wave")
    _common(p)
    _wave_args(p)
    _xi_args(p)
    p.add_argument("--svg", action="store_true", help="also write an SVG chart")

    p = sub.add_parser("verify", help="identity and spectral checks over the sweep")
    _common(p)
    _wave_args(p)
    _xi_args(p)
    p.add_argument("--svg", action="store_true", help="also write an SVG classification map")

    p = sub.add_parser("report", help="re-emit CSV/SVG from an existing report.json")
    _common(p)
    p.add_argument("--input", help="report.json (default: <out>/report.json)")
    p.add_argument("--svg", action="store_true", help="also write an SVG classification map")
    return parser


_NON_CONFIG = {"command", "config", "verbose", "svg", "input"}


def _config(args) -> RunConfig:
    overrides = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}
    return load_config(args.config, overrides)


def _need(value, name: str):
    if value is None:
        raise ConfigError(f"{name} is required (flag or config file)")
    return value


def _out(cfg: RunConfig) -> Path:
    return Path(cfg.out_dir)


# -- commands ----------------------------------------------------------------------


def cmd_stokes_criterion(cfg: RunConfig, args) -> int:
    if not (0 < cfg.k_min < cfg.k_max) or cfg.count < 2:
        raise ConfigError("need 0 < k_min < k_max and count >= 2")
    ks = np.linspace(cfg.k_min, cfg.k_max, cfg.count)
    rows, prev = [], 0.0
    for k in ks:
        try:
            prod = stokes_lighthill(float(k), cfg.params)
        except DegenerateStokes:
            rows.append([float(k), float("nan"), "resonant", 0])
            prev = 0.0
            continue
        sign = float(np.sign(prod))
        regime = {1.0: "hyperbolic", -1.0: "elliptic", 0.0: "degenerate"}[sign]
        rows.append([float(k), prod, regime, int(prev != 0 and sign != 0 and sign != prev)])
        prev = sign or prev
    out = _out(cfg)
    write_csv(out / "stokes_criterion.csv", ["k", "lighthill_product", "regime", "crossing"], rows)
    roots = []
    for i, row in enumerate(rows):
        if row[3]:
            roots.append(scipy.optimize.brentq(stokes_lighthill, rows[i - 1][0], row[0], args=(cfg.params,), xtol=1e-14))
    try:
        k_c = critical_frequency(cfg.params)
    except BetaZero:
        k_c = None
    dump_json({"kind": "stokes_criterion", "crossings": roots, "critical_frequency": k_c}, out / "stokes_criterion.json")
    print(f"crossings: {', '.join(f'{r:.9f}' for r in roots) or 'none'}")
    return EXIT_OK


def _cache(cfg: RunConfig) -> WaveCache:
    return WaveCache(policy=cfg.cache)


def cmd_solve(cfg: RunConfig, args) -> int:
    k, P = _need(cfg.k, "k"), _need(cfg.P, "P")
    t0 = time.perf_counter()
    w, hit = obtain_wave(cfg, k, P, _cache(cfg))
    log.info("cache %s (%.3f s)", "hit" if hit else "miss, solved", time.perf_counter() - t0)
    dump_json({"kind": "traveling_wave", "wave": w.to_json()}, _out(cfg) / "wave.json")
    print(f"k={w.k!r} P={w.P!r} c={w.c!r} residual={w.residual_norm:.3e} cache={'hit' if hit else 'miss'}")
    return EXIT_OK


def cmd_family(cfg: RunConfig, args) -> int:
    k = _need(cfg.k, "k")
    P_min, P_max = _need(cfg.P_min, "P_min"), _need(cfg.P_max, "P_max")
    if not (0 < P_min <= P_max) or cfg.count < 1:
        raise ConfigError("need 0 < P_min <= P_max and count >= 1")
    cache = _cache(cfg)
    Ps = np.geomspace(P_min, P_max, cfg.count)
    w, _ = obtain_wave(cfg, k, float(Ps[0]), cache)
    rows = [[w.k, w.P, w.c, w.amplitude, w.residual_norm]]
    for P in Ps[1:]:
        w = continue_family(w, k, float(P), tol=cfg.tolerances.newton)[-1]
        rows.append([w.k, w.P, w.c, w.amplitude, w.residual_norm])
    write_csv(_out(cfg) / "family.csv", ["k", "P", "c", "amplitude", "residual_norm"], rows)
    print(f"{len(rows)} waves written")
    return EXIT_OK


def _sweep_points(cfg: RunConfig):
    if cfg.sweep:
        return cfg.sweep_points()
    if cfg.k is not None and cfg.P is not None:
        return [(cfg.k, cfg.P)]
    return []


def _whitham_row(args):
    cfg, k, P = args
    try:
        w, _ = obtain_wave(cfg, k, P, _cache(cfg))
        W = whitham_matrix(w, parameter_jet(w), cfg.tolerances.discriminant)
    except OstwaveError as exc:
        log.error("k=%g P=%g: %s", k, P, exc)
        return None
    (a, b), (c, d) = W.entries
    l1, l2 = W.eigenvalues
    p = cfg.params
    return [p.gamma, p.beta, w.k, w.P, w.c, a, b, c, d, l1.real, l1.imag, l2.real, l2.imag, W.classification.value]


def cmd_whitham(cfg: RunConfig, args) -> int:
    tasks = [(cfg, k, P) for k, P in _sweep_points(cfg)]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_whitham_row, tasks))
    else:
        rows = [_whitham_row(t) for t in tasks]
    header = ["gamma", "beta", "k", "P", "c", "W11", "W12", "W21", "W22", "re_l1", "im_l1", "re_l2", "im_l2", "classification"]
    write_csv(_out(cfg) / "whitham_map.csv", header, [r for r in rows if r is not None])
    failed = sum(r is None for r in rows)
    print(f"{len(rows) - failed} rows written, {failed} failures")
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_bloch(cfg: RunConfig, args) -> int:
    k, P = _need(cfg.k, "k"), _need(cfg.P, "P")
    w, _ = obtain_wave(cfg, k, P, _cache(cfg))
    jet = parameter_jet(w)
    curve = spectral_curves(w, cfg.xi.values(), jet=jet)
    W = whitham_matrix(w, jet, cfg.tolerances.discriminant)
    out = _out(cfg)
    b1, b2 = curve.branches
    rows = [[x, l1.real, l1.imag, l2.real, l2.imag] for x, l1, l2 in zip(curve.xi_grid, b1, b2)]
    write_csv(out / "bloch_curves.csv", ["xi", "re_l1", "im_l1", "re_l2", "im_l2"], rows)
    summary = {
        "kind": "bloch_summary",
        "mu1": [curve.mu[0].real, curve.mu[0].imag],
        "mu2": [curve.mu[1].real, curve.mu[1].imag],
        "max_re_in_window": curve.max_real_part,
        "window_radius": curve.window_radius,
        "classification": W.classification.value,
    }
    dump_json(summary, out / "bloch_summary.json")
    if args.svg:
        curves_svg(curve.xi_grid, curve.branches, out / "bloch_curves.svg")
    print(f"classification={W.classification.value} max_re_in_window={curve.max_real_part:.3e}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    records = run_sweep(cfg, _sweep_points(cfg))
    report = StabilityReport(tuple(records), cfg.digest())
    report.write(_out(cfg), svg=args.svg)
    s = report.summary
    print(f"{s['passed']}/{s['total']} passed, {s['flagged']} flagged, {s['errors']} errors")
    return EXIT_OK if report.all_passed else EXIT_NUMERIC


def cmd_report(cfg: RunConfig, args) -> int:
    path = Path(args.input) if args.input else _out(cfg) / "report.json"
    try:
        report = StabilityReport.from_json(load_json(path))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read report {path}: {exc}") from exc
    report.write(_out(cfg), svg=args.svg)
    print(json.dumps(report.summary, sort_keys=True))
    return EXIT_OK if report.all_passed else EXIT_NUMERIC


COMMANDS = {
    "stokes-criterion": cmd_stokes_criterion,
    "solve": cmd_solve,
    "family": cmd_family,
    "whitham": cmd_whitham,
    "bloch": cmd_bloch,
    "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        cfg = _config(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, CacheInvalid, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OstwaveError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
