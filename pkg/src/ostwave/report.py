"""Per-wave stability records, sweep evaluation and report emission."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bloch import modulation_matrix, richardson_slopes, spectral_curves, verify_whitham_link
from .errors import OstwaveError
from .store import RunConfig, WaveCache, dump_json, obtain_wave
from .waves import parameter_jet
from .whitham import Classification, whitham_matrix

RECORD_FIELDS = (
    "k",
    "P",
    "c",
    "whitham_class",
    "m0_class",
    "identity_residual",
    "row2_residual_1",
    "row2_residual_2",
    "max_re_in_window",
    "slope_error",
    "passed",
    "flagged",
    "error",
)


@dataclass(frozen=True)
class WaveRecord:
    k: float
    P: float
    c: float = float("nan")
    whitham_class: str = ""
    m0_class: str = ""
    identity_residual: float = float("nan")
    row2_residual_1: float = float("nan")
    row2_residual_2: float = float("nan")
    max_re_in_window: float = float("nan")
    slope_error: float = float("nan")
    passed: bool = False
    flagged: bool = False
    error: str = ""


def spectral_consistent(kind: str, max_re: float, scale: float, tol: float) -> bool:
    """Hyperbolic waves must be neutrally stable near the origin and elliptic ones unstable."""
    if kind == Classification.STRICTLY_HYPERBOLIC.value:
        return max_re <= tol * scale
    if kind == Classification.ELLIPTIC.value:
        return max_re > tol * scale
    return True


def evaluate_point(cfg: RunConfig, k: float, P: float, cache_root: str | None = None) -> WaveRecord:
    """Full identity and spectral check for one (k, P); numeric failures become records."""
    try:
        cache = WaveCache(cache_root, cfg.cache)
        w, _ = obtain_wave(cfg, k, P, cache)
        jet = parameter_jet(w)
        W = whitham_matrix(w, jet, cfg.tolerances.discriminant)
        M0 = modulation_matrix(w, jet)
        link = verify_whitham_link(W, M0, w.c)
        curve = spectral_curves(w, cfg.xi.values(), jet=jet)
        slopes, mu = richardson_slopes(w, jet=jet)
    except OstwaveError as exc:
        return WaveRecord(k, P, error=f"{type(exc).__name__}: {exc}")
    slope_error = float(np.max(np.abs(slopes - mu)) / np.max(np.abs(mu)))
    max_re = curve.max_real_part
    scale = max(1.0, float(np.max(np.abs(curve.branches))))
    flagged = W.classification != M0.classification
    passed = (
        not flagged
        and link.residual <= cfg.tolerances.identity
        and slope_error <= cfg.tolerances.slope
        and spectral_consistent(W.classification.value, max_re, scale, cfg.tolerances.real_part)
    )
    return WaveRecord(
        k=k,
        P=P,
        c=w.c,
        whitham_class=W.classification.value,
        m0_class=M0.classification.value,
        identity_residual=link.residual,
        row2_residual_1=link.row2_residuals[0],
        row2_residual_2=link.row2_residuals[1],
        max_re_in_window=max_re,
        slope_error=slope_error,
        passed=bool(passed),
        flagged=bool(flagged),
    )


def _evaluate_star(args):
    return evaluate_point(*args)


def run_sweep(cfg: RunConfig, points=None, cache_root: str | None = None) -> list[WaveRecord]:
    """Evaluate sweep points on a worker pool; results come back in input order."""
    points = cfg.sweep_points() if points is None else sorted(points)
    tasks = [(cfg, k, P, cache_root) for k, P in points]
    if cfg.jobs == 1 or len(tasks) <= 1:
        return [_evaluate_star(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(_evaluate_star, tasks))


@dataclass(frozen=True)
class StabilityReport:
    records: tuple[WaveRecord, ...]
    config_hash: str
    code_version: str = __version__

    @property
    def summary(self) -> dict:
        counts = {kind.value: 0 for kind in Classification}
        for r in self.records:
            if r.whitham_class:
                counts[r.whitham_class] += 1
        return {
            "total": len(self.records),
            "passed": sum(r.passed for r in self.records),
            "failed": sum(not r.passed for r in self.records),
            "flagged": sum(r.flagged for r in self.records),
            "errors": sum(bool(r.error) for r in self.records),
            "classification": counts,
        }

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.records)

    def to_json(self) -> dict:
        return {
            "kind": "stability_report",
            "provenance": {"config_hash": self.config_hash, "code_version": self.code_version},
            "summary": self.summary,
            "records": [
                {
                    **asdict(r),
                    "residual": r.identity_residual,
                    "row2_residuals": [r.row2_residual_1, r.row2_residual_2],
                    "pass": r.passed,
                }
                for r in self.records
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "StabilityReport":
        records = tuple(WaveRecord(**{f: rec[f] for f in RECORD_FIELDS}) for rec in data["records"])
        prov = data["provenance"]
        return cls(records, prov["config_hash"], prov["code_version"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(RECORD_FIELDS)
        for r in self.records:
            writer.writerow([_cell(getattr(r, f)) for f in RECORD_FIELDS])
        return buf.getvalue()

    def write(self, out_dir: Path, svg: bool = False) -> list[Path]:
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = [out_dir / "report.json", out_dir / "report.csv"]
        dump_json(self.to_json(), paths[0])
        paths[1].write_text(self.to_csv())
        if svg:
            paths.append(out_dir / "classification_map.svg")
            classification_svg(self.records, paths[-1])
        return paths


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    path.write_text(buf.getvalue())


# -- optional SVG output --------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "ostwave"
    return plt


def _save_svg(fig, path: Path):
    fig.savefig(path, format="svg", metadata={"Date": None})


_COLORS = {"StrictlyHyperbolic": "tab:blue", "Elliptic": "tab:red", "Degenerate": "tab:gray", "": "black"}


def classification_svg(records, path: Path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    for kind, color in _COLORS.items():
        pts = [(r.k, r.P) for r in records if r.whitham_class == kind]
        if pts:
            ks, Ps = zip(*pts)
            ax.scatter(ks, Ps, c=color, label=kind or "error", s=20)
    ax.set_xlabel("k")
    ax.set_ylabel("P")
    if records and min(r.P for r in records) > 0:
        ax.set_yscale("log")
    ax.legend(fontsize="small")
    _save_svg(fig, path)
    plt.close(fig)


def curves_svg(xi, branches, path: Path):
    plt = _pyplot()
    fig, (ax_re, ax_im) = plt.subplots(1, 2, figsize=(8, 3.5))
    for j, branch in enumerate(branches):
        ax_re.plot(xi, branch.real, label=f"lambda_{j + 1}")
        ax_im.plot(xi, branch.imag, label=f"lambda_{j + 1}")
    ax_re.set_xlabel("xi")
    ax_re.set_ylabel("Re lambda")
    ax_im.set_xlabel("xi")
    ax_im.set_ylabel("Im lambda")
    ax_im.legend(fontsize="small")
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)
