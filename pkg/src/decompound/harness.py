"""Seeded study orchestration: convergence rates, coefficient rates, census.

A study runs `replicates` independent estimations at each m in a grid,
averages the errors, and fits a log-log rate with a bootstrap confidence
interval.  Everything is driven by a StudyConfig (INI file and/or keyword
overrides), per-replicate RNG streams are derived from
(seed, m, replicate index), and results are written as deterministic CSV /
JSON (plus an optional SVG chart), so identical configs give byte-identical
outputs regardless of worker count.
"""
from __future__ import annotations

import configparser
import dataclasses
import json
import math
import os
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .spaces import Space, make_index, parse_space, spectrum, weyl_census
from .steplaws import CoefficientVector, parse_law
from .simulate import Mode, ProcessConfig, sample_compound
from .coeffs import (
    EstimatorConfig,
    Variant,
    coefficient_errors,
    replicate_seed,
)
from .density import (
    SobolevSpec,
    l2_error,
    reconstruct,
    smoothing_cutoff,
    sobolev_norm,
    truth_table,
)

__all__ = [
    "StudyConfig",
    "StudyResult",
    "FitResult",
    "fit_rate",
    "run_convergence_study",
    "run_coefficient_study",
    "run_census",
    "write_study_outputs",
]

FitResult = namedtuple("FitResult", ["slope", "intercept", "ci_low", "ci_high"])

_BOOTSTRAP_RESAMPLES = 1000


# ---------------------------------------------------------------------------
# configuration


def _default_thresholds() -> tuple[float, ...]:
    return tuple(np.logspace(2.0, 5.0, 10))


@dataclass
class StudyConfig:
    """Resolved study parameters; every field is echoed into the outputs."""

    space: str = "circle"
    law: str = "wn:sigma=0.7"
    intensity: float = 1.0
    time: float = 1.0
    variant: str = "real-log"
    delta: float = 1.0
    noise_tau: float = 0.0
    observation_noise_tau: float | None = None
    s: float = 2.0
    scale: float = 1.0
    m_grid: tuple[int, ...] = (100, 1000, 10000)
    replicates: int = 30
    seed: int = 0
    mode: str = "iid"
    index: str | None = None
    thresholds: tuple[float, ...] = field(default_factory=_default_thresholds)
    threads: int = 1
    emit_coefficients: bool = False
    emit_svg: bool = False
    out: str | None = None

    def __post_init__(self):
        self.m_grid = tuple(int(v) for v in self.m_grid)
        self.thresholds = tuple(float(v) for v in self.thresholds)
        if any(b <= a for a, b in zip(self.m_grid, self.m_grid[1:])):
            raise ValueError("m_grid must be strictly increasing")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        Mode(self.mode)
        Variant(self.variant)

    # -- resolution helpers ---------------------------------------------------

    def space_object(self) -> Space:
        return parse_space(self.space)

    def law_object(self):
        return parse_law(self.law, self.space_object())

    def estimator_config(self) -> EstimatorConfig:
        return EstimatorConfig(
            variant=Variant(self.variant),
            delta=self.delta,
            intensity=self.intensity,
            time=self.time,
            noise_tau=self.noise_tau,
        )

    def data_noise_tau(self) -> float:
        if self.observation_noise_tau is not None:
            return self.observation_noise_tau
        if Variant(self.variant) is Variant.NOISE_CORRECTED:
            return self.noise_tau
        return 0.0

    # -- INI round trip ---------------------------------------------------------

    _LIST_FIELDS = ("m_grid", "thresholds")
    _OPTIONAL_FIELDS = ("observation_noise_tau", "index", "out")

    @classmethod
    def from_ini(cls, path, **overrides) -> "StudyConfig":
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ValueError(f"config file not found: {path}")
        if not parser.has_section("study"):
            raise ValueError(f"{path}: missing [study] section")
        values: dict = {}
        fields = {f.name: f for f in dataclasses.fields(cls)}
        for key, raw in parser.items("study"):
            if key not in fields:
                raise ValueError(f"{path}: unknown study key {key!r}")
            values[key] = _parse_field(key, raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_ini_text(self) -> str:
        lines = ["[study]"]
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name in self._LIST_FIELDS:
                value = ",".join(repr(v) if isinstance(v, float) else str(v)
                                 for v in value)
            elif isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


def _parse_field(key: str, raw: str):
    raw = raw.strip()
    if key in ("m_grid",):
        return tuple(int(v) for v in raw.split(","))
    if key in ("thresholds",):
        return tuple(float(v) for v in raw.split(","))
    if key in ("replicates", "seed", "threads"):
        return int(raw)
    if key in ("intensity", "time", "delta", "noise_tau", "s", "scale"):
        return float(raw)
    if key in ("observation_noise_tau",):
        return None if raw.lower() in ("", "none") else float(raw)
    if key in ("emit_coefficients", "emit_svg"):
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"bad boolean for {key}: {raw!r}")
    return raw


@dataclass
class StudyResult:
    kind: str
    config: StudyConfig
    rows: list
    fit: FitResult | None
    reference: float | None
    band: float | None = None
    passed: bool | None = None
    secondary_fit: FitResult | None = None
    secondary_reference: float | None = None
    notes: tuple = ()
    coefficient_tables: dict = field(default_factory=dict)

    def apply_band(self, band: float) -> "StudyResult":
        """Mark pass/fail of the fitted slope(s) against reference +- band."""
        self.band = band
        ok = True
        if self.fit is None or self.reference is None:
            ok = False
        else:
            ok = abs(self.fit.slope - self.reference) <= band
        if self.secondary_fit is not None and self.secondary_reference is not None:
            ok = ok and abs(self.secondary_fit.slope - self.secondary_reference) <= band
        self.passed = bool(ok)
        return self


# ---------------------------------------------------------------------------
# rate fitting


def fit_rate(points, replicate_errors=None, resamples: int = _BOOTSTRAP_RESAMPLES,
             seed: int = 0) -> FitResult:
    """OLS slope/intercept through (log m, log err) points with a bootstrap CI.

    With replicate_errors (one array of per-replicate errors per point) the
    bootstrap resamples replicates within each point; otherwise it resamples
    the points themselves.
    """
    points = [(float(x), float(y)) for x, y in points]
    if len(points) < 3:
        raise ValueError("rate fits need at least 3 points")
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    if np.ptp(xs) <= 0:
        raise ValueError("degenerate abscissae: all log-m values equal")
    slope, intercept = np.polyfit(xs, ys, 1)

    rng = np.random.default_rng(seed)
    slopes = np.empty(resamples)
    if replicate_errors is not None:
        errors = [np.asarray(e, dtype=float) for e in replicate_errors]
        if len(errors) != len(points):
            raise ValueError("one replicate-error array per point is required")
        for b in range(resamples):
            yb = np.empty(len(errors))
            for i, errs in enumerate(errors):
                take = errs[rng.integers(0, errs.size, errs.size)]
                mean = take.mean()
                yb[i] = math.log10(mean) if mean > 0 else ys[i]
            slopes[b] = np.polyfit(xs, yb, 1)[0]
    else:
        n = len(points)
        for b in range(resamples):
            while True:
                pick = rng.integers(0, n, n)
                if np.ptp(xs[pick]) > 0:
                    break
            slopes[b] = np.polyfit(xs[pick], ys[pick], 1)[0]
    lo, hi = np.percentile(slopes, [2.5, 97.5])
    return FitResult(float(slope), float(intercept), float(lo), float(hi))


# ---------------------------------------------------------------------------
# study runners


def _density_chunk(args):
    (law, est_cfg, s, scale, mode, obs_tau, m, seed, rep_lo, rep_hi, truth) = args
    spec = SobolevSpec(s)
    out = []
    for rep in range(rep_lo, rep_hi):
        config = ProcessConfig(
            law=law,
            intensity=est_cfg.intensity,
            time=est_cfg.time,
            mode=mode,
            noise_tau=obs_tau,
            seed=replicate_seed(seed, m, rep),
        )
        obs = sample_compound(config, m)
        est = reconstruct(obs, est_cfg, spec, scale)
        err = l2_error(est, truth)
        out.append((err.variance_term, err.bias_term, err.total,
                    est.coeffs if rep == 0 else None))
    return out


def _chunk_ranges(total: int, chunks: int):
    size = math.ceil(total / chunks)
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def run_convergence_study(cfg: StudyConfig) -> StudyResult:
    """Density-estimation error vs m, with the exact bias/variance split."""
    if len(cfg.m_grid) < 3:
        raise ValueError("m_grid needs at least 3 values for a rate fit")
    space = cfg.space_object()
    law = cfg.law_object()
    est_cfg = cfg.estimator_config()
    if est_cfg.variant in (Variant.REAL_LOG, Variant.REAL_LOG_UNTRUNCATED) \
            and not law.inverse_invariant:
        raise ValueError("real-log variants require an inverse-invariant law")
    mode = Mode(cfg.mode)
    obs_tau = cfg.data_noise_tau()

    t_max = smoothing_cutoff(max(cfg.m_grid), cfg.s, space, cfg.scale)
    truth, tail_bound = truth_table(law, t_max)
    notes = [f"truth tail bound beyond coverage: {tail_bound!r}"]
    try:
        snorm = sobolev_norm(truth, space, cfg.s)
    except ValueError as exc:
        snorm = None
        notes.append(f"sobolev norm unavailable: {exc}")

    rows = []
    rep_totals = []
    tables = {}
    for m in cfg.m_grid:
        cutoff = smoothing_cutoff(m, cfg.s, space, cfg.scale)
        jobs = [(law, est_cfg, cfg.s, cfg.scale, mode, obs_tau, m, cfg.seed,
                 lo, hi, truth)
                for lo, hi in _chunk_ranges(cfg.replicates, cfg.threads)]
        if cfg.threads > 1:
            with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
                chunks = list(pool.map(_density_chunk, jobs))
        else:
            chunks = [_density_chunk(job) for job in jobs]
        triples = [t for chunk in chunks for t in chunk]
        variances = np.array([t[0] for t in triples])
        biases = np.array([t[1] for t in triples])
        totals = np.array([t[2] for t in triples])
        if cfg.emit_coefficients and triples[0][3] is not None:
            tables[m] = triples[0][3]
        bias_term = float(biases.mean())
        bias_ok = None
        if snorm is not None:
            bias_ok = bool(bias_term <= cutoff ** (-cfg.s) * snorm**2)
        variance_term = float(variances.mean())
        rows.append({
            "m": m,
            "cutoff": cutoff,
            # the emitted total is the exact sum of the emitted components
            "mean_error": variance_term + bias_term,
            "variance_term": variance_term,
            "bias_term": bias_term,
            "stderr": float(totals.std(ddof=1) / math.sqrt(len(totals)))
            if len(totals) > 1 else float("nan"),
            "bias_bound_ok": bias_ok,
        })
        rep_totals.append(totals)

    fit = fit_rate([(math.log10(r["m"]), math.log10(r["mean_error"])) for r in rows],
                   replicate_errors=rep_totals, seed=cfg.seed)
    reference = -2.0 * cfg.s / (2.0 * cfg.s + space.dim)
    return StudyResult(kind="density", config=cfg, rows=rows, fit=fit,
                       reference=reference, notes=tuple(notes),
                       coefficient_tables=tables)


def _resolve_index(cfg: StudyConfig, space: Space):
    if cfg.index is not None:
        label = tuple(int(v) for v in str(cfg.index).split(";"))
        return make_index(space, label)
    for ix in spectrum(space, 4.0 * space.dim + 1.0):
        if not ix.is_trivial:
            return ix
    raise ValueError("no nontrivial index found")  # unreachable


def run_coefficient_study(cfg: StudyConfig) -> StudyResult:
    """Per-index coefficient MSE vs m (reference slope -1)."""
    if len(cfg.m_grid) < 3:
        raise ValueError("m_grid needs at least 3 values for a rate fit")
    space = cfg.space_object()
    law = cfg.law_object()
    est_cfg = cfg.estimator_config()
    index = _resolve_index(cfg, space)
    obs_tau = cfg.data_noise_tau()

    rows = []
    rep_errors = []
    for m in cfg.m_grid:
        ranges = _chunk_ranges(cfg.replicates, cfg.threads)
        jobs = [(law, est_cfg, index, m, hi - lo, cfg.seed, obs_tau, lo)
                for lo, hi in ranges]
        if cfg.threads > 1:
            with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
                parts = list(pool.map(_coefficient_chunk, jobs))
        else:
            parts = [_coefficient_chunk(job) for job in jobs]
        errs = np.concatenate(parts)
        mse = float(errs.mean())
        if len(errs) > 1:
            loo = (errs.sum() - errs) / (len(errs) - 1)
            stderr = math.sqrt((len(errs) - 1) / len(errs)
                               * float(((loo - loo.mean()) ** 2).sum()))
        else:
            stderr = float("nan")
        rows.append({"m": m, "mse": mse, "stderr": stderr})
        rep_errors.append(errs)

    notes = []
    if index.is_trivial or all(r["mse"] == 0.0 for r in rows):
        fit = None
        notes.append("all-zero errors (trivial index); rate fit skipped")
    else:
        fit = fit_rate([(math.log10(r["m"]), math.log10(r["mse"])) for r in rows],
                       replicate_errors=rep_errors, seed=cfg.seed)
    return StudyResult(kind="coefficient", config=cfg, rows=rows, fit=fit,
                       reference=-1.0, notes=tuple(notes))


def _coefficient_chunk(args):
    law, est_cfg, index, m, count, seed, obs_tau, first = args
    if count <= 0:
        return np.zeros(0)
    return coefficient_errors(law, est_cfg, index, m, count, seed,
                              observation_noise_tau=obs_tau,
                              first_replicate=first)


def run_census(space_spec: str, thresholds=None, seed: int = 0) -> StudyResult:
    """Spectral counting: spherical and multiplicity-weighted counts vs T,
    with fitted growth exponents (references r/2 and d/2)."""
    space = parse_space(space_spec)
    cfg = StudyConfig(space=space_spec, seed=seed,
                      **({"thresholds": tuple(thresholds)} if thresholds is not None else {}))
    ts = np.array(cfg.thresholds, dtype=float)
    if np.any(np.diff(ts) <= 0):
        raise ValueError("thresholds must be strictly increasing")
    if ts[-1] / ts[0] < 100.0:
        raise ValueError("census threshold grid must span at least two decades")
    counts = weyl_census(space, ts)
    rows = [{"threshold": float(t), "count_spherical": cs, "count_weighted": cw}
            for t, (cs, cw) in zip(ts, counts)]
    log_t = [math.log10(r["threshold"]) for r in rows]
    fit_sph = fit_rate(list(zip(log_t, [math.log10(r["count_spherical"]) for r in rows])),
                       seed=seed)
    fit_wt = fit_rate(list(zip(log_t, [math.log10(r["count_weighted"]) for r in rows])),
                      seed=seed + 1)
    return StudyResult(kind="census", config=cfg, rows=rows,
                       fit=fit_sph, reference=space.rank / 2.0,
                       secondary_fit=fit_wt, secondary_reference=space.dim / 2.0)


# ---------------------------------------------------------------------------
# output emission


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[k]) for k in header))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _fit_payload(fit: FitResult | None, reference) -> dict:
    if fit is None:
        return {"slope": None, "intercept": None, "ci": None, "reference": reference}
    return {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "ci": [fit.ci_low, fit.ci_high],
        "reference": reference,
    }


def write_study_outputs(result: StudyResult, outdir) -> dict:
    """Emit study.cfg, results/census CSV, plotdata.csv, fit.json (and the
    optional per-m coefficient CSVs and SVG chart).  Deterministic bytes."""
    os.makedirs(outdir, exist_ok=True)
    paths = {}

    cfg_path = os.path.join(outdir, "study.cfg")
    with open(cfg_path, "w") as fh:
        fh.write(result.config.to_ini_text())
    paths["config"] = cfg_path

    if result.kind == "census":
        table_path = os.path.join(outdir, "census.csv")
        _write_csv(table_path, ["threshold", "count_spherical", "count_weighted"],
                   result.rows)
        paths["table"] = table_path
        xs = [math.log10(r["threshold"]) for r in result.rows]
        series = [("spherical", xs, [math.log10(r["count_spherical"]) for r in result.rows]),
                  ("weighted", xs, [math.log10(r["count_weighted"]) for r in result.rows])]
    else:
        table_path = os.path.join(outdir, "results.csv")
        if result.kind == "density":
            header = ["m", "cutoff", "mean_error", "variance_term", "bias_term",
                      "stderr", "bias_bound_ok"]
        else:
            header = ["m", "mse", "stderr"]
        _write_csv(table_path, header, result.rows)
        paths["table"] = table_path
        key = "mean_error" if result.kind == "density" else "mse"
        xs = [math.log10(r["m"]) for r in result.rows]
        series = [("measured", xs, [math.log10(max(r[key], 1e-300)) for r in result.rows])]

    plot_rows = []
    x0 = series[0][1][0]
    y0 = series[0][2][0]
    for name, xs, ys in series:
        for x, y in zip(xs, ys):
            row = {"series": name, "log10_x": x, "log10_y": y,
                   "log10_fit": None, "log10_reference": None}
            if result.fit is not None and name == series[0][0]:
                row["log10_fit"] = result.fit.intercept + result.fit.slope * x
                if result.reference is not None:
                    row["log10_reference"] = y0 + result.reference * (x - x0)
            plot_rows.append(row)
    plot_path = os.path.join(outdir, "plotdata.csv")
    _write_csv(plot_path, ["series", "log10_x", "log10_y", "log10_fit",
                           "log10_reference"], plot_rows)
    paths["plotdata"] = plot_path

    payload = {
        "kind": result.kind,
        "fit": _fit_payload(result.fit, result.reference),
        "band": result.band,
        "passed": result.passed,
        "notes": list(result.notes),
    }
    if result.secondary_fit is not None:
        payload["weighted_fit"] = _fit_payload(result.secondary_fit,
                                               result.secondary_reference)
    fit_path = os.path.join(outdir, "fit.json")
    with open(fit_path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    paths["fit"] = fit_path

    for m, table in sorted(result.coefficient_tables.items()):
        cpath = os.path.join(outdir, f"coefficients_m{m}.csv")
        table.to_csv(cpath)
        paths[f"coefficients_m{m}"] = cpath

    if result.config.emit_svg:
        svg_path = os.path.join(outdir, "chart.svg")
        _write_svg(result, series, svg_path)
        paths["svg"] = svg_path
    return paths


def _write_svg(result: StudyResult, series, path) -> None:
    """Minimal hand-rolled log-log chart: measured points, fitted line,
    reference-slope line."""
    width, height, margin = 640, 480, 60
    xs = [x for _, sx, _ in series for x in sx]
    ys = [y for _, _, sy in series for y in sy]
    lines = []
    if result.fit is not None:
        lines.append(("fit", [(x, result.fit.intercept + result.fit.slope * x)
                              for x in (min(xs), max(xs))]))
        if result.reference is not None:
            x0, y0 = series[0][1][0], series[0][2][0]
            lines.append(("reference", [(x, y0 + result.reference * (x - x0))
                                        for x in (min(xs), max(xs))]))
        ys = ys + [y for _, pts in lines for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def to_px(x, y):
        px = margin + (x - x_lo) / x_span * (width - 2 * margin)
        py = height - margin - (y - y_lo) / y_span * (height - 2 * margin)
        return f"{px:.2f},{py:.2f}"

    colors = {"measured": "#1f6fb2", "spherical": "#1f6fb2", "weighted": "#b2541f",
              "fit": "#333333", "reference": "#999999"}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
    ]
    for name, sx, sy in series:
        pts = " ".join(to_px(x, y) for x, y in zip(sx, sy))
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{colors.get(name, "#1f6fb2")}" stroke-width="2"/>')
        for x, y in zip(sx, sy):
            cx, cy = to_px(x, y).split(",")
            parts.append(f'<circle cx="{cx}" cy="{cy}" r="3" '
                         f'fill="{colors.get(name, "#1f6fb2")}"/>')
    for name, pts in lines:
        seg = " ".join(to_px(x, y) for x, y in pts)
        dash = ' stroke-dasharray="6,4"' if name == "reference" else ""
        parts.append(f'<polyline points="{seg}" fill="none" '
                     f'stroke="{colors[name]}" stroke-width="1.5"{dash}/>')
    label = f"slope {result.fit.slope:.4f}" if result.fit is not None else "no fit"
    if result.reference is not None:
        label += f" (reference {result.reference:.4f})"
    parts.append(f'<text x="{margin}" y="{margin - 16}" font-family="monospace" '
                 f'font-size="14">{result.kind} study: {label}</text>')
    parts.append(f'<text x="{width // 2 - 40}" y="{height - 16}" '
                 f'font-family="monospace" font-size="12">log10 x</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
