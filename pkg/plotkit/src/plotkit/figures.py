"""Standard figures per experiment kind.

Figure kinds are keyed by experiment name so `render-all` needs no extra
configuration; unknown experiments fall back to an aggregate-metrics
chart.  All outputs are vector files (SVG/PDF) written without volatile
metadata, and inputs are never modified.
"""

from __future__ import annotations

import pathlib
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "plotkit"  # deterministic SVG ids
import matplotlib.pyplot as plt
import numpy as np

from .schema import ReportCSV, SchemaError, read_profile_curve, read_report_csv, read_report_json

_SAVE_KW = {"metadata": {"Date": None}}  # keep re-rendered bytes identical


@dataclass
class FigureSpec:
    inputs: list
    kind: str
    out: str
    xscale: str = "linear"
    yscale: str = "linear"
    extra: dict = field(default_factory=dict)


def _trial_series(ax, rep: ReportCSV, columns, yscale="log"):
    x = np.arange(len(rep.trials))
    for c in columns:
        vals = rep.column(c)
        ax.plot(x[: len(vals)], np.abs(vals), marker="o", lw=0.8, ms=3, label=c)
    ax.set_xlabel("trial")
    ax.set_yscale(yscale)
    ax.legend(fontsize=7)


def _metrics_bar(ax, metrics: dict):
    names = [k for k, v in metrics.items() if isinstance(v, (int, float)) and np.isfinite(v)]
    vals = np.abs([metrics[k] for k in names]).astype(float)
    pos = np.arange(len(names))
    ax.barh(pos, np.maximum(vals, 1e-300))
    ax.set_yticks(pos, names, fontsize=7)
    ax.set_xscale("log")
    ax.set_xlabel("|value|")


def _fig_conservation(spec, csv_rep, js, ax):
    _trial_series(ax, csv_rep, ["drift"])
    ax.axhline(1e-12, color="r", ls="--", lw=0.8, label="tolerance")
    ax.set_ylabel("relative energy drift")
    ax.legend(fontsize=7)


def _fig_dichotomy(spec, csv_rep, js, ax):
    vals = np.asarray(csv_rep.column("min_margin_rel"))
    ax.plot(np.arange(len(vals)), vals, "o", ms=3)
    ax.axhline(0.0, color="r", ls="--", lw=0.8)
    ax.set_xlabel("trial")
    ax.set_ylabel("channel margin / exterior size")


def _fig_ratio_hist(spec, csv_rep, js, ax):
    skip = ("invariance", "dilation", "brute")
    cols = [
        c
        for c in csv_rep.columns
        if not any(tag in c for tag in skip)
        and any(isinstance(row.get(c), float) for row in csv_rep.trials)
    ]
    if not cols:
        raise SchemaError(f"{csv_rep.path}: missing column 'ratio'")
    for c in cols:
        vals = [v for v in csv_rep.column(c) if v is not None]
        if vals:
            ax.hist(vals, bins=24, histtype="step", label=c)
    ax.set_xlabel("ratio")
    ax.set_ylabel("count")
    ax.legend(fontsize=6)


def _fig_stationary(spec, csv_rep, js, ax):
    # log-log tail: |r Z - ell| with the fitted slope, from the curve export
    curve_path = None
    for p in spec.inputs[1:]:
        if str(p).endswith(".csv"):
            curve_path = p
    if curve_path is None:
        cand = pathlib.Path(spec.inputs[0]).with_name("stationary_profile_curve.csv")
        curve_path = cand if cand.exists() else None
    if curve_path is None:
        _metrics_bar(ax, js["metrics"] if js else csv_rep.aggregate)
        return
    curve = read_profile_curve(curve_path)
    r, g = curve["r"], curve["g"]
    ell = js["config"].get("tolerances", {}).get("ell", 1.0) if js else 1.0
    sel = (r > 0) & (np.abs(g - ell) > 0)
    rr, dd = r[sel], np.abs(g - ell)[sel]
    upper = rr > np.quantile(rr, 0.6)
    ax.loglog(rr, dd, lw=0.8)
    slope, logc = np.polyfit(np.log(rr[upper]), np.log(dd[upper]), 1)
    ax.loglog(rr[upper], np.exp(logc) * rr[upper] ** slope, "r--", lw=0.8, label=f"slope {slope:.3f}")
    ax.set_xlabel("r")
    ax.set_ylabel("|r Z - ell|")
    ax.legend(fontsize=7)


def _fig_perturbation(spec, csv_rep, js, ax):
    size_cols = sorted(
        (c for c in csv_rep.columns if c.startswith("eps_")),
        key=lambda c: float(c.split("_", 1)[1]),
    )
    if not size_cols:
        raise SchemaError(f"{csv_rep.path}: missing column 'eps_*'")
    sizes = np.array([float(c.split("_", 1)[1]) for c in size_cols])
    for i, row in enumerate(csv_rep.trials):
        eps = np.array([row[c] for c in size_cols], dtype=float)
        label = f"cone {row.get('cone', '?')}"
        ax.loglog(sizes, eps, "o-", ms=3, lw=0.8, label=label)
        slope = np.polyfit(np.log(sizes), np.log(eps), 1)[0]
        ax.text(sizes[-1], eps[-1], f" slope {slope:.2f}", fontsize=7, va="center")
    ax.set_xlabel("perturbation size")
    ax.set_ylabel("exterior remainder size")
    ax.legend(fontsize=7)


def _fig_blowup(spec, csv_rep, js, ax):
    metrics = js["metrics"] if js else csv_rep.aggregate
    _metrics_bar(ax, metrics)


def _fig_channel_trials(spec, csv_rep, js, ax):
    cols = [c for c in ("inf_pos", "inf_neg", "eta") if c in csv_rep.columns]
    if not cols:
        raise SchemaError(f"{csv_rep.path}: missing column 'eta'")
    _trial_series(ax, csv_rep, cols)
    ax.set_ylabel("exterior channel energy")


def _fig_decoupling(spec, csv_rep, js, ax):
    metrics = js["metrics"] if js else csv_rep.aggregate
    keys = ["cross_slope", "cross_slope_rel_err", "delta_initial", "delta_final"]
    present = {k: metrics[k] for k in keys if k in metrics}
    if not present:
        raise SchemaError(f"{spec.inputs[0]}: missing column 'cross_slope'")
    _metrics_bar(ax, present)


def _fig_bessel(spec, csv_rep, js, ax):
    _trial_series(ax, csv_rep, [c for c in ("min_defect_rel", "max_pairing_rel") if c in csv_rep.columns])
    ax.set_ylabel("|defect| and pairing error")


KIND_RENDERERS = {
    "conservation": _fig_conservation,
    "dichotomy": _fig_dichotomy,
    "strichartz_scan": _fig_ratio_hist,
    "gv_scan": _fig_ratio_hist,
    "duhamel_strichartz": _fig_ratio_hist,
    "weak_type": _fig_ratio_hist,
    "small_data": _fig_blowup,
    "blowup_cone": _fig_blowup,
    "blowup_norm_divergence": _fig_blowup,
    "stationary_profile": _fig_stationary,
    "rl_scaling": _fig_blowup,
    "profile_decoupling": _fig_decoupling,
    "bessel": _fig_bessel,
    "exterior_profiles": _fig_blowup,
    "perturbation": _fig_perturbation,
    "bb1_channel": _fig_channel_trials,
    "scattering_extract": _fig_blowup,
}


def render(spec: FigureSpec) -> pathlib.Path:
    """Render one figure; returns the output path."""
    primary = pathlib.Path(spec.inputs[0])
    if not primary.exists():
        raise FileNotFoundError(f"input not found: {primary}")
    csv_rep = None
    js = None
    if primary.suffix == ".csv":
        csv_rep = read_report_csv(primary)
        sib = primary.with_suffix(".json")
        if sib.exists():
            js = read_report_json(sib)
    elif primary.suffix == ".json":
        js = read_report_json(primary)
        sib = primary.with_suffix(".csv")
        if sib.exists():
            csv_rep = read_report_csv(sib)
    else:
        raise SchemaError(f"{primary}: expected a .csv or .json report")
    if csv_rep is None:
        csv_rep = ReportCSV(str(primary), [], [], dict(js["metrics"]))

    renderer = KIND_RENDERERS.get(spec.kind, _fig_blowup)
    fig, ax = plt.subplots(figsize=(5.0, 3.4), dpi=100)
    try:
        renderer(spec, csv_rep, js, ax)
        if spec.xscale != "linear":
            ax.set_xscale(spec.xscale)
        if spec.yscale != "linear" and spec.kind not in KIND_RENDERERS:
            ax.set_yscale(spec.yscale)
        title = js["experiment"] if js else spec.kind
        ax.set_title(title, fontsize=9)
        out = pathlib.Path(spec.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, **_SAVE_KW)
    finally:
        plt.close(fig)
    return pathlib.Path(spec.out)


def render_all(directory, out_dir=None) -> list:
    """One standard figure per report found in `directory`."""
    directory = pathlib.Path(directory)
    out_dir = pathlib.Path(out_dir) if out_dir else directory / "figures"
    written = []
    reports = sorted(directory.glob("*.json"))
    if not reports:
        raise FileNotFoundError(f"no report JSON files in {directory}")
    for js_path in reports:
        try:
            js = read_report_json(js_path)
        except SchemaError:
            continue  # sidecar JSON (e.g. profile-curve metadata), not a report
        kind = js["experiment"]
        inputs = [str(js_path)]
        curve = js_path.with_name("stationary_profile_curve.csv")
        if kind == "stationary_profile" and curve.exists():
            inputs.append(str(curve))
        spec = FigureSpec(inputs=inputs, kind=kind, out=str(out_dir / f"{kind}.svg"))
        written.append(render(spec))
    return written
