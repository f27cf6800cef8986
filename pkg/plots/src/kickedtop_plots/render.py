"""Render kicked-top CSV outputs into the five standard figures.

Figure 1: Poincare scatter panels over a Lyapunov heatmap row, one column
per kicking strength. Figure 2: KS entropy and rescaled mean spacing ratio
versus kicking strength. Figure 3: P(M) histogram, a Poincare panel, and
Husimi heatmaps of selected eigenstates. Figure 4: log-log mixed-fraction
decay with fitted power laws (the exponent is re-fit here from the CSV, so
the annotation always matches the data shipped with the figure). Figure 5:
decay exponent versus window position.

Rendering is read-only, deterministic (fixed SVG hash salt, no timestamp
metadata) and fails cleanly on schema mismatches.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "kickedtop-plots"
matplotlib.rcParams["svg.fonttype"] = "none"  # keep annotations greppable in SVG

FORMATS = ("png", "svg", "pdf")


class PlotInputError(ValueError):
    """Missing file, empty input, or a CSV whose schema does not match."""


@dataclass(frozen=True)
class FigureSpec:
    figure: int
    in_dir: Path
    out_path: Path
    fmt: str = "png"
    colormap: str = "magma"
    dpi: int = 150
    theta_downward: bool = True  # phase-space portraits with theta increasing down
    styling: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.figure not in (1, 2, 3, 4, 5):
            raise PlotInputError(f"unknown figure {self.figure}; expected 1..5")
        if self.fmt not in FORMATS:
            raise PlotInputError(f"unknown format {self.fmt!r}; expected {FORMATS}")


def load_columns(path: Path, *names: str) -> dict[str, np.ndarray]:
    """Read the named columns of a CSV as float arrays; '' becomes NaN."""
    if not path.exists():
        raise PlotInputError(f"{path}: no such input file")
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise PlotInputError(f"{path}: empty input")
    header = lines[0].split(",")
    for name in names:
        if name not in header:
            raise PlotInputError(f"{path}: missing column {name!r} (has {header})")
    if len(lines) == 1:
        raise PlotInputError(f"{path}: no data rows")
    idx = {name: header.index(name) for name in names}
    cols: dict[str, list[float]] = {name: [] for name in names}
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise PlotInputError(f"{path}: ragged row {ln!r}")
        for name in names:
            raw = parts[idx[name]]
            cols[name].append(float(raw) if raw != "" else np.nan)
    return {name: np.array(vals) for name, vals in cols.items()}


def _gamma_of(path: Path, stem_prefix: str) -> float:
    m = re.fullmatch(rf"{stem_prefix}_g(.+)", path.stem)
    if not m:
        raise PlotInputError(f"{path}: cannot parse gamma from filename")
    return float(m.group(1))


def _glob_by_gamma(in_dir: Path, pattern: str, stem_prefix: str) -> list[tuple[float, Path]]:
    pairs = [(_gamma_of(p, stem_prefix), p) for p in in_dir.glob(pattern)]
    if not pairs:
        raise PlotInputError(f"{in_dir}: no files matching {pattern}")
    return sorted(pairs)


def _heatmap(ax, cols: dict[str, np.ndarray], value_key: str, spec: FigureSpec) -> None:
    i = cols["i"].astype(int)
    j = cols["j"].astype(int)
    field2d = np.full((i.max() + 1, j.max() + 1), np.nan)
    field2d[i, j] = cols[value_key]
    phi = np.full(i.max() + 1, np.nan)
    theta = np.full(j.max() + 1, np.nan)
    phi[i] = cols["phi"]
    theta[j] = cols["theta"]
    ax.pcolormesh(phi, theta, field2d.T, cmap=spec.colormap, shading="nearest")
    ax.set_xlabel(r"$\phi$")
    ax.set_ylabel(r"$\theta$")
    if spec.theta_downward:
        ax.invert_yaxis()


def _poincare_panel(ax, path: Path, spec: FigureSpec, gamma: float | None = None) -> None:
    cols = load_columns(path, "orbit_id", "kick", "phi", "theta")
    ax.scatter(cols["phi"], cols["theta"], s=0.2, c="k", linewidths=0, rasterized=True)
    ax.set_xlim(-np.pi, np.pi)
    ax.set_ylim(0, np.pi)
    ax.set_xlabel(r"$\phi$")
    ax.set_ylabel(r"$\theta$")
    if spec.theta_downward:
        ax.invert_yaxis()
    if gamma is not None:
        ax.set_title(rf"$\gamma={gamma:g}$")


def fit_power_law(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least squares in log-log space; returns (zeta, amplitude, r_squared)."""
    good = y > 0
    if good.sum() < 3:
        raise PlotInputError("need at least 3 positive points for a power-law fit")
    lx, ly = np.log(x[good]), np.log(y[good])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(-slope), float(np.exp(intercept)), r2


def _render_fig1(spec: FigureSpec) -> plt.Figure:
    sections = _glob_by_gamma(spec.in_dir, "poincare_g*.csv", "poincare")
    grids = dict(_glob_by_gamma(spec.in_dir, "lyapunov_grid_g*.csv", "lyapunov_grid"))
    n = len(sections)
    fig, axes = plt.subplots(2, n, figsize=(3.2 * n, 6.0), squeeze=False)
    for col, (gamma, path) in enumerate(sections):
        _poincare_panel(axes[0][col], path, spec, gamma)
        if gamma not in grids:
            raise PlotInputError(f"{spec.in_dir}: no Lyapunov grid for gamma={gamma:g}")
        cols = load_columns(grids[gamma], "i", "j", "phi", "theta", "lambda")
        _heatmap(axes[1][col], cols, "lambda", spec)
    return fig


def _render_fig2(spec: FigureSpec) -> plt.Figure:
    ks = load_columns(spec.in_dir / "ks_entropy.csv", "gamma", "S_KS")
    rs = load_columns(spec.in_dir / "rstat.csv", "gamma", "rescaled")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax1.plot(ks["gamma"], ks["S_KS"], "o-", ms=4)
    ax1.set_xlabel(r"$\gamma$")
    ax1.set_ylabel(r"$S_{KS}$")
    order = np.argsort(rs["gamma"])
    ax2.plot(rs["gamma"][order], rs["rescaled"][order], "s-", ms=4)
    ax2.axhline(1.0, color="r", ls="--", lw=0.8)
    ax2.axhline(0.0, color="r", ls="--", lw=0.8)
    ax2.set_xlabel(r"$\gamma$")
    ax2.set_ylabel(r"$\widetilde{\langle r\rangle}$")
    return fig


def _render_fig3(spec: FigureSpec) -> plt.Figure:
    hists = sorted(spec.in_dir.glob("pm_hist_ens*_g*.csv"))
    if not hists:
        raise PlotInputError(f"{spec.in_dir}: no pm_hist CSV found")
    husimis = sorted(
        spec.in_dir.glob("husimi_j*_g*_n*.csv"),
        key=lambda p: int(p.stem.rsplit("_n", 1)[1]),
    )[:4]
    sections = _glob_by_gamma(spec.in_dir, "poincare_g*.csv", "poincare")
    n_bottom = max(len(husimis), 2)
    fig = plt.figure(figsize=(3.0 * n_bottom, 6.2))
    gs = fig.add_gridspec(2, n_bottom)
    ax_hist = fig.add_subplot(gs[0, 0])
    hist = load_columns(hists[0], "bin_center", "P")
    width = hist["bin_center"][1] - hist["bin_center"][0] if len(hist["bin_center"]) > 1 else 0.05
    ax_hist.bar(hist["bin_center"], hist["P"], width=0.9 * width, color="tab:blue")
    ax_hist.set_xlabel(r"$M$")
    ax_hist.set_ylabel(r"$P(M)$")
    ax_poinc = fig.add_subplot(gs[0, 1])
    _poincare_panel(ax_poinc, sections[0][1], spec, sections[0][0])
    for k, path in enumerate(husimis):
        ax = fig.add_subplot(gs[1, k])
        cols = load_columns(path, "i", "j", "phi", "theta", "Q")
        _heatmap(ax, cols, "Q", spec)
        ax.set_title(path.stem.rsplit("_", 1)[1])
    return fig


def _render_fig4(spec: FigureSpec) -> tuple[plt.Figure, list[str]]:
    pairs = _glob_by_gamma(spec.in_dir, "fmix_g*.csv", "fmix")
    fig, axes = plt.subplots(1, len(pairs), figsize=(4.6 * len(pairs), 3.6), squeeze=False)
    annotations: list[str] = []
    for ax, (gamma, path) in zip(axes[0], pairs):
        cols = load_columns(path, "mean_j", "interval_lo", "interval_hi", "f_mix")
        intervals = sorted(set(zip(cols["interval_lo"], cols["interval_hi"])))
        for lo, hi in intervals:
            sel = (cols["interval_lo"] == lo) & (cols["interval_hi"] == hi)
            x, y = cols["mean_j"][sel], cols["f_mix"][sel]
            order = np.argsort(x)
            x, y = x[order], y[order]
            marks = ax.loglog(x, y, "o", ms=5, label=rf"$M\in[{lo:g},{hi:g}]$")
            try:
                zeta, amp, _ = fit_power_law(x, y)
            except PlotInputError:
                continue
            label = f"zeta={zeta:.4f}"
            annotations.append(label)
            xs = np.linspace(x.min(), x.max(), 50)
            ax.loglog(xs, amp * xs**-zeta, "--", color=marks[0].get_color(), lw=1.1)
            ax.annotate(
                label,
                (xs[len(xs) // 2], amp * xs[len(xs) // 2] ** -zeta),
                textcoords="offset points",
                xytext=(6, 6),
                fontsize=9,
                color=marks[0].get_color(),
            )
        ax.set_title(rf"$\gamma={gamma:g}$")
        ax.set_xlabel(r"$\langle j\rangle$")
        ax.set_ylabel(r"$f_{mix}$")
        ax.legend(fontsize=8)
    return fig, annotations


def _render_fig5(spec: FigureSpec) -> plt.Figure:
    pairs = _glob_by_gamma(spec.in_dir, "zeta_scan_g*.csv", "zeta_scan")
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for gamma, path in pairs:
        cols = load_columns(path, "M_start", "zeta")
        good = ~np.isnan(cols["zeta"])
        ax.plot(
            cols["M_start"][good], cols["zeta"][good], "o-", ms=4,
            label=rf"$\gamma={gamma:g}$",
        )
    ax.set_xlabel(r"$M$ (window start)")
    ax.set_ylabel(r"$\zeta$")
    ax.legend()
    return fig


def render(spec: FigureSpec) -> Path:
    """Render one figure to spec.out_path; returns the path written."""
    renderers = {
        1: _render_fig1,
        2: _render_fig2,
        3: _render_fig3,
        5: _render_fig5,
    }
    if spec.figure == 4:
        fig, _ = _render_fig4(spec)
    else:
        fig = renderers[spec.figure](spec)
    fig.tight_layout()
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if spec.fmt == "svg" else {}
    try:
        fig.savefig(out, format=spec.fmt, dpi=spec.dpi, metadata=metadata)
    finally:
        plt.close(fig)
    return out
