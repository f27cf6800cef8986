"""Spin coherent states, Husimi fields, and the phase-space overlap index.

A coherent state centered at (phi, theta) has Dicke coefficients
c_m = sqrt(binom(2j, j-m)) cos(theta/2)^(j+m) sin(theta/2)^(j-m) e^{i(j-m)phi},
evaluated in the log domain so large j never overflows. The Husimi value of an
eigenstate at a grid point is its squared overlap with that point's coherent
state; the overlap index M weighs the Husimi field by the chaotic/regular
labels of the classical grid, so M ~ -1 flags regular states, M ~ +1 chaotic
ones, and intermediate values the mixed states.

Because the coherent coefficients factor into a theta-only amplitude and an
e^{i m phi} phase, each theta row of the field over a uniform phi raster is a
zero-padded inverse DFT of amplitude-weighted eigenvector coefficients. The
row kernel below exploits that; everything downstream (normalization sums,
overlap indices, completeness sums, dumped fields) consumes its rows.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.special import gammaln

from .classical import ClassificationGrid, SphereAngles
from .floquet import SpinQuantum
from .grids import PhaseSpaceGrid

logger = logging.getLogger(__name__)

_ROW_CHUNK_BUDGET = 4_000_000  # complex entries per (dim x chunk) buffer


def _log_binom_half(spin: SpinQuantum) -> np.ndarray:
    m = spin.m_values()
    j = spin.j
    return 0.5 * (gammaln(2 * j + 1) - gammaln(j + m + 1) - gammaln(j - m + 1))


def _amplitude_rows(spin: SpinQuantum, theta: np.ndarray) -> np.ndarray:
    """Real coherent amplitudes a_m(theta), shape (len(theta), dim)."""
    m = spin.m_values()
    j = spin.j
    lb = _log_binom_half(spin)
    theta = np.asarray(theta, dtype=float)
    ct = np.cos(0.5 * theta)[:, None]
    st = np.sin(0.5 * theta)[:, None]
    up, dn = (j + m)[None, :], (j - m)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        # a zero exponent must beat log(0) = -inf (extremal m at the poles)
        la = lb[None, :]
        la = la + np.where(up == 0, 0.0, up * np.log(ct))
        la = la + np.where(dn == 0, 0.0, dn * np.log(st))
        amp = np.exp(la)
    amp = np.where(np.isnan(amp), 0.0, amp)
    # exact poles take the limit form: all weight on one extremal m
    amp[theta == 0.0] = 0.0
    amp[theta == 0.0, -1] = 1.0
    amp[theta == math.pi] = 0.0
    amp[theta == math.pi, 0] = 1.0
    return amp


def coherent_state(spin: SpinQuantum, angles: SphereAngles) -> np.ndarray:
    """Dicke-basis coefficients of |phi, theta>, normalized to unit norm."""
    amp = _amplitude_rows(spin, np.array([angles.theta]))[0]
    phase = np.exp(1j * (spin.j - spin.m_values()) * angles.phi)
    vec = amp * phase
    return vec / np.linalg.norm(vec)


@dataclass(frozen=True)
class CoherentFrame:
    """Coherent-state amplitudes factored over a phase-space grid.

    Stores the theta-row amplitude table instead of one vector per grid point;
    the phi dependence is a pure phase that the row kernel applies via FFT.
    closure_defect is the exact worst-case deviation of the discretized
    resolution of identity over this grid from 1 (diagonal in m, so it is the
    max over m of |quadrature(m) - 1|).
    """

    spin: SpinQuantum
    grid: PhaseSpaceGrid
    amplitudes: np.ndarray = field(repr=False)  # (n_theta, dim)
    closure_defect: float = 0.0


def build_coherent_frame(
    spin: SpinQuantum, grid: PhaseSpaceGrid, closure_tol: float | None = None
) -> CoherentFrame:
    """Build the frame and verify the discretized closure relation.

    The default tolerance tracks the measured quadrature floor of each cell
    layout: 1e-3 at 300x300 for the angle layout (error ~ j / n_theta^2),
    and ~0.4 (j / n_theta)^2 for the area layout, whose uniform-in-cos(theta)
    rows undersample the polar caps where the extremal-m amplitudes live.
    A frame failing the check raises ValueError.
    """
    amp = _amplitude_rows(spin, grid.theta)
    quad = (spin.dim / (4.0 * np.pi)) * grid.n_phi * (
        grid.cell_area[:, None] * amp**2
    ).sum(axis=0)
    defect = float(np.max(np.abs(quad - 1.0)))
    if closure_tol is None:
        if grid.geometry == "angle":
            closure_tol = 1e-3 * max(1.0, (300.0 / grid.n_theta) ** 2 * spin.j / 150.0)
        else:
            closure_tol = max(1e-3, 0.4 * (spin.j / grid.n_theta) ** 2)
    if defect > closure_tol:
        raise ValueError(
            f"coherent-frame closure defect {defect:.2e} exceeds {closure_tol:.2e} "
            f"(grid {grid.n_phi}x{grid.n_theta}, j={spin.j})"
        )
    return CoherentFrame(spin, grid, amp, defect)


@dataclass(frozen=True)
class HusimiField:
    """Husimi values of one eigenstate on a grid, shape (n_phi, n_theta)."""

    spin: SpinQuantum
    grid: PhaseSpaceGrid
    values: np.ndarray
    state_index: int | None = None


def iter_husimi_rows(
    frame: CoherentFrame, vectors: np.ndarray
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (theta_row_index, Q_row) with Q_row of shape (n_phi, n_states).

    vectors holds eigenstates as columns (dim, n_states). States are processed
    in one pass per theta row; rows stream in ascending theta order.
    """
    dim = frame.spin.dim
    n_phi = frame.grid.n_phi
    vectors = np.asarray(vectors, dtype=np.complex128)
    if vectors.ndim != 2 or vectors.shape[0] != dim:
        raise ValueError("vectors must have shape (2j+1, n_states)")
    twist = np.exp(1j * np.arange(dim) * frame.grid.phi[0])
    folds = int(np.ceil(dim / n_phi))
    padded = np.zeros((folds * n_phi, vectors.shape[1]), dtype=np.complex128)
    for r in range(frame.grid.n_theta):
        padded[:dim] = (frame.amplitudes[r] * twist)[:, None] * vectors
        g = padded.reshape(folds, n_phi, -1).sum(axis=0)
        f = np.fft.ifft(g, axis=0) * n_phi
        yield r, f.real**2 + f.imag**2


@dataclass
class HusimiReduction:
    norms: np.ndarray
    overlaps: np.ndarray | None = None
    completeness: np.ndarray | None = None
    fields: dict[int, np.ndarray] = field(default_factory=dict)


def husimi_reduce(
    frame: CoherentFrame,
    vectors: np.ndarray,
    labels: ClassificationGrid | None = None,
    keep_fields: Iterable[int] = (),
    want_completeness: bool = False,
) -> HusimiReduction:
    """One streaming pass over theta rows computing every requested reduction.

    norms holds the discretized normalization sum per state (should be ~1);
    overlaps the raw overlap index per state when labels are given;
    completeness the per-grid-point sum of Q over all passed states;
    fields the full (n_phi, n_theta) Husimi arrays of selected state columns.
    """
    vectors = np.asarray(vectors, dtype=np.complex128)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    n_states = vectors.shape[1]
    grid = frame.grid
    if labels is not None and not grid.compatible_with(labels.grid):
        raise ValueError("classification grid does not match the coherent frame grid")
    keep = sorted(set(keep_fields))
    if any(k < 0 or k >= n_states for k in keep):
        raise ValueError("keep_fields index out of range")
    pref = frame.spin.dim / (4.0 * np.pi)
    w = grid.cell_area
    out = HusimiReduction(norms=np.zeros(n_states))
    if labels is not None:
        out.overlaps = np.zeros(n_states)
    if want_completeness:
        out.completeness = np.zeros((grid.n_phi, grid.n_theta))
    for k in keep:
        out.fields[k] = np.empty((grid.n_phi, grid.n_theta))

    chunk = max(1, _ROW_CHUNK_BUDGET // frame.spin.dim)
    for lo in range(0, n_states, chunk):
        hi = min(lo + chunk, n_states)
        kept_here = [k for k in keep if lo <= k < hi]
        for r, q in iter_husimi_rows(frame, vectors[:, lo:hi]):
            out.norms[lo:hi] += pref * w[r] * q.sum(axis=0)
            if out.overlaps is not None:
                out.overlaps[lo:hi] += pref * w[r] * (
                    labels.c[:, r].astype(float)[:, None] * q
                ).sum(axis=0)
            if out.completeness is not None:
                out.completeness[:, r] += q.sum(axis=1)
            for k in kept_here:
                out.fields[k][:, r] = q[:, k - lo]
    return out


def husimi(state: np.ndarray, frame: CoherentFrame, state_index: int | None = None) -> HusimiField:
    """Husimi field of a single normalized state vector."""
    red = husimi_reduce(frame, state, keep_fields=(0,))
    return HusimiField(frame.spin, frame.grid, red.fields[0], state_index)


def husimi_norm(fld: HusimiField) -> float:
    """Discretized normalization sum; 1 up to the grid's quadrature error."""
    return float(
        fld.spin.dim / (4.0 * np.pi) * (fld.values * fld.grid.cell_area[None, :]).sum()
    )


def overlap_index(fld: HusimiField, labels: ClassificationGrid) -> float:
    """Raw overlap index of one Husimi field with the chaotic/regular labels."""
    if not fld.grid.compatible_with(labels.grid):
        raise ValueError("classification grid does not match the Husimi grid")
    return float(
        fld.spin.dim
        / (4.0 * np.pi)
        * (fld.values * labels.c * fld.grid.cell_area[None, :]).sum()
    )


# --- ensemble statistics ---


@dataclass(frozen=True)
class EnsembleOverlaps:
    """Pooled overlap indices of one system-size ensemble."""

    mean_j: float
    m_values: np.ndarray
    total_dim: int


@dataclass(frozen=True)
class PMHistogram:
    edges: np.ndarray
    density: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def masses(self) -> np.ndarray:
        return self.density * np.diff(self.edges)


def pm_histogram(
    m_values: np.ndarray, n_bins: int = 40, lo: float = -1.0, hi: float = 1.0
) -> PMHistogram:
    """Probability density of the overlap index, unit total mass.

    Values are clipped into [lo, hi] first (raw indices can exceed 1 by the
    normalization tolerance). Bins are inclusive-left, last bin closed.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    m = np.clip(np.asarray(m_values, dtype=float), lo, hi)
    density, edges = np.histogram(m, bins=n_bins, range=(lo, hi), density=True)
    return PMHistogram(edges, density)


def mixed_fraction(
    m_values: np.ndarray, total_dim: int, lo: float, hi: float
) -> float:
    """Count of indices in the closed interval [lo, hi] over the Hilbert dimension."""
    if not (-1.0 <= lo < hi <= 1.0):
        raise ValueError("need -1 <= lo < hi <= 1")
    m = np.asarray(m_values, dtype=float)
    return float(np.count_nonzero((m >= lo) & (m <= hi)) / total_dim)


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of y = amplitude * x^(-zeta) in log-log space."""

    zeta: float
    amplitude: float
    r_squared: float
    n_points: int


def power_law_fit(x: Sequence[float], y: Sequence[float]) -> PowerLawFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d and of equal length")
    good = y > 0
    if not np.all(good):
        logger.warning(
            "power_law_fit: excluding %d zero points (log-undefined)",
            int(np.count_nonzero(~good)),
        )
    x, y = x[good], y[good]
    if x.size < 3:
        raise ValueError("need at least 3 strictly positive points")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res < 1e-24 else 1.0 - ss_res / max(ss_tot, 1e-300)
    return PowerLawFit(float(-slope), float(np.exp(intercept)), r2, int(x.size))


@dataclass(frozen=True)
class ZetaPoint:
    m_start: float
    zeta: float | None
    r_squared: float | None


def zeta_window_count(window: float, step: float) -> int:
    return int(math.floor((2.0 - window) / step + 1e-9)) + 1


def zeta_scan(
    ensembles: Sequence[EnsembleOverlaps], window: float = 0.4, step: float = 0.1
) -> list[ZetaPoint]:
    """Slide an M window across [-1, 1 - window], fitting f_mix decay per window.

    Windows where any ensemble has zero mixed fraction get a null exponent
    (excluded from plots but still reported).
    """
    if not (0 < window <= 2.0) or step <= 0:
        raise ValueError("window must lie in (0, 2] and step be positive")
    points: list[ZetaPoint] = []
    for k in range(zeta_window_count(window, step)):
        lo = -1.0 + k * step
        hi = min(lo + window, 1.0)
        fr = np.array([mixed_fraction(e.m_values, e.total_dim, lo, hi) for e in ensembles])
        if np.any(fr == 0.0):
            points.append(ZetaPoint(lo, None, None))
            continue
        fit = power_law_fit([e.mean_j for e in ensembles], fr)
        points.append(ZetaPoint(lo, fit.zeta, fit.r_squared))
    return points
