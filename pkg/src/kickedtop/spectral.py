"""Consecutive-spacing ratio statistics for quasienergy spectra.

The ratio r_n = min(s_n/s_{n-1}, s_{n-1}/s_n) of neighbouring spacings needs
no unfolding and lands at 2 ln 2 - 1 ~ 0.386 for Poissonian spectra and
~0.527 for the circular orthogonal ensemble. The rescaled mean maps that
range onto [0, 1].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

R_POISSON = 2.0 * math.log(2.0) - 1.0
R_COE = 0.5269
DEGENERACY_TOL = 1e-14


def merge_degenerate(nu: np.ndarray, tol: float = DEGENERACY_TOL) -> np.ndarray:
    """Drop eigenphases closer than tol to their predecessor, with a warning."""
    nu = np.asarray(nu, dtype=float)
    keep = np.concatenate([[True], np.diff(nu) >= tol])
    dropped = int(np.size(keep) - np.count_nonzero(keep))
    if dropped:
        logger.warning("merged %d numerically degenerate eigenphases", dropped)
    return nu[keep]


def spacings(nu: np.ndarray, include_wrap: bool = True) -> np.ndarray:
    """Consecutive differences of sorted eigenphases.

    Eigenphases live on a circle, so by default the wrap-around spacing
    2 pi - (max - min) is appended last and the spacings sum to 2 pi.
    Raises on eigenphases closer than DEGENERACY_TOL; merge first if wanted.
    """
    nu = np.asarray(nu, dtype=float)
    if nu.ndim != 1 or nu.size < 3:
        raise ValueError("need at least 3 sorted eigenphases")
    if np.any(np.diff(nu) < 0):
        raise ValueError("eigenphases must be sorted ascending")
    s = np.diff(nu)
    if np.any(s < DEGENERACY_TOL):
        raise ValueError(
            "degenerate eigenphases (gap < 1e-14); merge_degenerate() first"
        )
    if include_wrap:
        s = np.concatenate([s, [2.0 * np.pi - (nu[-1] - nu[0])]])
    return s


def spacing_ratios(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("spacings must be positive")
    q = s[1:] / s[:-1]
    return np.minimum(q, 1.0 / q)


@dataclass(frozen=True)
class RatioSummary:
    mean_r: float
    rescaled: float
    n_levels: int
    r_poisson: float = R_POISSON
    r_coe: float = R_COE


def rescale_mean(mean_r: float, r_coe: float = R_COE) -> float:
    return abs(mean_r - R_POISSON) / (r_coe - R_POISSON)


def rescaled_mean_ratio(
    nu: np.ndarray, include_wrap: bool = True, r_coe: float = R_COE
) -> RatioSummary:
    """Mean spacing ratio of a spectrum and its rescaled value.

    Degenerate eigenphases are merged (logged) before taking spacings.
    Values slightly above 1 are reported as-is, never clipped.
    """
    return pooled_mean_ratio([nu], include_wrap=include_wrap, r_coe=r_coe)


def pooled_mean_ratio(
    sector_nus: list[np.ndarray] | tuple[np.ndarray, ...],
    include_wrap: bool = True,
    r_coe: float = R_COE,
) -> RatioSummary:
    """Mean ratio over one or more independent spectra (symmetry sectors).

    Ratios are formed within each sector (spacings never straddle sectors)
    and pooled for the mean; n_levels counts all sectors together.
    """
    ratios = []
    total = 0
    for nu in sector_nus:
        nu = merge_degenerate(np.asarray(nu, dtype=float))
        if nu.size < 10:
            raise ValueError("need at least 10 levels per sector for a mean ratio")
        total += int(nu.size)
        ratios.append(spacing_ratios(spacings(nu, include_wrap=include_wrap)))
    mean_r = float(np.mean(np.concatenate(ratios)))
    return RatioSummary(mean_r, rescale_mean(mean_r, r_coe), total, R_POISSON, r_coe)
