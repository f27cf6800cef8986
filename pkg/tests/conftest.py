"""Shared fixtures: the heavy classical grids and ensemble overlap data are
computed once per session and reused by the acceptance criteria."""

import math

import numpy as np
import pytest

from kickedtop import (
    ClassificationGrid,
    KickParams,
    PhaseSpaceGrid,
    SpinQuantum,
    build_coherent_frame,
    build_floquet,
    classify_grid,
    diagonalize,
    husimi_reduce,
    lambda_cut_from_histogram,
    lyapunov_grid,
)

ALPHA = 11.0 * math.pi / 19.0
FULL_GRID = (300, 300)
FULL_KICKS = 10_000


@pytest.fixture(scope="session")
def classification_cache():
    """gamma -> ClassificationGrid at full production resolution, lazily computed."""
    cache: dict[float, ClassificationGrid] = {}

    def get(gamma: float) -> ClassificationGrid:
        if gamma not in cache:
            lgrid = lyapunov_grid(
                KickParams(ALPHA, gamma), *FULL_GRID, FULL_KICKS, geometry="angle"
            )
            cut, _ = lambda_cut_from_histogram(lgrid)
            cache[gamma] = classify_grid(lgrid, cut)
        return cache[gamma]

    return get


@pytest.fixture(scope="session")
def overlap_cache(classification_cache):
    """(gamma, j) -> (norms, raw overlap indices), lazily computed."""
    cache: dict[tuple[float, int], tuple[np.ndarray, np.ndarray]] = {}

    def get(gamma: float, j: int) -> tuple[np.ndarray, np.ndarray]:
        if (gamma, j) not in cache:
            labels = classification_cache(gamma)
            spin = SpinQuantum(j)
            spec = diagonalize(build_floquet(spin, KickParams(ALPHA, gamma)))
            frame = build_coherent_frame(spin, PhaseSpaceGrid(*FULL_GRID, "angle"))
            red = husimi_reduce(frame, spec.vectors, labels=labels)
            cache[(gamma, j)] = (red.norms, red.overlaps)
        return cache[(gamma, j)]

    return get


@pytest.fixture(scope="session")
def ensemble_overlaps(overlap_cache):
    """Pooled EnsembleOverlaps for symmetric [center-5, center+5] ensembles."""
    from kickedtop import EnsembleOverlaps

    def get(gamma: float, centers) -> list[EnsembleOverlaps]:
        out = []
        for c in centers:
            members = range(c - 5, c + 6)
            pooled = np.concatenate([overlap_cache(gamma, j)[1] for j in members])
            total = sum(2 * j + 1 for j in members)
            out.append(EnsembleOverlaps(float(c), pooled, total))
        return out

    return get
