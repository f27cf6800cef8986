"""Experiment drivers: sweeps, caching, CSV emission, figure presets.

Every driver walks a list of work units. A unit is keyed by what it computes
(e.g. "overlap:g2.6:j152"), hashed over the parameters that determine its
output, journalled in the run manifest, and skipped when already complete.
All files are written atomically and in full round-trip precision, so a
repeated run with the same config and seed reproduces byte-identical CSVs.
"""

from __future__ import annotations

import hashlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .classical import (
    DEFAULT_TANGENT,
    ClassificationGrid,
    KickParams,
    LyapunovGrid,
    benettin_many,
    classify_grid,
    ks_entropy,
    lambda_cut_from_histogram,
    lyapunov_grid,
    poincare_section,
)
from .config import ExperimentConfig
from .errors import ConfigError, NumericalError
from .floquet import (
    QuasiSpectrum,
    SpinQuantum,
    build_floquet,
    diagonalize,
    parity_sector_phases,
    save_eigenvectors,
)
from .grids import PhaseSpaceGrid
from .husimi import (
    EnsembleOverlaps,
    build_coherent_frame,
    husimi_reduce,
    mixed_fraction,
    pm_histogram,
    power_law_fit,
    zeta_scan,
)
from .runio import Manifest, read_csv, write_csv
from .spectral import pooled_mean_ratio, rescaled_mean_ratio

logger = logging.getLogger(__name__)


def gamma_tag(g: float) -> str:
    return f"{g:g}"


def _phash(*parts) -> str:
    return hashlib.sha256(repr(parts).encode()).hexdigest()[:16]


class Runner:
    """Shared unit-of-work bookkeeping for all drivers."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg.validate()
        self.out = Path(cfg.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = Manifest(self.out, __version__)

    def unit(
        self,
        key: str,
        param_hash: str,
        build: Callable[[list[Path]], dict | None],
    ) -> list[Path]:
        """Run one unit unless the manifest already has it; clean up on failure."""
        if self.manifest.is_complete(key, param_hash):
            logger.info("%s: up to date, skipping", key)
            return self.manifest.files_of(key)
        written: list[Path] = []
        t0 = time.perf_counter()
        try:
            extra = build(written) or {}
        except BaseException:
            for p in written:
                Path(p).unlink(missing_ok=True)
            raise
        self.manifest.record(key, param_hash, written, time.perf_counter() - t0, **extra)
        self.manifest.save()
        return written

    def finish(self) -> None:
        self.manifest.save()


# --- classical artifacts ---


def _lyap_rows_job(args) -> np.ndarray:
    alpha, g, n_phi, n_theta, geometry, n_kicks, lo, hi = args
    grid = PhaseSpaceGrid(n_phi, n_theta, geometry)
    xyz = grid.center_vectors().reshape(3, n_phi, n_theta)[:, lo:hi, :].reshape(3, -1)
    d = np.tile(np.array(DEFAULT_TANGENT)[:, None], (1, xyz.shape[1]))
    lam = benettin_many(xyz, d, KickParams(alpha, g), n_kicks)
    return lam.reshape(hi - lo, n_theta)


def _compute_lyap_grid(cfg: ExperimentConfig, g: float) -> LyapunovGrid:
    params = KickParams(cfg.alpha, g)
    if cfg.workers <= 1:
        return lyapunov_grid(params, cfg.n_phi, cfg.n_theta, cfg.n_kicks, cfg.grid_geometry)
    bounds = np.linspace(0, cfg.n_phi, 4 * cfg.workers + 1, dtype=int)
    jobs = [
        (cfg.alpha, g, cfg.n_phi, cfg.n_theta, cfg.grid_geometry, cfg.n_kicks, int(lo), int(hi))
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        chunks = list(pool.map(_lyap_rows_job, jobs))
    values = np.concatenate(chunks, axis=0)
    grid = PhaseSpaceGrid(cfg.n_phi, cfg.n_theta, cfg.grid_geometry)
    return LyapunovGrid(grid, values, params, cfg.n_kicks)


def _lyap_key(g: float) -> str:
    return f"lyap:g{gamma_tag(g)}"


def _lyap_hash(cfg: ExperimentConfig, g: float) -> str:
    return _phash(
        "lyap", cfg.alpha, g, cfg.n_phi, cfg.n_theta, cfg.grid_geometry, cfg.n_kicks
    )


def _load_lyap_grid(path: Path, cfg: ExperimentConfig, g: float) -> LyapunovGrid:
    _, rows = read_csv(path)
    values = np.empty((cfg.n_phi, cfg.n_theta))
    for i, j, _, _, lam in rows:
        values[int(i), int(j)] = float(lam)
    grid = PhaseSpaceGrid(cfg.n_phi, cfg.n_theta, cfg.grid_geometry)
    return LyapunovGrid(grid, values, KickParams(cfg.alpha, g), cfg.n_kicks)


def ensure_lyapunov(runner: Runner, g: float) -> LyapunovGrid:
    """Compute or reload the per-gamma Lyapunov grid, emitting its CSV."""
    cfg = runner.cfg
    fname = f"lyapunov_grid_g{gamma_tag(g)}.csv"
    cache: dict[str, LyapunovGrid] = {}

    def build(written: list[Path]) -> None:
        lgrid = _compute_lyap_grid(cfg, g)
        cache["grid"] = lgrid
        ph, th = lgrid.grid.phi, lgrid.grid.theta
        rows = (
            (i, j, ph[i], th[j], lgrid.values[i, j])
            for i in range(cfg.n_phi)
            for j in range(cfg.n_theta)
        )
        written.append(
            write_csv(runner.out / fname, ["i", "j", "phi", "theta", "lambda"], rows)
        )

    files = runner.unit(_lyap_key(g), _lyap_hash(cfg, g), build)
    return cache.get("grid") or _load_lyap_grid(files[0], cfg, g)


def ensure_classification(runner: Runner, g: float) -> tuple[ClassificationGrid, str]:
    """Classification grid for gamma, plus its parameter hash for dependents."""
    cfg = runner.cfg
    lgrid = ensure_lyapunov(runner, g)
    chash = _phash("classify", _lyap_hash(cfg, g), cfg.lambda_cut)
    fname = f"classification_g{gamma_tag(g)}.csv"
    cache: dict[str, ClassificationGrid] = {}

    def build(written: list[Path]) -> dict:
        if cfg.lambda_cut is not None:
            cut, rule = cfg.lambda_cut, "override"
        else:
            cut, rule = lambda_cut_from_histogram(lgrid)
        cgrid = classify_grid(lgrid, cut)
        cache["grid"] = cgrid
        rows = (
            (i, j, int(cgrid.c[i, j]))
            for i in range(cfg.n_phi)
            for j in range(cfg.n_theta)
        )
        written.append(write_csv(runner.out / fname, ["i", "j", "c"], rows))
        logger.info(
            "gamma=%s: lambda_cut=%.6g (%s rule), chaotic fraction %.4f",
            gamma_tag(g), cut, rule, cgrid.chaotic_fraction,
        )
        return {
            "lambda_cut": cut,
            "rule": rule,
            "chaotic_fraction": cgrid.chaotic_fraction,
        }

    files = runner.unit(f"classify:g{gamma_tag(g)}", chash, build)
    if "grid" in cache:
        return cache["grid"], chash
    _, rows = read_csv(files[0])
    c = np.empty((cfg.n_phi, cfg.n_theta), dtype=np.int8)
    for i, j, v in rows:
        c[int(i), int(j)] = int(v)
    entry = runner.manifest.data["entries"][f"classify:g{gamma_tag(g)}"]
    cut = float(entry["lambda_cut"])
    frac = float(entry["chaotic_fraction"])
    return ClassificationGrid(lgrid.grid, c, cut, frac), chash


def run_poincare(cfg: ExperimentConfig) -> list[Path]:
    runner = Runner(cfg)
    files: list[Path] = []
    for g in cfg.gamma:
        tag = gamma_tag(g)
        h = _phash("poincare", cfg.alpha, g, cfg.poincare_inits, cfg.poincare_kicks, cfg.seed)

        def build(written: list[Path], g=g, tag=tag) -> None:
            pts = poincare_section(
                KickParams(cfg.alpha, g), cfg.poincare_inits, cfg.poincare_kicks, cfg.seed
            )
            rows = (
                (orbit, kick, pts[orbit, kick, 0], pts[orbit, kick, 1])
                for orbit in range(pts.shape[0])
                for kick in range(pts.shape[1])
            )
            written.append(
                write_csv(
                    runner.out / f"poincare_g{tag}.csv",
                    ["orbit_id", "kick", "phi", "theta"],
                    rows,
                )
            )

        files += runner.unit(f"poincare:g{tag}", h, build)
    runner.finish()
    return files


def run_lyapunov(cfg: ExperimentConfig) -> list[Path]:
    runner = Runner(cfg)
    files: list[Path] = []
    for g in cfg.gamma:
        ensure_lyapunov(runner, g)
        ensure_classification(runner, g)
        files += runner.manifest.files_of(_lyap_key(g))
        files += runner.manifest.files_of(f"classify:g{gamma_tag(g)}")
    runner.finish()
    return files


def run_ks_scan(cfg: ExperimentConfig) -> list[Path]:
    runner = Runner(cfg)
    grids = {g: ensure_lyapunov(runner, g) for g in cfg.gamma}
    h = _phash("ks", [(g, _lyap_hash(cfg, g)) for g in cfg.gamma])

    def build(written: list[Path]) -> None:
        rows = [(g, ks_entropy(grids[g])) for g in cfg.gamma]
        written.append(write_csv(runner.out / "ks_entropy.csv", ["gamma", "S_KS"], rows))

    files = runner.unit("ks-scan", h, build)
    runner.finish()
    return files


# --- quantum artifacts ---


def _spectrum_files(cfg: ExperimentConfig, g: float, j: int) -> tuple[str, str]:
    tag = gamma_tag(g)
    return f"spectrum_j{j}_g{tag}.csv", f"vectors_j{j}_g{tag}.bin"


def ensure_spectrum(runner: Runner, g: float, j: int) -> QuasiSpectrum | np.ndarray:
    """Quasienergy spectrum of one (gamma, j) point, CSV-cached.

    Returns the full QuasiSpectrum when it had to diagonalize, otherwise
    just the cached eigenphase array.
    """
    cfg = runner.cfg
    csv_name, bin_name = _spectrum_files(cfg, g, j)
    save_vec = cfg.save_vectors
    h = _phash("spectrum", cfg.alpha, g, j, save_vec)
    cache: dict[str, QuasiSpectrum] = {}

    def build(written: list[Path]) -> None:
        spec = diagonalize(build_floquet(SpinQuantum(j), KickParams(cfg.alpha, g)))
        cache["spec"] = spec
        written.append(
            write_csv(runner.out / csv_name, ["n", "nu_n"], enumerate(spec.nu))
        )
        if save_vec:
            save_eigenvectors(runner.out / bin_name, spec)
            written.append(runner.out / bin_name)

    files = runner.unit(f"spectrum:g{gamma_tag(g)}:j{j}", h, build)
    if "spec" in cache:
        return cache["spec"]
    _, rows = read_csv(files[0])
    return np.array([float(r[1]) for r in rows])


def run_spectrum(cfg: ExperimentConfig) -> list[Path]:
    runner = Runner(cfg)
    files: list[Path] = []
    for g in cfg.gamma:
        for j in cfg.j:
            ensure_spectrum(runner, g, j)
            files += runner.manifest.files_of(f"spectrum:g{gamma_tag(g)}:j{j}")
    runner.finish()
    return files


def run_rstat_scan(cfg: ExperimentConfig) -> list[Path]:
    runner = Runner(cfg)
    h = _phash(
        "rstat", cfg.alpha, cfg.gamma, cfg.j, cfg.include_wrap, cfg.r_coe, cfg.split_parity
    )

    def build(written: list[Path]) -> None:
        rows = []
        for g in cfg.gamma:
            for j in cfg.j:
                try:
                    if cfg.split_parity:
                        sectors = parity_sector_phases(SpinQuantum(j), KickParams(cfg.alpha, g))
                        summary = pooled_mean_ratio(sectors, cfg.include_wrap, cfg.r_coe)
                    else:
                        spec = ensure_spectrum(runner, g, j)
                        nu = spec if isinstance(spec, np.ndarray) else spec.nu
                        summary = rescaled_mean_ratio(nu, cfg.include_wrap, cfg.r_coe)
                except Exception as exc:  # keep scanning the remaining points
                    logger.error("rstat point gamma=%s j=%d failed: %s", gamma_tag(g), j, exc)
                    continue
                rows.append((g, j, summary.mean_r, summary.rescaled, summary.n_levels))
        written.append(
            write_csv(
                runner.out / "rstat.csv",
                ["gamma", "j", "mean_r", "rescaled", "n_levels"],
                rows,
            )
        )

    files = runner.unit("rstat-scan", h, build)
    runner.finish()
    return files


# --- overlap pipeline ---


def _overlap_member_job(args) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    alpha, g, j, n_phi, n_theta, geometry, c_bytes = args
    spin = SpinQuantum(j)
    spec = diagonalize(build_floquet(spin, KickParams(alpha, g)))
    grid = PhaseSpaceGrid(n_phi, n_theta, geometry)
    labels = ClassificationGrid(
        grid, np.frombuffer(c_bytes, dtype=np.int8).reshape(n_phi, n_theta), 0.0, 0.0
    )
    frame = build_coherent_frame(spin, grid)
    red = husimi_reduce(frame, spec.vectors, labels=labels)
    return j, spec.nu, red.overlaps, red.norms


def _settle(future) -> tuple[tuple | None, Exception | None]:
    try:
        return future.result(), None
    except Exception as exc:
        return None, exc


def _settle_call(fn, job) -> tuple[tuple | None, Exception | None]:
    try:
        return fn(job), None
    except Exception as exc:
        return None, exc


def _overlap_file(g: float, j: int) -> str:
    return f"overlap_j{j}_g{gamma_tag(g)}.csv"


def ensure_overlaps(
    runner: Runner, g: float, members: Sequence[int]
) -> dict[int, np.ndarray]:
    """Raw overlap indices per ensemble member, computed or reloaded from CSV.

    A member whose diagonalization or reduction fails is logged and left out
    of the returned mapping; ensemble consumers shrink their Hilbert-space
    denominators accordingly and record the exclusion in the manifest.
    """
    cfg = runner.cfg
    cgrid, chash = ensure_classification(runner, g)
    member_hash = {j: _phash("overlap", cfg.alpha, g, j, chash) for j in members}
    missing = [
        j
        for j in dict.fromkeys(members)
        if not runner.manifest.is_complete(f"overlap:g{gamma_tag(g)}:j{j}", member_hash[j])
    ]
    results: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    failed: list[int] = []
    if missing:
        jobs = [
            (cfg.alpha, g, j, cfg.n_phi, cfg.n_theta, cfg.grid_geometry, cgrid.c.tobytes())
            for j in missing
        ]
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                futures = [(job[2], pool.submit(_overlap_member_job, job)) for job in jobs]
                outcomes = [(j, *_settle(fut)) for j, fut in futures]
        else:
            outcomes = [(job[2], *_settle_call(_overlap_member_job, job)) for job in jobs]
        for j, value, error in outcomes:
            if error is not None:
                logger.error("overlap member gamma=%s j=%d failed: %s", gamma_tag(g), j, error)
                failed.append(j)
            else:
                results[j] = value[1:]
    if failed:
        logger.error(
            "gamma=%s: excluding failed ensemble members %s", gamma_tag(g), sorted(failed)
        )

    out: dict[int, np.ndarray] = {}
    for j in dict.fromkeys(members):
        if j in failed:
            continue
        key = f"overlap:g{gamma_tag(g)}:j{j}"

        if j in results:
            nu, m_raw, norms = results[j]
            worst = float(np.max(np.abs(norms - 1.0)))

            def build(written: list[Path], j=j, nu=nu, m_raw=m_raw, worst=worst) -> dict:
                rows = (
                    (n, nu[n], m_raw[n], float(np.clip(m_raw[n], -1.0, 1.0)))
                    for n in range(len(nu))
                )
                written.append(
                    write_csv(
                        runner.out / _overlap_file(g, j),
                        ["n", "nu_n", "M_raw", "M_clipped"],
                        rows,
                    )
                )
                return {"max_norm_defect": worst}

            runner.unit(key, member_hash[j], build)
            out[j] = results[j][1]
        else:
            _, rows = read_csv(runner.manifest.files_of(key)[0])
            out[j] = np.array([float(r[2]) for r in rows])
    return out


def _pool_ensemble(
    overlaps: dict[int, np.ndarray], members: Sequence[int]
) -> tuple[EnsembleOverlaps, list[int]]:
    available = [j for j in members if j in overlaps]
    excluded = [j for j in members if j not in overlaps]
    if not available:
        raise NumericalError(f"every member of the j in {list(members)} ensemble failed")
    pooled = np.concatenate([overlaps[j] for j in available])
    total_dim = sum(2 * j + 1 for j in available)
    return EnsembleOverlaps(float(np.mean(available)), pooled, total_dim), excluded


def _ensembles(
    runner: Runner, g: float
) -> tuple[list[EnsembleOverlaps], dict[int, list[int]]]:
    cfg = runner.cfg
    ensembles = []
    exclusions: dict[int, list[int]] = {}
    all_members = sorted(
        {j for center in cfg.j for j in cfg.ensemble_members(center)}
    )
    overlaps = ensure_overlaps(runner, g, all_members)
    for center in cfg.j:
        ensemble, excluded = _pool_ensemble(overlaps, cfg.ensemble_members(center))
        ensembles.append(ensemble)
        if excluded:
            exclusions[center] = excluded
    return ensembles, exclusions


def run_overlap(cfg: ExperimentConfig) -> list[Path]:
    runner = Runner(cfg)
    files: list[Path] = []
    for g in cfg.gamma:
        members = sorted({j for center in cfg.j for j in cfg.ensemble_members(center)})
        computed = ensure_overlaps(runner, g, members)
        for j in computed:
            files += runner.manifest.files_of(f"overlap:g{gamma_tag(g)}:j{j}")
    runner.finish()
    return files


def run_pm_hist(cfg: ExperimentConfig) -> list[Path]:
    runner = Runner(cfg)
    files: list[Path] = []
    for g in cfg.gamma:
        for center in cfg.j:
            members = cfg.ensemble_members(center)
            overlaps = ensure_overlaps(runner, g, members)
            ensemble, excluded = _pool_ensemble(overlaps, members)
            a, b = members[0], members[-1]
            name = f"pm_hist_ens{a}-{b}_g{gamma_tag(g)}.csv"
            h = _phash("pmhist", cfg.alpha, g, tuple(members), cfg.pm_bins)

            def build(written: list[Path], ensemble=ensemble, name=name, excluded=excluded) -> dict:
                hist = pm_histogram(ensemble.m_values, cfg.pm_bins)
                written.append(
                    write_csv(
                        runner.out / name,
                        ["bin_center", "P"],
                        zip(hist.centers, hist.density),
                    )
                )
                return {"excluded_members": excluded} if excluded else {}

            files += runner.unit(f"pmhist:g{gamma_tag(g)}:ens{a}-{b}", h, build)
    runner.finish()
    return files


def run_fmix(cfg: ExperimentConfig) -> list[Path]:
    runner = Runner(cfg)
    files: list[Path] = []
    for g in cfg.gamma:
        ensembles, exclusions = _ensembles(runner, g)
        h = _phash(
            "fmix",
            cfg.alpha,
            g,
            cfg.j,
            (cfg.j_offset_lo, cfg.j_offset_hi, cfg.j_step),
            cfg.m_intervals,
        )

        def build(written: list[Path], g=g, ensembles=ensembles, exclusions=exclusions) -> dict:
            rows = []
            fits = {}
            for lo, hi in cfg.m_intervals:
                fr = [mixed_fraction(e.m_values, e.total_dim, lo, hi) for e in ensembles]
                rows += [
                    (e.mean_j, lo, hi, f) for e, f in zip(ensembles, fr)
                ]
                try:
                    fit = power_law_fit([e.mean_j for e in ensembles], fr)
                    fits[f"[{lo},{hi}]"] = {"zeta": fit.zeta, "r_squared": fit.r_squared}
                    logger.info(
                        "gamma=%s M in [%g, %g]: zeta=%.4f (r^2=%.3f)",
                        gamma_tag(g), lo, hi, fit.zeta, fit.r_squared,
                    )
                except ValueError as exc:
                    logger.warning(
                        "gamma=%s M in [%g, %g]: no power-law fit (%s)",
                        gamma_tag(g), lo, hi, exc,
                    )
            written.append(
                write_csv(
                    runner.out / f"fmix_g{gamma_tag(g)}.csv",
                    ["mean_j", "interval_lo", "interval_hi", "f_mix"],
                    rows,
                )
            )
            extra = {"fits": fits}
            if exclusions:
                extra["excluded_members"] = exclusions
            return extra

        files += runner.unit(f"fmix:g{gamma_tag(g)}", h, build)
    runner.finish()
    return files


def run_zeta_scan(cfg: ExperimentConfig) -> list[Path]:
    if len(cfg.j) < 3:
        raise ConfigError("zeta-scan needs at least 3 ensemble centers to fit a power law")
    runner = Runner(cfg)
    files: list[Path] = []
    for g in cfg.gamma:
        ensembles, exclusions = _ensembles(runner, g)
        h = _phash(
            "zeta",
            cfg.alpha,
            g,
            cfg.j,
            (cfg.j_offset_lo, cfg.j_offset_hi, cfg.j_step),
            cfg.zeta_window,
            cfg.zeta_step,
        )

        def build(written: list[Path], g=g, ensembles=ensembles, exclusions=exclusions) -> dict:
            points = zeta_scan(ensembles, cfg.zeta_window, cfg.zeta_step)
            rows = [(p.m_start, p.zeta, p.r_squared) for p in points]
            written.append(
                write_csv(
                    runner.out / f"zeta_scan_g{gamma_tag(g)}.csv",
                    ["M_start", "zeta", "r2"],
                    rows,
                )
            )
            return {"excluded_members": exclusions} if exclusions else {}

        files += runner.unit(f"zeta:g{gamma_tag(g)}", h, build)
    runner.finish()
    return files


def run_husimi(cfg: ExperimentConfig) -> list[Path]:
    """Dump Husimi fields of selected eigenstates (by index or target M)."""
    runner = Runner(cfg)
    if not cfg.husimi_states and not cfg.husimi_targets:
        raise ConfigError("husimi: select eigenstates via husimi_states or husimi_targets")
    files: list[Path] = []
    for g in cfg.gamma:
        labels = chash = None
        if cfg.husimi_targets:
            labels, chash = ensure_classification(runner, g)
        for j in cfg.j:
            h = _phash(
                "husimi", cfg.alpha, g, j, cfg.n_phi, cfg.n_theta, cfg.grid_geometry,
                cfg.husimi_states, cfg.husimi_targets, chash,
            )

            def build(written: list[Path], g=g, j=j, labels=labels) -> dict:
                spin = SpinQuantum(j)
                spec = diagonalize(build_floquet(spin, KickParams(cfg.alpha, g)))
                grid = PhaseSpaceGrid(cfg.n_phi, cfg.n_theta, cfg.grid_geometry)
                frame = build_coherent_frame(spin, grid)
                chosen = list(cfg.husimi_states)
                picked = {}
                if cfg.husimi_targets:
                    red = husimi_reduce(frame, spec.vectors, labels=labels)
                    for target in cfg.husimi_targets:
                        n = int(np.argmin(np.abs(red.overlaps - target)))
                        chosen.append(n)
                        picked[str(target)] = {"n": n, "M": float(red.overlaps[n])}
                chosen = sorted(set(chosen))
                red = husimi_reduce(frame, spec.vectors[:, chosen], keep_fields=range(len(chosen)))
                ph, th = grid.phi, grid.theta
                for pos, n in enumerate(chosen):
                    q = red.fields[pos]
                    rows = (
                        (i, r, ph[i], th[r], q[i, r])
                        for i in range(cfg.n_phi)
                        for r in range(cfg.n_theta)
                    )
                    written.append(
                        write_csv(
                            runner.out / f"husimi_j{j}_g{gamma_tag(g)}_n{n}.csv",
                            ["i", "j", "phi", "theta", "Q"],
                            rows,
                        )
                    )
                return {"picked": picked} if picked else {}

            files += runner.unit(f"husimi:g{gamma_tag(g)}:j{j}", h, build)
    runner.finish()
    return files


def run_overlap_pipeline(cfg: ExperimentConfig) -> list[Path]:
    """Full chain for one or more gammas: members, P(M), f_mix and fits."""
    files = run_overlap(cfg)
    files += run_pm_hist(cfg)
    files += run_fmix(cfg)
    return files


# --- figure presets ---

_FIG2_GAMMAS = tuple(round(0.5 + 0.25 * k, 2) for k in range(23))
_FIG3_TARGETS = (-1.0, -0.5161, 0.3075, 0.9744)

PRESETS: dict[int, dict] = {
    1: {"gamma": (0.2, 2.0, 4.0, 6.0)},
    2: {"gamma": _FIG2_GAMMAS, "j": (500,), "n_phi": 100, "n_theta": 100, "n_kicks": 2000},
    3: {
        "gamma": (2.6,),
        "j": (150,),
        "j_offset_lo": 0,
        "j_offset_hi": 4,
        "husimi_targets": _FIG3_TARGETS,
    },
    4: {"gamma": (2.6, 2.3), "j": (100, 150, 200, 250, 300, 350, 400)},
    5: {"gamma": (2.3, 3.0), "j": (100, 150, 200, 250)},
}

_FIG4_INTERVALS: dict[float, tuple] = {
    2.6: ((-0.8, 0.7), (-0.2, 0.2)),
    2.3: ((-0.8, 0.6), (-0.5, 0.6)),
}


def preset_config(
    figure: int, cfg: ExperimentConfig, user_set: Iterable[str] = ()
) -> ExperimentConfig:
    """Apply a figure preset to cfg, keeping any field the user set explicitly."""
    if figure not in PRESETS:
        raise ConfigError(f"unknown figure preset {figure}; expected 1..5")
    user = set(user_set)
    updates = {k: v for k, v in PRESETS[figure].items() if k not in user}
    return cfg.with_overrides(**updates)


def reproduce_figure(
    figure: int, cfg: ExperimentConfig, user_set: Iterable[str] = ()
) -> list[Path]:
    cfg = preset_config(figure, cfg, user_set)
    user = set(user_set)
    if figure == 1:
        return run_poincare(cfg) + run_lyapunov(cfg)
    if figure == 2:
        return run_ks_scan(cfg) + run_rstat_scan(cfg)
    if figure == 3:
        return run_overlap_pipeline(cfg) + run_poincare(cfg) + run_husimi(cfg)
    if figure == 4:
        files: list[Path] = []
        for g in cfg.gamma:
            intervals = cfg.m_intervals
            if "m_intervals" not in user and g in _FIG4_INTERVALS:
                intervals = _FIG4_INTERVALS[g]
            sub = cfg.with_overrides(gamma=(g,), m_intervals=intervals)
            files += run_overlap(sub) + run_fmix(sub)
        return files
    return run_zeta_scan(cfg)
