"""Synthetic CSV inputs matching the simulator's documented schemas."""

import math

import numpy as np
import pytest


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in row)
              for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def full_input_dir(tmp_path):
    """One directory holding minimal valid inputs for every figure."""
    rng = np.random.default_rng(0)

    for gamma in ("0.2", "2.6"):
        rows = []
        for orbit in range(3):
            for kick in range(5):
                rows.append((orbit, kick, float(rng.uniform(-3, 3)), float(rng.uniform(0.1, 3))))
        write_csv(tmp_path / f"poincare_g{gamma}.csv", ["orbit_id", "kick", "phi", "theta"], rows)

        rows = []
        for i in range(6):
            for j in range(5):
                phi = -math.pi + (i + 0.5) * 2 * math.pi / 6
                theta = (j + 0.5) * math.pi / 5
                rows.append((i, j, phi, theta, float(rng.uniform(0, 1))))
        write_csv(
            tmp_path / f"lyapunov_grid_g{gamma}.csv",
            ["i", "j", "phi", "theta", "lambda"],
            rows,
        )

    write_csv(
        tmp_path / "ks_entropy.csv",
        ["gamma", "S_KS"],
        [(g, 0.2 * max(0.0, g - 2.0)) for g in (0.5, 1.0, 2.0, 3.0, 4.0)],
    )
    write_csv(
        tmp_path / "rstat.csv",
        ["gamma", "j", "mean_r", "rescaled", "n_levels"],
        [(g, 500, 0.4, 0.2 * g / 6, 1001) for g in (0.5, 2.0, 4.0, 6.0)],
    )

    centers = np.linspace(-0.975, 0.975, 40)
    dens = np.full(40, 0.1)
    dens[0] = dens[-1] = 8.0
    dens *= 1.0 / (dens * 0.05).sum()
    write_csv(tmp_path / "pm_hist_ens150-154_g2.6.csv", ["bin_center", "P"], zip(centers, dens))

    for n in (5, 36):
        rows = []
        for i in range(6):
            for j in range(5):
                phi = -math.pi + (i + 0.5) * 2 * math.pi / 6
                theta = (j + 0.5) * math.pi / 5
                rows.append((i, j, phi, theta, float(rng.uniform(0, 2))))
        write_csv(
            tmp_path / f"husimi_j150_g2.6_n{n}.csv",
            ["i", "j", "phi", "theta", "Q"],
            rows,
        )

    rows = []
    for lo, hi, zeta, amp in ((-0.8, 0.7, 0.2986, 1.9), (-0.2, 0.2, 0.2561, 0.4)):
        for mean_j in (100.0, 150.0, 200.0, 250.0, 300.0):
            rows.append((mean_j, lo, hi, amp * mean_j**-zeta))
    write_csv(tmp_path / "fmix_g2.6.csv", ["mean_j", "interval_lo", "interval_hi", "f_mix"], rows)

    for gamma, spread in (("2.3", 0.3), ("3", 0.05)):
        rows = []
        for k in range(17):
            m0 = -1.0 + 0.1 * k
            rows.append((m0, 0.3 + spread * math.sin(4 * m0), 0.9))
        rows[5] = (rows[5][0], "", "")  # one null window
        write_csv(tmp_path / f"zeta_scan_g{gamma}.csv", ["M_start", "zeta", "r2"], rows)

    return tmp_path
