"""Phase-space discretizations of the unit sphere.

Two cell layouts are supported. ``angle`` places cell centers on a uniform
(phi, theta) raster and carries an explicit sin(theta) area weight per row;
``area`` is uniform in (phi, cos theta) so every cell has the same Liouville
measure. Both integrate f(phi, theta) over the sphere as
sum_ij f(phi_i, theta_j) * cell_area_j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GEOMETRIES = ("angle", "area")


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Regular grid of cell centers covering the sphere.

    Cells are indexed (i, j) with i the phi index and j the theta index.
    phi runs over [-pi, pi), theta over (0, pi); centers never touch the poles.
    """

    n_phi: int
    n_theta: int
    geometry: str = "angle"

    def __post_init__(self) -> None:
        if self.n_phi < 2 or self.n_theta < 2:
            raise ValueError("grid resolution must be at least 2x2")
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"unknown grid geometry {self.geometry!r}")

    @property
    def n_cells(self) -> int:
        return self.n_phi * self.n_theta

    @property
    def phi(self) -> np.ndarray:
        return -np.pi + (np.arange(self.n_phi) + 0.5) * (2.0 * np.pi / self.n_phi)

    @property
    def theta(self) -> np.ndarray:
        if self.geometry == "angle":
            return (np.arange(self.n_theta) + 0.5) * (np.pi / self.n_theta)
        u = 1.0 - (np.arange(self.n_theta) + 0.5) * (2.0 / self.n_theta)
        return np.arccos(u)

    @property
    def cell_area(self) -> np.ndarray:
        """Area element per cell, one value per theta row (constant over phi)."""
        if self.geometry == "angle":
            return np.sin(self.theta) * (np.pi / self.n_theta) * (2.0 * np.pi / self.n_phi)
        return np.full(self.n_theta, 4.0 * np.pi / self.n_cells)

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshed (PHI, THETA), each of shape (n_phi, n_theta)."""
        return np.meshgrid(self.phi, self.theta, indexing="ij")

    def center_vectors(self) -> np.ndarray:
        """Cartesian cell centers, shape (3, n_phi * n_theta), phi-major order."""
        ph, th = self.centers()
        st = np.sin(th)
        return np.stack(
            [
                (np.cos(ph) * st).ravel(),
                (np.sin(ph) * st).ravel(),
                np.cos(th).ravel(),
            ]
        )

    def compatible_with(self, other: "PhaseSpaceGrid") -> bool:
        return (
            self.n_phi == other.n_phi
            and self.n_theta == other.n_theta
            and self.geometry == other.geometry
        )
