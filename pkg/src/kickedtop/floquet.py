"""One-kick unitary of the quantum top and its quasienergy spectrum.

The propagator factors into the x precession exp(-i alpha Jx) and a diagonal
torsion phase exp(-i gamma m^2 / (2 j)) in the Jz (Dicke) basis, ordered
m = -j..+j. The precession matrix is built by spectral decomposition of the
tridiagonal Jx. Diagonalization goes through the complex Schur form: for a
unitary (hence normal) matrix the Schur basis is an orthonormal eigenbasis to
machine precision, with no degenerate-cluster cleanup needed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .classical import KickParams
from .errors import NumericalError


@dataclass(frozen=True)
class SpinQuantum:
    """Integer spin magnitude; Hilbert dimension 2j + 1."""

    j: int

    def __post_init__(self) -> None:
        if not isinstance(self.j, (int, np.integer)) or self.j < 0:
            raise ValueError("j must be a non-negative integer")

    @property
    def dim(self) -> int:
        return 2 * self.j + 1

    def m_values(self) -> np.ndarray:
        return np.arange(-self.j, self.j + 1, dtype=float)


@dataclass(frozen=True)
class FloquetOperator:
    spin: SpinQuantum
    params: KickParams
    u: np.ndarray  # (dim, dim) complex


@dataclass(frozen=True)
class QuasiSpectrum:
    """Eigenphases in [-pi, pi), ascending, with matching eigenvector columns."""

    spin: SpinQuantum
    params: KickParams
    nu: np.ndarray
    vectors: np.ndarray  # column n is the eigenvector of nu[n], Dicke basis
    max_modulus_error: float = 0.0  # worst |(eigenvalue modulus) - 1| seen


def jx_matrix(spin: SpinQuantum) -> np.ndarray:
    """Tridiagonal Jx with <m|Jx|m+-1> = sqrt(j(j+1) - m(m+-1)) / 2."""
    j, dim = spin.j, spin.dim
    m = spin.m_values()
    off = 0.5 * np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1.0))
    mat = np.zeros((dim, dim))
    idx = np.arange(dim - 1)
    mat[idx + 1, idx] = off
    mat[idx, idx + 1] = off
    return mat


def _jx_eigensystem(spin: SpinQuantum) -> tuple[np.ndarray, np.ndarray]:
    if spin.dim == 1:
        return np.zeros(1), np.ones((1, 1))
    j, m = spin.j, spin.m_values()
    off = 0.5 * np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1.0))
    return sla.eigh_tridiagonal(np.zeros(spin.dim), off)


def wigner_rotation(spin: SpinQuantum, alpha: float) -> np.ndarray:
    """Matrix of exp(-i alpha Jx) in the Dicke basis, unitary to ~1e-14."""
    kx, v = _jx_eigensystem(spin)
    return (v * np.exp(-1j * alpha * kx)) @ v.T


def build_floquet(spin: SpinQuantum, params: KickParams) -> FloquetOperator:
    """Torsion phases applied row-wise to the precession matrix."""
    if spin.j < 1:
        raise ValueError("j must be >= 1 (the torsion carries a 1/(2j) factor)")
    w = wigner_rotation(spin, params.alpha)
    phase = np.exp(-1j * params.gamma * spin.m_values() ** 2 / (2.0 * spin.j))
    return FloquetOperator(spin, params, phase[:, None] * w)


def diagonalize(op: FloquetOperator, modulus_tol: float = 1e-8) -> QuasiSpectrum:
    """Full eigendecomposition via the complex Schur form.

    Raises NumericalError if any eigenvalue modulus strays from 1 by more
    than modulus_tol (non-unitary input or solver failure). Eigenvector
    phases are fixed by making the largest-magnitude component real positive.
    """
    t, z = sla.schur(op.u, output="complex")
    lam = np.diag(t).copy()
    drift = float(np.max(np.abs(np.abs(lam) - 1.0)))
    if drift > modulus_tol:
        raise NumericalError(
            f"eigenvalue modulus drifted {drift:.3e} from unity (j={op.spin.j})"
        )
    nu = np.angle(lam)
    nu[nu >= np.pi] -= 2.0 * np.pi
    order = np.argsort(nu, kind="stable")
    nu = nu[order]
    vec = np.ascontiguousarray(z[:, order])
    lead = np.argmax(np.abs(vec), axis=0)
    pivots = vec[lead, np.arange(vec.shape[1])]
    vec = vec * np.conj(pivots / np.abs(pivots))[None, :]
    return QuasiSpectrum(op.spin, op.params, nu, vec, drift)


def parity_sector_phases(
    spin: SpinQuantum, params: KickParams, modulus_tol: float = 1e-8
) -> tuple[np.ndarray, np.ndarray]:
    """Quasienergies of the two parity sectors, each sorted in [-pi, pi).

    A pi rotation about the precession axis commutes with the one-kick
    unitary. In the Jx eigenbasis that rotation is diagonal with entries
    (-1)^(k_x), so the unitary splits into even/odd k_x blocks; mixing the
    sectors' eigenphases into one sequence superposes two independent
    spectra and washes out spacing statistics.
    """
    if spin.j < 1:
        raise ValueError("j must be >= 1")
    kx, v = _jx_eigensystem(spin)
    kick = np.exp(-1j * params.gamma * spin.m_values() ** 2 / (2.0 * spin.j))
    f_x = (v.T @ (kick[:, None] * v)) * np.exp(-1j * params.alpha * kx)[None, :]
    even = np.rint(kx).astype(int) % 2 == 0
    out = []
    for sel in (even, ~even):
        block = f_x[np.ix_(sel, sel)]
        leak = float(np.max(np.abs(f_x[np.ix_(sel, ~sel)]))) if sel.sum() < spin.dim else 0.0
        if leak > 1e-10:
            raise NumericalError(f"parity sectors leak {leak:.3e} (j={spin.j})")
        t = sla.schur(block, output="complex")[0]
        lam = np.diag(t)
        drift = float(np.max(np.abs(np.abs(lam) - 1.0)))
        if drift > modulus_tol:
            raise NumericalError(f"sector eigenvalue modulus drifted {drift:.3e}")
        nu = np.angle(lam)
        nu[nu >= np.pi] -= 2.0 * np.pi
        out.append(np.sort(nu))
    return out[0], out[1]


# --- eigenvector persistence ---
#
# Binary layout (little endian):
#   bytes  0:4   magic b"KTEV"
#   bytes  4:8   uint32 dtype tag: itemsize of one complex value (8 or 16)
#   bytes  8:16  int64  j
#   bytes 16:24  float64 gamma
#   bytes 24:32  float64 alpha
# followed by (2j+1)^2 complex values, row-major, row n = eigenvector n.

_MAGIC = b"KTEV"
_HEADER = struct.Struct("<4sIqdd")


def save_eigenvectors(path: str | Path, spec: QuasiSpectrum, dtype: str = "complex128") -> None:
    dt = np.dtype(dtype)
    if dt not in (np.dtype(np.complex64), np.dtype(np.complex128)):
        raise ValueError("dtype must be complex64 or complex128")
    header = _HEADER.pack(
        _MAGIC, dt.itemsize, spec.spin.j, spec.params.gamma, spec.params.alpha
    )
    rows = np.ascontiguousarray(spec.vectors.T.astype(dt))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(rows.tobytes())


def load_eigenvectors(path: str | Path) -> tuple[SpinQuantum, KickParams, np.ndarray]:
    """Returns (spin, params, vectors) with vectors in column convention."""
    raw = Path(path).read_bytes()
    magic, itemsize, j, gamma, alpha = _HEADER.unpack_from(raw, 0)
    if magic != _MAGIC:
        raise ValueError(f"{path}: not an eigenvector file")
    dt = np.complex64 if itemsize == 8 else np.complex128
    spin = SpinQuantum(int(j))
    rows = np.frombuffer(raw, dtype=dt, offset=_HEADER.size)
    if rows.size != spin.dim * spin.dim:
        raise ValueError(f"{path}: payload size does not match j={j}")
    vectors = rows.reshape(spin.dim, spin.dim).T.astype(np.complex128)
    return spin, KickParams(alpha, gamma), np.ascontiguousarray(vectors)
