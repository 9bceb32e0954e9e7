"""Zero-forcing solve of quasi-banded systems in O(N D^2).

The matrix is split as ``B + U V^H``: ``B`` is the band, eliminated by LU
without pivoting so no fill-in leaves the band, and ``U V^H`` carries the two
wrap-around corner blocks. ``U`` selects the first and last ``D`` rows, so the
correction rank is at most ``2D``. Solves combine banded substitution with the
Woodbury identity

    (B + U V^H)^{-1} b = y - Z (I + V^H Z)^{-1} V^H y,   y = B^{-1} b,  Z = B^{-1} U.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ..exceptions import NearSingularPivotError
from ..numerics import dense_lu
from ..receiver import QuasiBandedMatrix

PIVOT_RTOL = 1e-12


def effective_bandwidths(band: np.ndarray, d: int):
    """Outermost nonzero sub- and super-diagonal of compact band storage."""
    nz = np.flatnonzero(np.any(band != 0, axis=0))
    if nz.size == 0:
        return 0, 0
    return max(d - nz[0], 0), max(nz[-1] - d, 0)


def band_lu(band: np.ndarray, d: int, p: int, q: int, scale: float):
    """In-place pivot-free LU of compact band storage (offset ``d``).

    Multipliers of the unit lower factor overwrite the sub-diagonals, ``U``
    overwrites the diagonal and super-diagonals. Returns the multiplication
    count (divisions included).
    """
    n = band.shape[0]
    tol = PIVOT_RTOL * scale
    mults = 0
    for k in range(n):
        piv = band[k, d]
        if not abs(piv) >= tol:
            raise NearSingularPivotError(
                f"pivot {abs(piv):.3e} at row {k} below {tol:.3e}; use a dense solve", index=k
            )
        ns = min(p, n - 1 - k)
        if ns == 0:
            continue
        s = np.arange(1, ns + 1)
        rows = k + s
        lcol = band[rows, d - s] / piv
        band[rows, d - s] = lcol
        mults += ns
        nt = min(q, n - 1 - k)
        if nt:
            t = np.arange(1, nt + 1)
            band[rows[:, None], d + t[None, :] - s[:, None]] -= lcol[:, None] * band[k, d + t][None, :]
            mults += ns * nt
    return mults


def band_solve(lu: np.ndarray, d: int, p: int, q: int, rhs: np.ndarray):
    """Forward then backward substitution for ``(n,)`` or ``(n, m)`` right-hand sides.

    Returns ``(x, mults_per_rhs)``.
    """
    n = lu.shape[0]
    y = np.array(rhs, dtype=complex)
    mults = 0
    if p:
        for i in range(1, n):
            j0 = max(0, i - p)
            w = i - j0
            y[i] -= lu[i, d - w : d] @ y[j0:i]
            mults += w
    for i in range(n - 1, -1, -1):
        j1 = min(n - 1, i + q)
        w = j1 - i
        if w:
            y[i] -= lu[i, d + 1 : d + 1 + w] @ y[i + 1 : j1 + 1]
        y[i] /= lu[i, d]
        mults += w + 1
    return y, mults


@dataclass
class QuasiBandedFactorization:
    """Band LU factors plus the low-rank corner correction.

    Attributes
    ----------
    lu : ndarray, shape (N, 2D+1)
        Unit-lower and upper band factors in compact storage.
    lower, upper : int
        Effective sub-/super-diagonal counts of the factors.
    corner_rows : ndarray of int
        Rows selected by ``U``; ``r = len(corner_rows)``.
    vh_tr, vh_bl : ndarray
        Nonzero parts of ``V^H``: corner rows restricted to the last / first ``D`` columns.
    z : ndarray, shape (N, r)
        ``B^{-1} U``.
    capacitance : tuple
        Pivoted LU of ``I_r + V^H Z``.
    """

    n: int
    half_bandwidth: int
    lu: np.ndarray = field(repr=False)
    lower: int
    upper: int
    corner_rows: np.ndarray = field(repr=False)
    n_tr: int
    vh_tr: np.ndarray = field(repr=False)
    vh_bl: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    capacitance: tuple = field(repr=False)
    factor_mults: int = 0
    instrumented: bool = False

    @property
    def rank(self) -> int:
        return len(self.corner_rows)

    def band_factors(self):
        """Dense ``(L, U)`` of the band part; for inspection and tests."""
        n, d = self.n, self.half_bandwidth
        dense = QuasiBandedMatrix(d, self.lu, np.zeros((d, d)), np.zeros((d, d))).to_dense()
        lower = np.tril(dense, -1) + np.eye(n)
        return lower, np.triu(dense)

    def corner_basis(self):
        """Dense ``(U_c, V_c)`` with corners ``== U_c @ V_c.conj().T``."""
        n, d = self.n, self.half_bandwidth
        u = np.zeros((n, self.rank), dtype=complex)
        u[self.corner_rows, np.arange(self.rank)] = 1.0
        vh = np.zeros((self.rank, n), dtype=complex)
        vh[: self.n_tr, n - d :] = self.vh_tr
        vh[self.n_tr :, :d] = self.vh_bl
        return u, vh.conj().T

    def _vh_dot(self, y):
        d = self.half_bandwidth
        top = self.vh_tr @ y[self.n - d :]
        bot = self.vh_bl @ y[:d]
        return np.concatenate([top, bot], axis=0), (self.vh_tr.size + self.vh_bl.size)

    def solve(self, rhs, count: bool = False):
        """Solve ``Lambda_QB x = rhs`` for a vector or column-stacked matrix."""
        rhs = np.asarray(rhs, dtype=complex)
        if rhs.shape[0] != self.n:
            raise ValueError(f"rhs length {rhs.shape[0]} does not match system size {self.n}")
        y, mults = band_solve(self.lu, self.half_bandwidth, self.lower, self.upper, rhs)
        r = self.rank
        if r:
            t, m1 = self._vh_dot(y)
            u = scipy.linalg.lu_solve(self.capacitance, t)
            y = y - self.z @ u
            mults += m1 + r * r + self.n * r
        return (y, mults) if count else y


def factorize_quasi_banded(m: QuasiBandedMatrix, instrument: bool = False) -> QuasiBandedFactorization:
    """Factor ``Lambda_QB`` without pivoting.

    Raises
    ------
    NearSingularPivotError
        When a band pivot falls below ``1e-12 * max|M|``; callers are expected
        to fall back to a dense pivoted solve.
    """
    n, d = m.n, m.half_bandwidth
    scale = max(np.max(np.abs(m.band)), np.max(np.abs(m.corner_tr), initial=0.0),
                np.max(np.abs(m.corner_bl), initial=0.0))
    if scale == 0:
        raise NearSingularPivotError("matrix is identically zero", index=0)
    p, q = effective_bandwidths(m.band, d)
    lu = np.array(m.band, dtype=complex)
    mults = band_lu(lu, d, p, q, scale)

    tr_rows = np.flatnonzero(np.any(m.corner_tr != 0, axis=1))
    bl_rows = np.flatnonzero(np.any(m.corner_bl != 0, axis=1))
    corner_rows = np.concatenate([tr_rows, n - d + bl_rows]).astype(np.intp)
    vh_tr = np.array(m.corner_tr[tr_rows], dtype=complex)
    vh_bl = np.array(m.corner_bl[bl_rows], dtype=complex)
    r = len(corner_rows)
    if r:
        sel = np.zeros((n, r), dtype=complex)
        sel[corner_rows, np.arange(r)] = 1.0
        z, per = band_solve(lu, d, p, q, sel)
        mults += per * r
        top = vh_tr @ z[n - d :]
        bot = vh_bl @ z[:d]
        cap = np.eye(r, dtype=complex) + np.concatenate([top, bot], axis=0)
        mults += (vh_tr.size + vh_bl.size) * r
        capacitance = dense_lu(cap)
        mults += sum((r - k - 1) + (r - k - 1) ** 2 for k in range(r))
    else:
        z = np.zeros((n, 0), dtype=complex)
        capacitance = (np.zeros((0, 0), dtype=complex), np.zeros(0, dtype=np.int32))
    return QuasiBandedFactorization(
        n=n, half_bandwidth=d, lu=lu, lower=p, upper=q, corner_rows=corner_rows,
        n_tr=len(tr_rows), vh_tr=vh_tr, vh_bl=vh_bl, z=z, capacitance=capacitance,
        factor_mults=mults, instrumented=instrument,
    )


def solve_quasi_banded(f: QuasiBandedFactorization, rhs) -> np.ndarray:
    return f.solve(rhs)


def count_actual_multiplications(f: QuasiBandedFactorization) -> dict:
    """Complex multiplications executed by the factorization and by one solve.

    Requires a factorization built with ``instrument=True``.
    """
    if not f.instrumented:
        raise ValueError("factorization was not built with instrument=True")
    _, per_solve = f.solve(np.zeros(f.n, dtype=complex), count=True)
    return {
        "factorization": int(f.factor_mults),
        "solve": int(per_solve),
        "total": int(f.factor_mults + per_solve),
    }
