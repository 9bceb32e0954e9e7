"""Complex-arithmetic building blocks: unitary DFT, dense solve, QAM, RNG."""
from __future__ import annotations

import warnings
from functools import lru_cache
from importlib import resources

import numpy as np
import scipy.linalg

from .exceptions import SingularMatrixError

SINGULAR_PIVOT_RTOL = 1e-13


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def dft(v, inverse: bool = False, axis: int = -1) -> np.ndarray:
    """Unitary DFT along ``axis``.

    Both directions carry the ``1/sqrt(N)`` factor, so ``dft`` is the matrix
    ``F_N`` with ``[F_N]_{n,k} = exp(-2j*pi*n*k/N) / sqrt(N)`` and
    ``dft(., inverse=True)`` is ``F_N^H``.

    Raises
    ------
    ValueError
        If the transform length is not a power of two.
    """
    v = np.asarray(v, dtype=complex)
    n = v.shape[axis]
    if not is_power_of_two(n):
        raise ValueError(f"DFT length must be a power of two, got {n}")
    if inverse:
        return np.fft.ifft(v, axis=axis, norm="ortho")
    return np.fft.fft(v, axis=axis, norm="ortho")


def idft(v, axis: int = -1) -> np.ndarray:
    return dft(v, inverse=True, axis=axis)


def dft_matrix(n: int) -> np.ndarray:
    """Explicit ``F_N``; only used by small-size oracles."""
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def dense_lu(a):
    """Pivoted LU of a square matrix with a singularity check.

    Returns the ``(lu, piv)`` pair understood by :func:`scipy.linalg.lu_solve`.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        raise SingularMatrixError("matrix is identically zero")
    with warnings.catch_warnings():
        # singularity is reported below with our own error
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) < SINGULAR_PIVOT_RTOL * scale:
        raise SingularMatrixError(
            f"numerically singular: min pivot {np.min(pivots):.3e}, max |A| {scale:.3e}"
        )
    return lu, piv


def dense_solve(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` by LU with partial pivoting.

    ``b`` may be a vector or a matrix of right-hand sides stacked as columns.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"rhs length {b.shape[0]} does not match matrix size {a.shape[0]}")
    return scipy.linalg.lu_solve(dense_lu(a), b)


# --- QAM ---------------------------------------------------------------------

SUPPORTED_QAM_ORDERS = (4, 16)


@lru_cache(maxsize=None)
def _load_gray_table(order: int):
    if order not in SUPPORTED_QAM_ORDERS:
        raise ValueError(f"unsupported QAM order {order}; choose from {SUPPORTED_QAM_ORDERS}")
    text = resources.files("ofdma_cfo.data").joinpath(f"qam{order}.txt").read_text()
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    bps = int(np.log2(order))
    points = np.zeros(order, dtype=complex)
    seen = set()
    for bits, re, im in rows:
        if len(bits) != bps:
            raise ValueError(f"bad Gray table row {bits!r} for order {order}")
        idx = int(bits, 2)
        seen.add(idx)
        points[idx] = complex(float(re), float(im))
    if len(seen) != order:
        raise ValueError(f"Gray table for order {order} is incomplete")
    points /= np.sqrt(np.mean(np.abs(points) ** 2))
    points.setflags(write=False)
    return points


def qam_constellation(order: int) -> np.ndarray:
    """Unit-energy Gray constellation; entry ``i`` is the point for bit label ``i``."""
    return _load_gray_table(order)


def bits_per_symbol(order: int) -> int:
    qam_constellation(order)
    return int(np.log2(order))


def qam_map(bits, order: int) -> np.ndarray:
    """Map a bit array (last axis) to QAM symbols, MSB first within each symbol."""
    const = qam_constellation(order)
    k = bits_per_symbol(order)
    bits = np.asarray(bits)
    if bits.shape[-1] % k:
        raise ValueError(f"bit count {bits.shape[-1]} not divisible by {k}")
    grouped = bits.reshape(bits.shape[:-1] + (-1, k)).astype(np.int64)
    labels = grouped @ (1 << np.arange(k - 1, -1, -1))
    return const[labels]


def qam_demap(symbols, order: int) -> np.ndarray:
    """Nearest-neighbour hard decision back to bits.

    Exact ties resolve to the lower Gray label (``argmin`` keeps the first hit).
    """
    const = qam_constellation(order)
    k = bits_per_symbol(order)
    symbols = np.asarray(symbols, dtype=complex)
    dist = np.abs(symbols[..., None] - const) ** 2
    labels = np.argmin(dist, axis=-1)
    shifts = np.arange(k - 1, -1, -1)
    bits = (labels[..., None] >> shifts) & 1
    return bits.reshape(symbols.shape[:-1] + (-1,)).astype(np.uint8)


# --- random streams ----------------------------------------------------------

class RngStream:
    """Reproducible random stream addressed by ``(seed, stream_id)``.

    Backed by the counter-based Philox generator seeded through a
    :class:`numpy.random.SeedSequence` whose spawn key is the stream id, so a
    given address produces the same sequence everywhere. ``stream_id`` may be
    an int or a tuple of ints; :meth:`child` extends it hierarchically.
    """

    def __init__(self, seed: int, stream_id=0):
        if isinstance(stream_id, (int, np.integer)):
            stream_id = (int(stream_id),)
        self.seed = int(seed)
        self.stream_id = tuple(int(s) for s in stream_id)
        self.generator = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(self.seed, spawn_key=self.stream_id))
        )

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + tuple(ids))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def gaussian_noise(n, variance: float, rng) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples, ``CN(0, variance)``.

    ``n`` may be an int or a shape tuple. Real and imaginary parts each have
    variance ``variance / 2``.
    """
    if variance < 0:
        raise ValueError(f"noise variance must be nonnegative, got {variance}")
    gen = as_generator(rng)
    shape = (n,) if np.isscalar(n) else tuple(n)
    z = gen.standard_normal(shape + (2,))
    return np.sqrt(variance / 2.0) * (z[..., 0] + 1j * z[..., 1])
