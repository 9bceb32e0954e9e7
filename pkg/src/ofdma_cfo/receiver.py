"""Windowed OFDMA receiver and the CFO interference matrix.

The receiver discards the guard samples, applies a raised-cosine window of
length ``N + N_w``, folds the ``N_w/2`` excess samples on each side onto the
opposite end and takes an ``N``-point unitary DFT. Because the folded window
sums to one everywhere, the chain is the identity at zero CFO.

For a single user with CFO ``eps`` the map from transmitted subcarriers to
DFT outputs is circulant, ``A[m, k] = a[(k - m) mod N]`` with

    a[q] = 1/N * sum_p w[p] exp(2j*pi*eps*p/N) exp(2j*pi*q*(p - N_w/2)/N),

so the interference matrix is assembled column by column from one length-N
kernel per user.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import check_cfos
from .numerics import dft
from .waveform import AllocationMap, OfdmaConfig

POWER_FLOOR_DB = -100.0


# --- window ------------------------------------------------------------------

@dataclass(frozen=True)
class ReceiverWindow:
    n: int
    n_window: int
    weights: np.ndarray = field(repr=False)

    @property
    def excess(self) -> int:
        return self.n_window // 2

    def folded(self) -> np.ndarray:
        """Window after time-domain aliasing onto ``N`` samples."""
        return alias(self.weights, self.n, self.n_window)


def make_window(n: int, n_window: int) -> ReceiverWindow:
    """Discrete raised-cosine window of length ``n + n_window``.

    The rising edge is sampled at half-sample offsets,
    ``w[k] = (1 - cos(pi*(k + 0.5)/n_window)) / 2`` for ``k < n_window``, which
    makes ``w[k] + w[k + n] == 1`` hold without endpoint special cases.
    """
    if n_window <= 0 or n_window % 2 or n_window >= n:
        raise ValueError(f"window roll-off must be even and in (0, N), got {n_window}")
    k = np.arange(n_window)
    ramp = 0.5 * (1.0 - np.cos(np.pi * (k + 0.5) / n_window))
    w = np.ones(n + n_window)
    w[:n_window] = ramp
    w[n:] = 1.0 - ramp
    w.setflags(write=False)
    return ReceiverWindow(n, n_window, w)


def window_spectrum(n: int, n_window: int, f):
    """Closed-form magnitudes ``(|G(f)|, |C(f)|)`` of the continuous window.

    Frequencies are in cycles per sample, with ``T_FFT = n`` and ``T_w = n_window``.
    ``|C|`` takes its limit ``pi/4`` at ``f*T_w = 1/2``.
    """
    f = np.asarray(f, dtype=float)
    x = f * n_window
    den = 1.0 - 4.0 * x**2
    near = np.isclose(np.abs(x), 0.5, rtol=0.0, atol=1e-12)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(near, np.pi / 4, np.abs(np.cos(np.pi * x) / np.where(near, 1.0, den)))
    g = n * np.abs(np.sinc(f * n)) * c
    return g, c


def default_band_halfwidth(n: int, n_window: int) -> int:
    """``floor(1.1 * N / N_w)``, evaluated in exact integer arithmetic."""
    if n_window <= 0:
        raise ValueError("band half-width rule needs a positive window length")
    return (11 * n) // (10 * n_window)


# --- receive chain -----------------------------------------------------------

def receiver_offset(cfg: OfdmaConfig, windowed: bool) -> int:
    """Index of the first retained sample within the extended symbol."""
    return cfg.n_guard if windowed else cfg.n_cp


def timing_shift(cfg: OfdmaConfig, windowed: bool) -> int:
    """Circular shift between the retained core and the transmitted symbol.

    Zero for the plain receiver and for ``N_CS == N_w/2``.
    """
    return cfg.n_cs - cfg.n_window // 2 if windowed else 0


def remove_gi(r, cfg: OfdmaConfig, windowed: bool = True) -> np.ndarray:
    """Drop guard samples, keeping ``N + N_w`` (windowed) or ``N`` (plain) samples."""
    r = np.asarray(r)
    if r.shape[-1] != cfg.n_total:
        raise ValueError(f"expected {cfg.n_total} samples, got {r.shape[-1]}")
    if cfg.n_guard < 0:
        raise ValueError("cyclic extension too short for the window")
    start = receiver_offset(cfg, windowed)
    keep = cfg.n_subcarriers + (cfg.n_window if windowed else 0)
    return r[..., start : start + keep]


def alias(y, n: int, n_window: int) -> np.ndarray:
    """Fold a length ``n + n_window`` signal onto ``n`` samples (last axis)."""
    y = np.asarray(y)
    if y.shape[-1] != n + n_window:
        raise ValueError(f"expected {n + n_window} samples, got {y.shape[-1]}")
    h = n_window // 2
    out = np.array(y[..., h : h + n])
    if h:
        out[..., n - h :] += y[..., :h]
        out[..., :h] += y[..., n + h :]
    return out


def window_and_alias(r, win: ReceiverWindow) -> np.ndarray:
    return alias(np.asarray(r) * win.weights, win.n, win.n_window)


def receiver_dft(r_prime) -> np.ndarray:
    return dft(r_prime)


class OfdmaReceiver:
    """Front end from received extended samples to DFT outputs.

    ``windowed=False`` is the conventional CP-removal receiver (``N_w = 0``).
    """

    def __init__(self, cfg: OfdmaConfig, windowed: bool = True):
        if windowed and cfg.n_window == 0:
            raise ValueError("windowed receiver requested but the config has N_w = 0")
        self.cfg = cfg
        self.windowed = windowed
        self.window = make_window(cfg.n_subcarriers, cfg.n_window) if windowed else None

    @property
    def n_window(self) -> int:
        return self.cfg.n_window if self.windowed else 0

    @property
    def offset(self) -> int:
        return receiver_offset(self.cfg, self.windowed)

    @property
    def shift(self) -> int:
        return timing_shift(self.cfg, self.windowed)

    def __call__(self, r_ext) -> np.ndarray:
        r = remove_gi(r_ext, self.cfg, self.windowed)
        if self.windowed:
            r = window_and_alias(r, self.window)
        return receiver_dft(r)

    def interference_matrix(self, cfos, alloc: AllocationMap) -> "InterferenceMatrix":
        return build_interference_matrix(cfos, alloc, self.cfg, self.windowed)


# --- interference matrix -----------------------------------------------------

@dataclass(frozen=True)
class InterferenceMatrix:
    matrix: np.ndarray = field(repr=False)
    windowed: bool
    cfos: np.ndarray
    alloc: AllocationMap = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def active_submatrix(self) -> np.ndarray:
        act = self.alloc.active
        return self.matrix[np.ix_(act, act)]


def cfo_kernel(eps: float, n: int, weights=None, n_window: int = 0) -> np.ndarray:
    """First row ``a`` of the circulant single-user interference matrix."""
    length = n + n_window
    w = np.ones(length) if weights is None else np.asarray(weights)
    v = w * np.exp(2j * np.pi * eps * np.arange(length) / n)
    z = alias(v, n, n_window)
    return np.fft.ifft(z)


def build_interference_matrix(cfos, alloc: AllocationMap, cfg: OfdmaConfig,
                              windowed: bool = True) -> InterferenceMatrix:
    """Assemble ``Lambda`` column by column from per-user circulant kernels.

    Columns of bins that no user holds are zero.
    """
    eps = check_cfos(cfos)
    n = cfg.n_subcarriers
    if len(eps) != alloc.n_users or alloc.n_subcarriers != n:
        raise ValueError("CFOs, allocation and config disagree on dimensions")
    if windowed:
        win = make_window(n, cfg.n_window)
        weights, n_w = win.weights, cfg.n_window
    else:
        weights, n_w = None, 0
    m = np.arange(n)
    lam = np.zeros((n, n), dtype=complex)
    for i, cols in enumerate(alloc.sets):
        a = cfo_kernel(eps[i], n, weights, n_w)
        lam[:, cols] = a[(cols[None, :] - m[:, None]) % n]
    return InterferenceMatrix(lam, windowed, eps, alloc)


def interference_matrix_oracle(cfos, alloc: AllocationMap, cfg: OfdmaConfig,
                               windowed: bool = True) -> np.ndarray:
    """Dense product ``sum_i F T'^T W Phi(eps_i) T' F^H Pi_i``; small sizes only."""
    from .numerics import dft_matrix

    n = cfg.n_subcarriers
    n_w = cfg.n_window if windowed else 0
    h = n_w // 2
    f = dft_matrix(n)
    ext = np.zeros((n + n_w, n))
    ext[np.arange(n + n_w), (np.arange(n + n_w) - h) % n] = 1.0
    w = np.diag(make_window(n, n_w).weights) if windowed else np.eye(n)
    lam = np.zeros((n, n), dtype=complex)
    for i, cols in enumerate(alloc.sets):
        phi = np.diag(np.exp(2j * np.pi * cfos[i] * np.arange(n + n_w) / n))
        pi = np.zeros((n, n))
        pi[cols, cols] = 1.0
        lam += f @ ext.T @ w @ phi @ ext @ f.conj().T @ pi
    return lam


# --- quasi-banded extraction -------------------------------------------------

@dataclass(frozen=True)
class QuasiBandedMatrix:
    """Entries of a square matrix within cyclic distance ``D`` of the diagonal.

    ``band[m, D+j]`` holds ``A[m, m+j]`` for ``|j| <= D`` (compact row storage,
    ``2D+1`` diagonals). ``corner_tr`` is the ``(D, D)`` block at rows ``0..D-1``,
    columns ``N-D..N-1``; ``corner_bl`` sits at the transposed position. Corner
    entries with ``|m - n| < N - D`` (or already in the band) are structural zeros.
    """

    half_bandwidth: int
    band: np.ndarray = field(repr=False)
    corner_tr: np.ndarray = field(repr=False)
    corner_bl: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.band.shape[0]

    @property
    def has_corners(self) -> bool:
        return bool(np.any(self.corner_tr) or np.any(self.corner_bl))

    def to_dense(self) -> np.ndarray:
        n, d = self.n, self.half_bandwidth
        out = np.zeros((n, n), dtype=self.band.dtype)
        m = np.arange(n)
        for j in range(-d, d + 1):
            rows = m[(m + j >= 0) & (m + j < n)]
            out[rows, rows + j] = self.band[rows, d + j]
        out[:d, n - d :] += self.corner_tr
        out[n - d :, :d] += self.corner_bl
        return out


def quasi_banded_mask(n: int, d: int, corners: bool = True) -> np.ndarray:
    diff = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    mask = diff <= d
    if corners:
        mask |= diff >= n - d
    return mask


def _check_halfwidth(n: int, d: int):
    if not 1 <= d <= n // 2:
        raise ValueError(f"band half-width must satisfy 1 <= D <= N/2, got D={d}, N={n}")


def extract_quasi_banded(lam, d: int, corners: bool = True) -> QuasiBandedMatrix:
    """Keep ``[lam]_{m,n}`` for ``|m - n| <= D`` and, with corners, ``|m - n| >= N - D``.

    ``D = N/2`` retains the whole matrix.
    """
    a = lam.matrix if isinstance(lam, InterferenceMatrix) else np.asarray(lam)
    n = a.shape[0]
    _check_halfwidth(n, d)
    band = np.zeros((n, 2 * d + 1), dtype=a.dtype)
    m = np.arange(n)
    for j in range(-d, d + 1):
        rows = m[(m + j >= 0) & (m + j < n)]
        band[rows, d + j] = a[rows, rows + j]
    tr = np.zeros((d, d), dtype=a.dtype)
    bl = np.zeros((d, d), dtype=a.dtype)
    if corners:
        diff = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
        keep = (diff >= n - d) & (diff > d)
        tr[keep[:d, n - d :]] = a[:d, n - d :][keep[:d, n - d :]]
        bl[keep[n - d :, :d]] = a[n - d :, :d][keep[n - d :, :d]]
    return QuasiBandedMatrix(d, band, tr, bl)


def extract_banded(lam, d: int) -> QuasiBandedMatrix:
    return extract_quasi_banded(lam, d, corners=False)


def offband_energy_ratio(lam, d: int) -> float:
    """``||Lambda_I||_F^2 / ||Lambda||_F^2`` for the quasi-banded split at ``d``."""
    a = lam.matrix if isinstance(lam, InterferenceMatrix) else np.asarray(lam)
    mask = quasi_banded_mask(a.shape[0], d)
    total = np.sum(np.abs(a) ** 2)
    return float(np.sum(np.abs(a[~mask]) ** 2) / total)


def interference_power_map(lam) -> np.ndarray:
    """``20 log10 |Lambda|`` per entry, floored at -100 dB."""
    a = lam.matrix if isinstance(lam, InterferenceMatrix) else np.asarray(lam)
    mag = np.abs(a)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    return np.maximum(db, POWER_FLOOR_DB)


def write_heatmap(path, power_db) -> None:
    """One row per subcarrier, space-separated dB values."""
    lines = [" ".join(f"{v:.3f}" for v in row) for row in np.asarray(power_db)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_heatmap(path) -> np.ndarray:
    return np.loadtxt(path, ndmin=2)
