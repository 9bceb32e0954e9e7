"""Per-user multipath channels, carrier frequency offsets and uplink superposition."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .numerics import as_generator, gaussian_noise


DEFAULT_PROFILE = "sui2-like.profile"


@dataclass(frozen=True)
class ChannelProfile:
    """Tap-delay-line power profile.

    ``delays`` are integer sample delays (strictly increasing), ``powers_db``
    the relative tap powers. Linear powers are normalized to sum to one.
    """

    delays: tuple
    powers_db: tuple

    def __post_init__(self):
        if not self.delays or len(self.delays) != len(self.powers_db):
            raise ValueError("profile needs matching, nonempty delay and power lists")
        d = np.asarray(self.delays)
        if np.any(d < 0) or np.any(np.diff(d) <= 0):
            raise ValueError("tap delays must be nonnegative and strictly increasing")
        if not np.all(np.isfinite(self.powers_db)):
            raise ValueError("tap powers must be finite")

    @property
    def length(self) -> int:
        """Impulse response length ``N_ch`` in samples."""
        return int(self.delays[-1]) + 1

    @property
    def linear_powers(self) -> np.ndarray:
        p = 10.0 ** (np.asarray(self.powers_db, dtype=float) / 10.0)
        return p / p.sum()

    @classmethod
    def flat(cls) -> "ChannelProfile":
        return cls((0,), (0.0,))


def parse_profile(text: str) -> ChannelProfile:
    delays, powers = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"profile line {lineno}: expected 'delay_samples power_db'")
        delays.append(int(parts[0]))
        powers.append(float(parts[1]))
    return ChannelProfile(tuple(delays), tuple(powers))


def load_profile(path=None) -> ChannelProfile:
    """Read a profile file; ``None`` or the bundled name loads the default."""
    if path is None or str(path) == DEFAULT_PROFILE:
        text = resources.files("ofdma_cfo.data").joinpath(DEFAULT_PROFILE).read_text()
    else:
        text = Path(path).read_text()
    return parse_profile(text)


def draw_channel(profile: ChannelProfile, rng, size=()) -> np.ndarray:
    """Rayleigh realization(s) of ``profile``, zero-filled between listed taps.

    Returns shape ``size + (N_ch,)``; each listed tap is ``CN(0, p_l)``.
    """
    size = (size,) if np.isscalar(size) else tuple(size)
    h = np.zeros(size + (profile.length,), dtype=complex)
    taps = gaussian_noise(size + (len(profile.delays),), 1.0, rng)
    h[..., np.asarray(profile.delays)] = taps * np.sqrt(profile.linear_powers)
    return h


def channel_freq_response(h, n: int) -> np.ndarray:
    """``H[k] = sum_n h[n] exp(-2j*pi*n*k/N)`` (no ``1/sqrt(N)`` factor)."""
    h = np.asarray(h, dtype=complex)
    if h.shape[-1] > n:
        raise ValueError(f"channel length {h.shape[-1]} exceeds DFT size {n}")
    return np.fft.fft(h, n=n, axis=-1)


def check_cfos(cfos) -> np.ndarray:
    eps = np.atleast_1d(np.asarray(cfos, dtype=float))
    if not np.all(np.isfinite(eps)):
        raise ValueError("CFOs must be finite")
    if np.any((eps <= -0.5) | (eps > 0.5)):
        warnings.warn("CFO outside (-0.5, 0.5]; compensation still applies", stacklevel=2)
    return eps


def draw_cfos(n_users: int, rng) -> np.ndarray:
    """Uniform normalized CFOs on ``(-0.5, 0.5]``."""
    return 0.5 - as_generator(rng).random(n_users)


def convolve_truncated(x, h) -> np.ndarray:
    """Linear convolution along the last axis, keeping the first ``len(x)`` samples.

    Leading axes of ``x`` and ``h`` broadcast. Only nonzero taps are visited.
    """
    x = np.asarray(x, dtype=complex)
    h = np.asarray(h, dtype=complex)
    shape = np.broadcast_shapes(x.shape[:-1], h.shape[:-1]) + (x.shape[-1],)
    y = np.zeros(shape, dtype=complex)
    n = x.shape[-1]
    taps = np.flatnonzero(np.any(h.reshape(-1, h.shape[-1]) != 0, axis=0))
    for d in taps:
        if d >= n:
            break
        y[..., d:] += h[..., d : d + 1] * x[..., : n - d]
    return y


def apply_uplink(signals, channels, cfos, noise_var: float = 0.0, rng=None,
                 n_subcarriers: int | None = None) -> np.ndarray:
    """Superpose the users' received signals at the base station.

    Parameters
    ----------
    signals : array, shape (..., K, N_T)
        Cyclically extended transmit symbols.
    channels : array, shape (..., K, N_ch)
        Channel impulse responses.
    cfos : array, shape (K,) or (..., K)
        Normalized CFOs.
    noise_var : float
        AWGN variance per sample; ``rng`` is required when positive.
    n_subcarriers : int, optional
        ``N`` in the CFO ramp ``exp(2j*pi*eps*n/N)``. Defaults to ``N_T``,
        which is only right for unextended symbols.
    """
    signals = np.asarray(signals, dtype=complex)
    channels = np.asarray(channels, dtype=complex)
    eps = check_cfos(cfos)
    if signals.ndim < 2:
        raise ValueError("signals must have shape (..., K, N_T)")
    k, n_t = signals.shape[-2:]
    if channels.shape[-2] != k or eps.shape[-1] != k:
        raise ValueError(f"need one channel and one CFO per user ({k} users)")
    n = n_t if n_subcarriers is None else n_subcarriers
    y = convolve_truncated(signals, channels)
    ramp = np.exp(2j * np.pi * eps[..., :, None] * np.arange(n_t) / n)
    out = np.sum(y * ramp, axis=-2)
    if noise_var > 0:
        if rng is None:
            raise ValueError("noise requested without a random stream")
        out = out + gaussian_noise(out.shape, noise_var, rng)
    return out
