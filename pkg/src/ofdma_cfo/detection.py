"""Composite channel, one-tap equalization, and BER / SINR statistics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import channel_freq_response, check_cfos
from .numerics import bits_per_symbol, qam_demap
from .receiver import receiver_offset, timing_shift
from .waveform import AllocationMap, OfdmaConfig

SINR_CAP_DB = 200.0


def build_composite_channel(channels, cfos, alloc: AllocationMap, cfg: OfdmaConfig,
                            windowed: bool = True) -> np.ndarray:
    """Per-subcarrier gain seen after CFO compensation.

    On bins of user ``i`` the gain is ``exp(2j*pi*eps_i*N_off/N) * H_i[k]``,
    where ``N_off`` is the first retained sample (``N_GI`` for the windowed
    receiver, ``N_CP`` for the plain one). If ``N_CS != N_w/2`` the windowed
    core is circularly shifted and a linear phase ``exp(2j*pi*k*shift/N)`` is
    included as well. Unused bins get gain 0.

    ``channels`` has shape ``(..., K, N_ch)``; the result ``(..., N)``.
    """
    eps = check_cfos(cfos)
    n = cfg.n_subcarriers
    resp = channel_freq_response(channels, n)
    off = receiver_offset(cfg, windowed)
    shift = timing_shift(cfg, windowed)
    gains = np.zeros(resp.shape[:-2] + (n,), dtype=complex)
    for i, idx in enumerate(alloc.sets):
        phase = np.exp(2j * np.pi * (eps[..., i, None] * off + idx * shift) / n)
        gains[..., idx] = phase * resp[..., i, idx]
    return gains


def equalize_and_demap(x_hat, gains, order: int, active=None):
    """Divide by the composite gain and slice to the nearest QAM point.

    Returns ``(bits, soft, erased)`` restricted to ``active`` bins (all bins by
    default). ``bits`` has shape ``(..., n_active * log2(order))``. Bins with
    zero gain are marked in ``erased``; their soft value is 0.
    """
    x_hat = np.asarray(x_hat, dtype=complex)
    gains = np.asarray(gains, dtype=complex)
    if active is not None:
        x_hat = x_hat[..., active]
        gains = np.broadcast_to(gains, x_hat.shape[:-1] + gains.shape[-1:])[..., active]
    erased = gains == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        soft = np.where(erased, 0.0, x_hat / np.where(erased, 1.0, gains))
    return qam_demap(soft, order), soft, erased


def measure_sinr(soft, reference) -> float:
    """``10 log10(sum |ref|^2 / sum |soft - ref|^2)``, capped at 200 dB."""
    soft = np.asarray(soft, dtype=complex)
    reference = np.asarray(reference, dtype=complex)
    if soft.shape != reference.shape:
        raise ValueError("soft and reference must have equal shapes")
    return sinr_from_powers(np.sum(np.abs(reference) ** 2), np.sum(np.abs(soft - reference) ** 2))


def sinr_from_powers(signal: float, residual: float) -> float:
    if signal <= 0:
        raise ValueError("reference power must be positive")
    if residual <= 0:
        return SINR_CAP_DB
    return float(min(10.0 * np.log10(signal / residual), SINR_CAP_DB))


@dataclass
class DetectionReport:
    bit_errors: int = 0
    bits_total: int = 0
    signal_power: float = 0.0
    residual_power: float = 0.0
    seeds: dict = field(default_factory=dict)
    frames: int = 0
    frame_sinr_db_sum: float = 0.0

    def __post_init__(self):
        if self.bit_errors < 0 or self.bits_total < 0 or self.bit_errors > self.bits_total:
            raise ValueError("inconsistent error counters")
        if self.frames < 0:
            raise ValueError("negative frame count")

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total if self.bits_total else float("nan")

    @property
    def sinr_db(self):
        """Pooled estimate: total symbol power over total residual power."""
        if self.signal_power <= 0:
            return None
        return sinr_from_powers(self.signal_power, self.residual_power)

    @property
    def mean_sinr_db(self):
        """Average of the per-frame SINR estimates (dB)."""
        return self.frame_sinr_db_sum / self.frames if self.frames else None

    def __add__(self, other: "DetectionReport") -> "DetectionReport":
        return DetectionReport(
            self.bit_errors + other.bit_errors,
            self.bits_total + other.bits_total,
            self.signal_power + other.signal_power,
            self.residual_power + other.residual_power,
            {**self.seeds, **other.seeds},
            self.frames + other.frames,
            self.frame_sinr_db_sum + other.frame_sinr_db_sum,
        )


def compute_ber(decided_bits, true_bits, erased=None, order: int | None = None) -> DetectionReport:
    """Count bit errors; every bit of an erased symbol counts as wrong."""
    decided_bits = np.asarray(decided_bits)
    true_bits = np.asarray(true_bits)
    if decided_bits.shape != true_bits.shape:
        raise ValueError(f"bit arrays differ in shape: {decided_bits.shape} vs {true_bits.shape}")
    wrong = decided_bits != true_bits
    if erased is not None and np.any(erased):
        k = bits_per_symbol(order)
        per_sym = np.repeat(np.asarray(erased), k, axis=-1)
        wrong = wrong | per_sym
    return DetectionReport(int(np.count_nonzero(wrong)), int(true_bits.size))
