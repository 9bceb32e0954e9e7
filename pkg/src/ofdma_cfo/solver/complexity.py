"""Closed-form complex-multiplication counts of the compensation techniques."""
from __future__ import annotations

import math
from dataclasses import dataclass

TECHNIQUES = ("direct_zf", "cg", "quasi_banded")


@dataclass(frozen=True)
class ComplexityParams:
    n: int
    k: int
    d: int
    n_iter: int = 32
    n_window: int = 0

    def __post_init__(self):
        if min(self.n, self.k, self.d, self.n_iter) < 1 or self.n_window < 0:
            raise ValueError(f"invalid complexity parameters: {self}")


def complexity_cm(technique: str, p: ComplexityParams) -> float:
    n, k, d, i = p.n, p.k, p.d, p.n_iter
    lg = math.log2(n)
    if technique == "direct_zf":
        return n**3 / 3 + 2 * n**2 + k * n / 2 * lg
    if technique == "cg":
        return i * (k * n * lg + 2 * k * n + 5 * n) + k * n * lg + 2 * k * n
    if technique == "quasi_banded":
        return ((4 * n - 10) * d**2 + 8 * n * d - 16 / 3 * d**3 - 11 / 3 * d
                + k * n / 2 * lg + p.n_window)
    raise ValueError(f"unknown technique {technique!r}; choose from {TECHNIQUES}")


def band_term(p: ComplexityParams) -> float:
    """Quasi-banded count without the demapping and windowing terms."""
    n, d = p.n, p.d
    return (4 * n - 10) * d**2 + 8 * n * d - 16 / 3 * d**3 - 11 / 3 * d


def ratio_to_cg(technique: str, p: ComplexityParams) -> float:
    return complexity_cm(technique, p) / complexity_cm("cg", p)
