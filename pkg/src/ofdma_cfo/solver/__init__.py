"""Detection solvers for the CFO interference system and their cost models."""

from .._validation import check_square_matrix
from ..numerics import dense_solve
from .banded import (
    QuasiBandedFactorization,
    count_actual_multiplications,
    factorize_quasi_banded,
    solve_quasi_banded,
)
from .cg import cg_mmse, mmse_dense
from .complexity import ComplexityParams, band_term, complexity_cm, ratio_to_cg
from .estimators import CGMMSE, BandedZF, DenseMMSE, DirectZF, NoCompensation, QuasiBandedZF


def solve_direct_zf(lam, rbar):
    return dense_solve(check_square_matrix(lam), rbar)


def solve_cg_mmse(lam, rbar, noise_ratio=0.0, n_iter=32, tol=None):
    return cg_mmse(check_square_matrix(lam), rbar, noise_ratio, n_iter, tol)


__all__ = [
    "BandedZF", "CGMMSE", "ComplexityParams", "DenseMMSE", "DirectZF", "NoCompensation",
    "QuasiBandedFactorization", "QuasiBandedZF", "band_term", "cg_mmse", "complexity_cm",
    "count_actual_multiplications", "factorize_quasi_banded", "mmse_dense", "ratio_to_cg",
    "solve_cg_mmse", "solve_direct_zf", "solve_quasi_banded",
]
