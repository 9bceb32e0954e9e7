"""CFO compensators with the scikit-learn estimator interface.

``fit`` takes the interference matrix and prepares the solver; ``predict``
(alias ``transform``) maps DFT outputs, one received symbol per row, to
estimates of the composite symbols ``x``.

>>> zf = QuasiBandedZF(half_bandwidth=10).fit(lam)      # doctest: +SKIP
>>> x_hat = zf.predict(rbar)                            # doctest: +SKIP
"""
from __future__ import annotations

import logging

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_received, check_square_matrix
from ..exceptions import NearSingularPivotError
from ..numerics import dense_lu
from ..receiver import extract_quasi_banded
from .banded import factorize_quasi_banded
from .cg import cg_mmse

logger = logging.getLogger(__name__)


class _Compensator(TransformerMixin, BaseEstimator):
    def fit(self, X, y=None):
        lam = check_square_matrix(X, "interference matrix")
        self.n_features_in_ = lam.shape[0]
        self._fit(lam)
        return self

    def predict(self, X):
        check_is_fitted(self)
        rbar, vector = check_received(X, self.n_features_in_)
        out = self._solve(rbar.T).T
        return out[0] if vector else out

    def transform(self, X):
        return self.predict(X)


class DirectZF(_Compensator):
    """Zero forcing with the full interference matrix (pivoted dense LU)."""

    def _fit(self, lam):
        self.lu_ = dense_lu(lam)

    def _solve(self, rhs):
        return scipy.linalg.lu_solve(self.lu_, rhs)


class QuasiBandedZF(_Compensator):
    """Zero forcing with the quasi-banded (or banded) part of the matrix.

    Parameters
    ----------
    half_bandwidth : int
        Entries within cyclic distance ``half_bandwidth`` of the diagonal are kept.
    corners : bool
        Keep the wrap-around corner blocks. ``False`` gives the plain banded
        approximation.
    fallback : bool
        On a vanishing band pivot, log a warning and solve the same
        approximation by pivoted dense LU instead of raising.
    """

    def __init__(self, half_bandwidth=10, corners=True, fallback=True):
        self.half_bandwidth = half_bandwidth
        self.corners = corners
        self.fallback = fallback

    def _fit(self, lam):
        self.approx_ = extract_quasi_banded(lam, self.half_bandwidth, corners=self.corners)
        self.dense_lu_ = None
        try:
            self.factorization_ = factorize_quasi_banded(self.approx_)
        except NearSingularPivotError as exc:
            if not self.fallback:
                raise
            logger.warning("quasi-banded LU failed (%s); falling back to dense solve", exc)
            self.factorization_ = None
            self.dense_lu_ = dense_lu(self.approx_.to_dense())

    def _solve(self, rhs):
        if self.factorization_ is None:
            return scipy.linalg.lu_solve(self.dense_lu_, rhs)
        return self.factorization_.solve(rhs)


def BandedZF(half_bandwidth=10, fallback=True):
    return QuasiBandedZF(half_bandwidth=half_bandwidth, corners=False, fallback=fallback)


class CGMMSE(_Compensator):
    """MMSE by conjugate gradient with a fixed iteration budget.

    ``noise_ratio`` is the noise-to-symbol power ratio; zero gives ZF.
    """

    def __init__(self, noise_ratio=0.0, n_iter=32, tol=None):
        self.noise_ratio = noise_ratio
        self.n_iter = n_iter
        self.tol = tol

    def _fit(self, lam):
        if self.n_iter < 1:
            raise ValueError("n_iter must be at least 1")
        self.lam_ = lam

    def _solve(self, rhs):
        x, info = cg_mmse(self.lam_, rhs, self.noise_ratio, self.n_iter, self.tol,
                          return_info=True)
        self.breakdown_ = info["breakdown"]
        if np.any(self.breakdown_):
            logger.warning("CG curvature breakdown on %d of %d columns",
                           int(np.sum(self.breakdown_)), rhs.shape[1])
        return x


class DenseMMSE(_Compensator):
    """MMSE by a direct solve of the regularized normal equations (oracle for :class:`CGMMSE`)."""

    def __init__(self, noise_ratio=0.0):
        self.noise_ratio = noise_ratio

    def _fit(self, lam):
        if self.noise_ratio < 0:
            raise ValueError("noise ratio must be nonnegative")
        self.lam_h_ = lam.conj().T
        self.lu_ = dense_lu(self.lam_h_ @ lam + self.noise_ratio * np.eye(lam.shape[0]))

    def _solve(self, rhs):
        return scipy.linalg.lu_solve(self.lu_, self.lam_h_ @ rhs)


class NoCompensation(_Compensator):
    """Pass-through baseline: treats the interference matrix as identity."""

    def _fit(self, lam):
        pass

    def _solve(self, rhs):
        return np.array(rhs)
