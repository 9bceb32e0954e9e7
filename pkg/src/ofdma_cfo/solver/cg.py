"""Conjugate-gradient MMSE detection baseline."""
from __future__ import annotations

import numpy as np

CURVATURE_FLOOR = 1e-30
_EXACT = 4 * np.finfo(float).eps


def cg_mmse(lam, rbar, noise_ratio: float = 0.0, n_iter: int = 32, tol=None,
            return_info: bool = False):
    """CG on ``(Lambda^H Lambda + noise_ratio I) x = Lambda^H rbar`` from ``x = 0``.

    ``rbar`` is a vector or an ``(N, m)`` matrix of independent right-hand
    sides, each advanced with its own step sizes. Exactly ``n_iter`` iterations
    run unless ``tol`` (relative residual) is given or a column converges
    to machine precision. A column whose curvature ``p^H A p`` drops below
    ``1e-30`` before converging is frozen and reported in ``info["breakdown"]``.
    """
    if n_iter < 1:
        raise ValueError("need at least one CG iteration")
    if noise_ratio < 0:
        raise ValueError("noise ratio must be nonnegative")
    lam = np.asarray(lam, dtype=complex)
    rbar = np.asarray(rbar, dtype=complex)
    vec = rbar.ndim == 1
    b_rhs = lam.conj().T @ (rbar[:, None] if vec else rbar)

    def apply(v):
        return lam.conj().T @ (lam @ v) + noise_ratio * v

    x = np.zeros_like(b_rhs)
    r = b_rhs.copy()
    p = r.copy()
    rr = np.sum(np.abs(r) ** 2, axis=0)
    bnorm = np.sqrt(np.sum(np.abs(b_rhs) ** 2, axis=0))
    active = rr > 0
    breakdown = np.zeros(rr.shape, dtype=bool)
    iters = 0
    for _ in range(n_iter):
        if not np.any(active):
            break
        iters += 1
        ap = apply(p)
        curv = np.real(np.sum(p.conj() * ap, axis=0))
        bad = active & (curv < CURVATURE_FLOOR)
        breakdown |= bad
        active &= ~bad
        alpha = np.where(active, rr / np.where(active, curv, 1.0), 0.0)
        x += alpha * p
        r -= alpha * ap
        rr_new = np.sum(np.abs(r) ** 2, axis=0)
        done = np.sqrt(rr_new) <= _EXACT * bnorm
        if tol is not None:
            done |= np.sqrt(rr_new) <= tol * bnorm
        beta = np.where(active & ~done, rr_new / np.where(rr > 0, rr, 1.0), 0.0)
        p = r + beta * p
        rr = rr_new
        active &= ~done
    out = x[:, 0] if vec else x
    if return_info:
        return out, {"iterations": iters, "breakdown": breakdown}
    return out


def mmse_dense(lam, rbar, noise_ratio: float):
    """Direct MMSE estimate; oracle for :func:`cg_mmse`."""
    from ..numerics import dense_solve

    lam = np.asarray(lam, dtype=complex)
    a = lam.conj().T @ lam + noise_ratio * np.eye(lam.shape[1])
    return dense_solve(a, lam.conj().T @ np.asarray(rbar, dtype=complex))
