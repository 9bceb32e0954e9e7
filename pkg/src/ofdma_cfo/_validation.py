"""Input checks shared by the estimators."""
import numpy as np


def check_square_matrix(a, name="matrix"):
    a = getattr(a, "matrix", a)
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"{name} must be a nonempty square 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf")
    return a


def check_received(x, n_features):
    """Return ``(X, was_vector)`` with ``X`` of shape ``(n_samples, n_features)``."""
    x = np.asarray(x, dtype=complex)
    vector = x.ndim == 1
    if vector:
        x = x[None, :]
    if x.ndim != 2:
        raise ValueError(f"expected a 1-D or 2-D array, got {x.ndim} dimensions")
    if x.shape[1] != n_features:
        raise ValueError(f"X has {x.shape[1]} features, estimator was fitted with {n_features}")
    if not np.all(np.isfinite(x)):
        raise ValueError("X contains NaN or Inf")
    return x, vector
