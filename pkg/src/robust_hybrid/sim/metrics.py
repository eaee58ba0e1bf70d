"""Spectral efficiency of a linear precoder/combiner chain."""

from __future__ import annotations

import warnings

import numpy as np

__all__ = ["NumericalDegeneracy", "spectral_efficiency", "as_matrix"]

_RIDGE = 1e-12


class NumericalDegeneracy(ArithmeticError):
    pass


def as_matrix(obj) -> np.ndarray:
    """Full ``analog @ digital`` product for hybrid objects, the array itself otherwise."""
    full = getattr(obj, "full", None)
    return np.asarray(full if full is not None else obj)


def spectral_efficiency(H, precoder, combiner, noise_var: float, total_power: float = 1.0, n_s=None, regularize=True):
    """Gaussian-signalling rate in bits/s/Hz.

    ``log2 det(I + P/(N_s sigma^2) (W^H W)^-1 W^H H F F^H H^H W)`` with
    ``F`` and ``W`` the full precoder and combiner. A rank-deficient ``W``
    gets a ``1e-12`` ridge on ``W^H W`` (with a RuntimeWarning) unless
    ``regularize`` is False, in which case :class:`NumericalDegeneracy` is
    raised.
    """
    F = as_matrix(precoder)
    W = as_matrix(combiner)
    n_s = F.shape[1] if n_s is None else n_s
    if not noise_var > 0:
        raise ValueError(f"noise_var must be > 0, got {noise_var!r}")

    gram = W.conj().T @ W
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        if not regularize:
            raise NumericalDegeneracy("combiner Gram matrix W^H W is singular") from None
        warnings.warn("singular combiner Gram matrix; adding a ridge", RuntimeWarning, stacklevel=2)
        chol = np.linalg.cholesky(gram + _RIDGE * np.eye(gram.shape[0]))
    # whiten the noise: with W^H W = C C^H, C^-1 W^H H F sees white noise
    G = np.linalg.solve(chol, W.conj().T @ H @ F)
    s = np.linalg.svd(G, compute_uv=False)
    rate = np.sum(np.log2(1.0 + total_power / (n_s * noise_var) * s**2))
    return max(float(rate), 0.0)
