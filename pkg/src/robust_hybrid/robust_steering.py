"""Expected array response under uniform misalignment, and its dominant bases."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .array_channel import ArrayGeometry, MisalignmentModel, PathSet

__all__ = [
    "ExpectedResponse",
    "BasisMatrix",
    "UnsupportedConfiguration",
    "expected_array_response",
    "expected_steering",
    "build_expected_response_matrix",
    "dominant_basis",
]


class UnsupportedConfiguration(ValueError):
    pass


@dataclass(frozen=True)
class ExpectedResponse:
    vector: np.ndarray
    theta_est: float
    bound: float


@dataclass(frozen=True)
class BasisMatrix:
    """M x N_RF matrix with orthonormal columns, plus all singular values of the source matrix."""

    matrix: np.ndarray
    singular_values: np.ndarray

    @property
    def num_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_columns(self) -> int:
        return self.matrix.shape[1]


def expected_steering(geom: ArrayGeometry, theta_est, bound: float) -> np.ndarray:
    """Vectorised closed form of the expected steering vector.

    Element m (0-based) is ``exp(j*pi*m*cos(t)) * sinc(m*bound*sin(t)) / sqrt(M)``
    with ``sinc(x) = sin(pi x)/(pi x)``. A scalar ``theta_est`` gives shape
    ``(M,)``; an array gives one column per angle.
    """
    if not math.isclose(geom.spacing_wavelengths, 0.5):
        raise UnsupportedConfiguration(
            f"closed-form expected response requires half-wavelength spacing, got d/lambda={geom.spacing_wavelengths}"
        )
    m = np.arange(geom.num_elements)
    th = np.asarray(theta_est, dtype=float)
    nominal = np.exp(1j * np.pi * np.multiply.outer(m, np.cos(th)))
    # np.sinc is the normalised sinc; sinc(0) == 1 keeps bound == 0 exact
    taper = np.sinc(bound * np.multiply.outer(m, np.sin(th)))
    return nominal * taper / math.sqrt(geom.num_elements)


def expected_array_response(geom: ArrayGeometry, theta_est: float, model: MisalignmentModel) -> ExpectedResponse:
    vec = expected_steering(geom, float(theta_est), model.bound)
    return ExpectedResponse(vec, float(theta_est), model.bound)


def build_expected_response_matrix(
    paths: PathSet,
    side: Literal["transmitter", "receiver"],
    geom: ArrayGeometry,
    model: MisalignmentModel,
) -> np.ndarray:
    """L x M matrix whose row l is ``conj(gain_l) * a_e(theta_hat_l)^H``.

    The transmitter side uses the AoD estimates, the receiver side the AoA
    estimates. Pass ``MisalignmentModel(0)`` for the nominal (non-robust)
    responses.
    """
    if side == "transmitter":
        angles = paths.aod_est
    elif side == "receiver":
        angles = paths.aoa_est
    else:
        raise ValueError(f"side must be 'transmitter' or 'receiver', got {side!r}")
    responses = expected_steering(geom, angles, model.bound)  # M x L
    return np.conj(paths.gains)[:, None] * responses.conj().T


def dominant_basis(A: np.ndarray, n_rf: int) -> BasisMatrix:
    """First ``n_rf`` right singular vectors of ``A``.

    When ``n_rf`` exceeds the rank of ``A`` the extra columns come from the
    full SVD's null-space completion and carry no energy of ``A``.
    """
    A = np.asarray(A)
    M = A.shape[1]
    if int(n_rf) != n_rf or not 1 <= n_rf <= M:
        raise ValueError(f"n_rf must be an integer in [1, {M}], got {n_rf!r}")
    full = n_rf > min(A.shape)
    _, s, vh = np.linalg.svd(A, full_matrices=full)
    return BasisMatrix(vh[:n_rf].conj().T, s)
