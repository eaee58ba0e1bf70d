"""ULA steering vectors, sparse geometric channels and beam-misalignment draws.

All angles are in radians. Every random quantity is drawn from an explicit
``numpy.random.Generator`` so callers control reproducibility.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ArrayGeometry",
    "MisalignmentModel",
    "PathSet",
    "ChannelRealization",
    "array_response",
    "sample_misalignment",
    "draw_paths",
    "build_channel",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array.

    Parameters
    ----------
    num_elements : int
        Number of antenna elements M.
    spacing_wavelengths : float
        Element spacing d expressed in wavelengths (d / lambda).
    """

    num_elements: int
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise ValueError(f"num_elements must be a positive integer, got {self.num_elements!r}")
        if not self.spacing_wavelengths > 0:
            raise ValueError(f"spacing_wavelengths must be > 0, got {self.spacing_wavelengths!r}")

    @property
    def approx_beamwidth(self) -> float:
        """Null-to-null mainlobe width 2*lambda/(M*d) in radians (broadside heuristic)."""
        return 2.0 / (self.num_elements * self.spacing_wavelengths)


@dataclass(frozen=True, init=False)
class MisalignmentModel:
    """Uniform angle-error law on [-bound, bound] with ``bound = sqrt(3) * delta_std``."""

    delta_std: float
    bound: float

    def __init__(self, delta_std: float):
        if not delta_std >= 0:
            raise ValueError(f"delta_std must be >= 0, got {delta_std!r}")
        object.__setattr__(self, "delta_std", float(delta_std))
        object.__setattr__(self, "bound", math.sqrt(3.0) * float(delta_std))

    @classmethod
    def from_degrees(cls, delta_std_deg: float) -> "MisalignmentModel":
        return cls(math.radians(delta_std_deg))

    def pdf(self, delta):
        delta = np.asarray(delta, dtype=float)
        if self.bound == 0:
            raise ValueError("density is a point mass when delta_std = 0")
        return np.where(np.abs(delta) <= self.bound, 1.0 / (2.0 * self.bound), 0.0)

    def check_mainlobe(self, geom: ArrayGeometry) -> bool:
        """Warn if errors can leave half the (approximate) mainlobe. Returns True when inside."""
        inside = self.bound <= geom.approx_beamwidth / 2.0
        if not inside:
            warnings.warn(
                f"misalignment bound {math.degrees(self.bound):.3f} deg exceeds half the approximate "
                f"mainlobe width {math.degrees(geom.approx_beamwidth / 2):.3f} deg of a "
                f"{geom.num_elements}-element array",
                RuntimeWarning,
                stacklevel=2,
            )
        return inside


@dataclass(frozen=True)
class PathSet:
    """Per-path complex gains with true and estimated AoD/AoA (radians)."""

    gains: np.ndarray
    aod_true: np.ndarray
    aoa_true: np.ndarray
    aod_est: np.ndarray
    aoa_est: np.ndarray

    def __post_init__(self):
        n = len(self.gains)
        if n < 1:
            raise ValueError("a path set needs at least one path")
        for name in ("aod_true", "aoa_true", "aod_est", "aoa_est"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has length {len(getattr(self, name))}, expected {n}")

    @property
    def num_paths(self) -> int:
        return len(self.gains)

    def with_exact_estimates(self) -> "PathSet":
        return PathSet(self.gains, self.aod_true, self.aoa_true, self.aod_true.copy(), self.aoa_true.copy())


@dataclass(frozen=True)
class ChannelRealization:
    matrix: np.ndarray
    paths: PathSet
    tx: ArrayGeometry
    rx: ArrayGeometry

    def reconstruct(self) -> np.ndarray:
        return _channel_sum(self.paths.gains, self.paths.aoa_true, self.paths.aod_true, self.tx, self.rx)


def array_response(geom: ArrayGeometry, theta) -> np.ndarray:
    """Unit-norm ULA steering vector.

    ``theta`` may be a scalar (returns shape ``(M,)``) or an array of angles,
    in which case one column per angle is returned (shape ``(M, len(theta))``).
    """
    m = np.arange(geom.num_elements)
    th = np.asarray(theta, dtype=float)
    phase = 2.0 * np.pi * geom.spacing_wavelengths * np.multiply.outer(m, np.cos(th))
    return np.exp(1j * phase) / math.sqrt(geom.num_elements)


def sample_misalignment(model: MisalignmentModel, rng: np.random.Generator, size=None):
    """Draw angle errors uniformly on ``[-model.bound, model.bound]``."""
    if model.bound == 0:
        return 0.0 if size is None else np.zeros(size)
    return rng.uniform(-model.bound, model.bound, size=size)


def draw_paths(
    num_paths: int,
    gain_variance: float,
    model_aod: MisalignmentModel,
    model_aoa: MisalignmentModel,
    rng: np.random.Generator,
) -> PathSet:
    """Draw L paths: CN(0, gain_variance) gains, uniform [0, pi] true angles,
    and independent per-path, per-side misalignment for the estimates."""
    if int(num_paths) != num_paths or num_paths < 1:
        raise ValueError(f"num_paths must be a positive integer, got {num_paths!r}")
    if not gain_variance > 0:
        raise ValueError(f"gain_variance must be > 0, got {gain_variance!r}")
    L = int(num_paths)
    scale = math.sqrt(gain_variance / 2.0)
    gains = scale * (rng.standard_normal(L) + 1j * rng.standard_normal(L))
    aod = rng.uniform(0.0, np.pi, size=L)
    aoa = rng.uniform(0.0, np.pi, size=L)
    aod_est = aod + sample_misalignment(model_aod, rng, size=L)
    aoa_est = aoa + sample_misalignment(model_aoa, rng, size=L)
    return PathSet(gains, aod, aoa, aod_est, aoa_est)


def _channel_sum(gains, aoa, aod, tx: ArrayGeometry, rx: ArrayGeometry) -> np.ndarray:
    a_rx = array_response(rx, aoa)  # M_r x L
    a_tx = array_response(tx, aod)  # M_t x L
    scale = math.sqrt(tx.num_elements * rx.num_elements / len(gains))
    return scale * (a_rx * gains) @ a_tx.conj().T


def build_channel(paths: PathSet, tx: ArrayGeometry, rx: ArrayGeometry) -> ChannelRealization:
    """Sum of L rank-one path contributions evaluated at the TRUE angles."""
    H = _channel_sum(paths.gains, paths.aoa_true, paths.aod_true, tx, rx)
    return ChannelRealization(H, paths, tx, rx)
