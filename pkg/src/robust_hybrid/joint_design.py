"""Joint hybrid precoder/combiner construction and the reference designs.

The robust and non-robust hybrid designs share one pipeline: a dominant
basis per link end, an analog/digital factorisation of each basis, and a
second digital stage taken from the SVD of the effective baseband channel.
They differ only in whether the array responses are expected (averaged over
the misalignment law) or nominal at the estimated angles.

By default the effective channel is formed from the designer's own channel
estimate, i.e. the channel rebuilt from estimated angles and gains with the
same responses used for the bases. ``DesignConfig(second_stage_channel="true")``
uses the true channel instead (a perfect-CSI second stage).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .array_channel import ArrayGeometry, MisalignmentModel, PathSet
from .cmls_gp import random_phase
from .hybrid_factorization import FactorizeConfig, HybridFactor, factorize
from .robust_steering import build_expected_response_matrix, dominant_basis, expected_steering

__all__ = [
    "DegenerateDesign",
    "HybridPrecoder",
    "HybridCombiner",
    "DesignInputs",
    "DesignConfig",
    "effective_channel",
    "second_stage",
    "finalize_precoder",
    "expected_channel",
    "design_robust",
    "design_nonrobust",
    "design_fully_digital",
]


class DegenerateDesign(ArithmeticError):
    pass


@dataclass
class HybridPrecoder:
    analog: np.ndarray
    digital: np.ndarray
    digital_inner: np.ndarray
    digital_second: np.ndarray

    @property
    def full(self) -> np.ndarray:
        return self.analog @ self.digital


@dataclass
class HybridCombiner:
    analog: np.ndarray
    digital: np.ndarray
    digital_inner: np.ndarray
    digital_second: np.ndarray

    @property
    def full(self) -> np.ndarray:
        return self.analog @ self.digital


@dataclass
class DesignInputs:
    """Everything a designer may use for one link.

    ``channel`` is the true channel. Hybrid designs read it only when
    configured with ``second_stage_channel="true"``.
    """

    paths: PathSet
    tx: ArrayGeometry
    rx: ArrayGeometry
    n_s: int
    n_rf_t: int
    n_rf_r: int
    model_aod: MisalignmentModel
    model_aoa: MisalignmentModel
    channel: np.ndarray | None = None

    def __post_init__(self):
        if not 1 <= self.n_s <= self.n_rf_t <= self.tx.num_elements:
            raise ValueError(
                f"need 1 <= N_s <= N_RF^t <= M_t, got N_s={self.n_s}, N_RF^t={self.n_rf_t}, M_t={self.tx.num_elements}"
            )
        if not self.n_s <= self.n_rf_r <= self.rx.num_elements:
            raise ValueError(
                f"need N_s <= N_RF^r <= M_r, got N_s={self.n_s}, N_RF^r={self.n_rf_r}, M_r={self.rx.num_elements}"
            )
        if self.channel is not None and self.channel.shape != (self.rx.num_elements, self.tx.num_elements):
            raise ValueError(f"channel shape {self.channel.shape} does not match the array sizes")


@dataclass(frozen=True)
class DesignConfig:
    factorize: FactorizeConfig = FactorizeConfig()
    passes: int = 2
    second_stage_channel: str = "estimate"

    def __post_init__(self):
        if self.passes < 1:
            raise ValueError(f"passes must be >= 1, got {self.passes!r}")
        if self.second_stage_channel not in ("estimate", "true"):
            raise ValueError(f"second_stage_channel must be 'estimate' or 'true', got {self.second_stage_channel!r}")


@dataclass
class DesignDiagnostics:
    design_channel: np.ndarray
    tx_factor: HybridFactor
    rx_factor: HybridFactor
    effective: np.ndarray
    singular_values: np.ndarray
    history: list = field(default_factory=list)


def effective_channel(W_inner, W_RF, H, F_RF, F_inner) -> np.ndarray:
    """``W_inner^H W_RF^H H F_RF F_inner``."""
    try:
        return W_inner.conj().T @ (W_RF.conj().T @ H @ F_RF) @ F_inner
    except ValueError as exc:
        raise ValueError(
            f"non-conformable factors: W_inner {W_inner.shape}, W_RF {W_RF.shape}, H {H.shape}, "
            f"F_RF {F_RF.shape}, F_inner {F_inner.shape}"
        ) from exc


def second_stage(H_e: np.ndarray, n_s: int):
    """Top-``n_s`` right and left singular vectors of ``H_e`` as ``(F_bar, W_bar)``."""
    if n_s > min(H_e.shape):
        raise ValueError(f"n_s={n_s} exceeds the effective channel dimensions {H_e.shape}")
    u, _, vh = np.linalg.svd(H_e)
    return vh[:n_s].conj().T, u[:, :n_s]


def finalize_precoder(F_RF, F_inner, F_second, n_s: int) -> np.ndarray:
    """Composite digital precoder scaled so that ``||F_RF F_BB||_F^2 = n_s``."""
    raw = F_inner @ F_second
    norm = np.linalg.norm(F_RF @ raw)
    if not norm > 0:
        raise DegenerateDesign("hybrid precoder has zero Frobenius norm")
    return math.sqrt(n_s) * raw / norm


def expected_channel(paths: PathSet, tx: ArrayGeometry, rx: ArrayGeometry, model_aod, model_aoa) -> np.ndarray:
    """Channel rebuilt from estimated angles with expected array responses at both ends.

    With zero-width error models this is the nominal estimate of the channel;
    with exact angle estimates as well it equals the true channel.
    """
    a_rx = expected_steering(rx, paths.aoa_est, model_aoa.bound)
    a_tx = expected_steering(tx, paths.aod_est, model_aod.bound)
    scale = math.sqrt(tx.num_elements * rx.num_elements / paths.num_paths)
    return scale * (a_rx * paths.gains) @ a_tx.conj().T


def _design_hybrid(inputs: DesignInputs, config: DesignConfig, rng, model_aod, model_aoa, diagnostics=False):
    p = inputs
    if config.second_stage_channel == "true":
        if p.channel is None:
            raise ValueError("second_stage_channel='true' needs DesignInputs.channel")
        H = p.channel
    else:
        H = expected_channel(p.paths, p.tx, p.rx, model_aod, model_aoa)
    M_r = p.rx.num_elements

    # random-phase starting combiner; the inner factor is square N_RF^r x N_RF^r
    W_inner = random_phase((p.n_rf_r, p.n_rf_r), 1.0, rng)
    W_RF = random_phase((M_r, p.n_rf_r), 1.0 / math.sqrt(M_r), rng)

    tx_basis = dominant_basis(build_expected_response_matrix(p.paths, "transmitter", p.tx, model_aod), p.n_rf_t)
    rx_basis = dominant_basis(build_expected_response_matrix(p.paths, "receiver", p.rx, model_aoa), p.n_rf_r)
    # each factorisation depends only on its own basis, so it is identical in every pass
    tx_fac = factorize(tx_basis, p.n_rf_t, config.factorize)
    rx_fac = factorize(rx_basis, p.n_rf_r, config.factorize)
    F_RF, F_inner = tx_fac.analog, tx_fac.digital

    history = []
    for _ in range(config.passes):
        H_e = effective_channel(W_inner, W_RF, H, F_RF, F_inner)
        F_second, _ = second_stage(H_e, p.n_s)
        F_BB = finalize_precoder(F_RF, F_inner, F_second, p.n_s)

        W_RF, W_inner = rx_fac.analog, rx_fac.digital
        H_e = effective_channel(W_inner, W_RF, H, F_RF, F_inner)
        _, W_second = second_stage(H_e, p.n_s)
        W_BB = W_inner @ W_second

        precoder = HybridPrecoder(F_RF, F_BB, F_inner, F_second)
        combiner = HybridCombiner(W_RF, W_BB, W_inner, W_second)
        history.append((precoder, combiner))

    if diagnostics:
        diag = DesignDiagnostics(H, tx_fac, rx_fac, H_e, np.linalg.svd(H_e, compute_uv=False), history)
        return precoder, combiner, diag
    return precoder, combiner


def design_robust(inputs: DesignInputs, config: DesignConfig = DesignConfig(), rng=None, diagnostics=False):
    """Hybrid design from the expected (misalignment-averaged) array responses."""
    rng = np.random.default_rng() if rng is None else rng
    return _design_hybrid(inputs, config, rng, inputs.model_aod, inputs.model_aoa, diagnostics)


def design_nonrobust(inputs: DesignInputs, config: DesignConfig = DesignConfig(), rng=None, diagnostics=False):
    """Same pipeline as :func:`design_robust` with nominal responses at the estimated angles."""
    rng = np.random.default_rng() if rng is None else rng
    nominal = MisalignmentModel(0.0)
    return _design_hybrid(inputs, config, rng, nominal, nominal, diagnostics)


def design_fully_digital(channel_matrix: np.ndarray, n_s: int):
    """SVD precoder/combiner pair ``(F, W)`` with orthonormal columns (``||F||_F^2 = n_s``)."""
    H = np.asarray(channel_matrix)
    if not 1 <= n_s <= min(H.shape):
        raise ValueError(f"n_s={n_s} must lie in [1, {min(H.shape)}]")
    u, _, vh = np.linalg.svd(H, full_matrices=False)
    return vh[:n_s].conj().T, u[:, :n_s]
