"""Alternating analog/digital factorisation of a target basis.

Approximates an ``M x N_RF`` target ``F`` by ``F_RF @ F_BB`` where ``F_RF``
has entries of modulus ``1/sqrt(M)`` and ``F_BB`` is square. The digital
factor is the least-squares fit for the current analog factor; the analog
factor is refined by gradient projection, warm-started from its previous
value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cmls_gp import GpConfig, KronCmlsProblem, gp_solve, random_phase, unvec
from .robust_steering import BasisMatrix

__all__ = ["FactorizeConfig", "HybridFactor", "digital_ls_update", "factorize"]


@dataclass(frozen=True)
class FactorizeConfig:
    """Outer alternating-loop settings; ``gp`` configures each inner solve."""

    eps_threshold: float = 1e-4
    max_iterations: int = 50
    gp: GpConfig = GpConfig()

    def __post_init__(self):
        if not self.eps_threshold > 0:
            raise ValueError(f"eps_threshold must be > 0, got {self.eps_threshold!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")


@dataclass
class HybridFactor:
    analog: np.ndarray
    digital: np.ndarray
    fit_residual: float
    residual_trace: list = field(default_factory=list)
    ls_steps: list = field(default_factory=list)
    outer_iterations: int = 0
    converged: bool = False
    rank_deficient: bool = False

    def relative_fit(self, target: np.ndarray) -> float:
        return math.sqrt(self.fit_residual) / np.linalg.norm(target)


def digital_ls_update(analog: np.ndarray, target: np.ndarray, return_rank: bool = False):
    """Minimum-norm least-squares ``analog^+ @ target``."""
    sol, _, rank, _ = np.linalg.lstsq(analog, target, rcond=None)
    if return_rank:
        return sol, int(rank)
    return sol


def _fit(analog, digital, target) -> float:
    E = analog @ digital - target
    return float(np.vdot(E, E).real)


def factorize(
    target,
    n_rf: int | None = None,
    config: FactorizeConfig = FactorizeConfig(),
    rng: np.random.Generator | None = None,
    init: str = "phase",
) -> HybridFactor:
    """Alternate digital LS updates and GP analog updates until the fit stalls.

    Parameters
    ----------
    target : BasisMatrix or ndarray
        ``M x N_RF`` matrix to approximate.
    n_rf : int, optional
        Expected number of columns; checked against ``target`` when given.
    config : FactorizeConfig
    rng : Generator, optional
        Only used when ``init="random"``.
    init : {"phase", "random"}
        ``"phase"`` starts from ``exp(j angle(target)) / sqrt(M)``; ``"random"``
        draws uniform phases from ``rng``.

    Returns
    -------
    HybridFactor
        ``residual_trace[k]`` is the fit after the k-th analog update (entry 0
        is the fit of the initial analog factor with its LS digital factor);
        ``ls_steps`` holds ``(before, after)`` fits around every digital
        update that follows an analog update.
    """
    F = target.matrix if isinstance(target, BasisMatrix) else np.asarray(target, dtype=complex)
    M, cols = F.shape
    if n_rf is not None and cols != n_rf:
        raise ValueError(f"target has {cols} columns, expected n_rf={n_rf}")
    modulus = 1.0 / math.sqrt(M)

    if init == "phase":
        analog = modulus * np.exp(1j * np.angle(F))
    elif init == "random":
        if rng is None:
            raise ValueError("init='random' needs an rng")
        analog = random_phase(F.shape, modulus, rng)
    else:
        raise ValueError(f"unknown init {init!r}")

    digital, rank = digital_ls_update(analog, F, return_rank=True)
    rank_deficient = rank < cols
    eps = _fit(analog, digital, F)
    trace = [eps]
    ls_steps = []
    eps_d = math.inf
    t = 0
    while eps_d >= config.eps_threshold and t < config.max_iterations:
        x, _ = gp_solve(KronCmlsProblem(digital, F, modulus), config.gp, x0=analog.reshape(-1, order="F"))
        analog = unvec(x, M)
        before = _fit(analog, digital, F)
        digital, rank = digital_ls_update(analog, F, return_rank=True)
        rank_deficient |= rank < cols
        eps_new = _fit(analog, digital, F)
        ls_steps.append((before, eps_new))
        trace.append(eps_new)
        eps_d = abs(eps_new - eps)
        eps = eps_new
        t += 1

    return HybridFactor(
        analog=analog,
        digital=digital,
        fit_residual=eps,
        residual_trace=trace,
        ls_steps=ls_steps,
        outer_iterations=t,
        converged=eps_d < config.eps_threshold,
        rank_deficient=rank_deficient,
    )
