"""Constant-modulus least squares by gradient projection.

Solves ``min ||B x - f||_2^2`` subject to ``|x_n| = modulus`` for every n,
using conjugate (Polak-Ribiere) directions, an exact line search on the
unconstrained quadratic, and a phase projection after every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CmlsProblem",
    "KronCmlsProblem",
    "GpConfig",
    "GpTrace",
    "kron_lift",
    "residual",
    "line_search_step",
    "project_modulus",
    "random_phase",
    "gp_solve",
]

# below this fraction of ||d||^2 the curvature along d is treated as zero
_CURVATURE_GUARD = 1e-14


def kron_lift(digital: np.ndarray, m: int) -> np.ndarray:
    """Dense ``digital.T (x) I_m``; maps ``vec(X)`` to ``vec(X @ digital)``."""
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    return np.kron(np.asarray(digital).T, np.eye(int(m)))


def vec(X: np.ndarray) -> np.ndarray:
    """Column-stacking vectorisation."""
    return np.asarray(X).reshape(-1, order="F")


def unvec(x: np.ndarray, rows: int) -> np.ndarray:
    return np.asarray(x).reshape((rows, -1), order="F")


@dataclass
class CmlsProblem:
    """Explicit-matrix CMLS instance."""

    design_matrix: np.ndarray
    target: np.ndarray
    modulus: float

    def __post_init__(self):
        self.design_matrix = np.asarray(self.design_matrix, dtype=complex)
        self.target = np.asarray(self.target, dtype=complex).reshape(-1)
        if self.design_matrix.ndim != 2 or self.design_matrix.shape[0] != self.target.size:
            raise ValueError(
                f"design matrix shape {self.design_matrix.shape} does not match target length {self.target.size}"
            )
        if not self.modulus > 0:
            raise ValueError(f"modulus must be > 0, got {self.modulus!r}")

    @property
    def num_unknowns(self) -> int:
        return self.design_matrix.shape[1]

    def apply(self, x):
        return self.design_matrix @ x

    def adjoint(self, y):
        return self.design_matrix.conj().T @ y


class KronCmlsProblem:
    """CMLS instance with ``B = digital.T (x) I_M`` applied implicitly.

    The unknown is ``vec(X)`` for an ``M x N_RF`` matrix X and the target is
    ``vec(F)`` for an ``M x N_s`` matrix F, so ``B x = vec(X @ digital)`` and
    ``B^H y = vec(Y @ digital^H)``.
    """

    def __init__(self, digital: np.ndarray, target_matrix: np.ndarray, modulus: float):
        self.digital = np.asarray(digital, dtype=complex)
        self.target_matrix = np.asarray(target_matrix, dtype=complex)
        self.rows = self.target_matrix.shape[0]
        if self.digital.shape[1] != self.target_matrix.shape[1]:
            raise ValueError(
                f"digital factor {self.digital.shape} incompatible with target {self.target_matrix.shape}"
            )
        if not modulus > 0:
            raise ValueError(f"modulus must be > 0, got {modulus!r}")
        self.modulus = float(modulus)
        self.target = vec(self.target_matrix)
        self._digital_h = self.digital.conj().T

    @property
    def num_unknowns(self) -> int:
        return self.rows * self.digital.shape[0]

    @property
    def design_matrix(self) -> np.ndarray:
        return kron_lift(self.digital, self.rows)

    def apply(self, x):
        return vec(unvec(x, self.rows) @ self.digital)

    def adjoint(self, y):
        return vec(unvec(y, self.rows) @ self._digital_h)


@dataclass(frozen=True)
class GpConfig:
    eps_threshold: float = 1e-6
    max_iterations: int = 200

    def __post_init__(self):
        if not self.eps_threshold > 0:
            raise ValueError(f"eps_threshold must be > 0, got {self.eps_threshold!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")


@dataclass
class GpTrace:
    residuals: list = field(default_factory=list)
    iterations_used: int = 0
    converged: bool = False
    stagnated: bool = False
    best_index: int = 0


def residual(problem, x) -> float:
    r = problem.apply(x) - problem.target
    return float(np.vdot(r, r).real)


def project_modulus(v: np.ndarray, modulus: float) -> np.ndarray:
    return modulus * np.exp(1j * np.angle(v))


def random_phase(shape, modulus: float, rng: np.random.Generator) -> np.ndarray:
    return modulus * np.exp(2j * np.pi * rng.random(shape))


def line_search_step(problem, x, d) -> float:
    """Exact minimiser over real ``alpha`` of ``||B(x + alpha d) - f||^2``.

    Returns 0.0 when ``d`` is (numerically) in the null space of B.
    """
    Bd = problem.apply(d)
    den = np.vdot(Bd, Bd).real
    if den <= _CURVATURE_GUARD * np.vdot(d, d).real or den == 0:
        return 0.0
    num = np.vdot(problem.target, Bd).real - np.vdot(Bd, problem.apply(x)).real
    return float(num / den)


def gp_solve(problem, config: GpConfig = GpConfig(), x0=None, rng=None):
    """Run gradient projection from ``x0`` (or random phases drawn from ``rng``).

    Returns ``(x, trace)`` where ``x`` is the feasible iterate with the lowest
    residual seen and ``trace.residuals[k]`` is the residual after k steps.
    """
    mod = problem.modulus
    if x0 is None:
        if rng is None:
            raise ValueError("either x0 or rng must be given")
        x = random_phase(problem.num_unknowns, mod, rng)
    else:
        x = project_modulus(np.asarray(x0, dtype=complex).reshape(-1), mod)
    f = problem.target

    r = problem.apply(x) - f
    eps = float(np.vdot(r, r).real)
    g = 2.0 * problem.adjoint(r)
    d = -g

    trace = GpTrace(residuals=[eps])
    best_x, best_eps = x, eps
    # improvements below round-off must not displace the best iterate
    tie = 1e-14 * max(float(np.vdot(f, f).real), eps)
    eps_d = math.inf
    t = 0
    while eps_d >= config.eps_threshold and t < config.max_iterations:
        Bd = problem.apply(d)
        den = np.vdot(Bd, Bd).real
        if den <= _CURVATURE_GUARD * np.vdot(d, d).real or den == 0:
            trace.stagnated = True
            break
        # Re{f^H B d} - Re{d^H B^H B x} == -Re{(Bd)^H r}
        alpha = -np.vdot(Bd, r).real / den
        x = mod * np.exp(1j * np.angle(x + alpha * d))

        r = problem.apply(x) - f
        g_new = 2.0 * problem.adjoint(r)
        gg = np.vdot(g, g).real
        beta = np.vdot(g_new - g, g_new).real / gg if gg > 0 else 0.0
        d = -g_new + beta * d
        g = g_new

        eps_new = float(np.vdot(r, r).real)
        eps_d = abs(eps_new - eps)
        eps = eps_new
        t += 1
        trace.residuals.append(eps)
        if eps < best_eps - tie:
            best_x, best_eps = x, eps
            trace.best_index = t

    trace.iterations_used = t
    trace.converged = trace.stagnated or eps_d < config.eps_threshold
    return best_x, trace
