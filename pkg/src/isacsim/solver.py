"""Consensus ADMM for the multi-agent complex LASSO, plus an independent
proximal-gradient oracle used to validate it.

The per-agent update solves a ridge system with the agent's Gram matrix, the
shared estimate is refined by entrywise complex soft-thresholding, and dual
ascent enforces agreement.  The updates are implemented exactly as given,
which corresponds to minimizing ``sum_s 0.5*||y_s - Phi_s z||^2 + a*||z||_1``
(the "effective objective" reported in solve traces).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .sensing import SensingProblem


@dataclass(frozen=True)
class AdmmParams:
    """Solver knobs: l1 weight, consensus penalty, fixed iteration count."""

    sparsity_weight: float
    penalty: float
    iterations: int

    def __post_init__(self):
        if not self.sparsity_weight > 0:
            raise ValueError("sparsity_weight must be positive")
        if not self.penalty > 0:
            raise ValueError("penalty must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass
class AdmmState:
    """Iterates of one consensus solve: per-agent locals, shared global, duals."""

    local_estimates: list[np.ndarray]
    global_estimate: np.ndarray
    duals: list[np.ndarray]
    iteration: int = 0


@dataclass(frozen=True)
class SolveReport:
    """Final global estimate with its consensus residual and objective trace."""

    global_estimate: np.ndarray
    primal_residual: float
    objective_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.primal_residual < 0:
            raise ValueError("primal_residual must be >= 0")


def soft_threshold(values: np.ndarray, threshold: float) -> np.ndarray:
    """Entrywise shrinkage ``sign(v)*max(|v|-t, 0)``; for complex entries the
    sign is the unit phasor ``v/|v|``.  Magnitudes at or below the threshold
    map to zero."""
    v = np.asarray(values)
    mag = np.abs(v)
    keep = np.maximum(mag - threshold, 0.0)
    scale = np.divide(keep, mag, out=np.zeros_like(mag), where=mag > 0)
    return v * scale


class LocalSolver:
    """Ridge-regularized least-squares update for one agent, with the
    symmetric positive-definite factorization cached across iterations."""

    def __init__(self, problem: SensingProblem, penalty: float):
        if not penalty > 0:
            raise ValueError("penalty must be positive")
        phi = problem.matrix
        gram = phi.conj().T @ phi
        gram[np.diag_indices_from(gram)] += penalty
        self._factor = scipy.linalg.cho_factor(gram, lower=True)
        self._phi_h_y = phi.conj().T @ problem.observation
        self._penalty = penalty

    def update(self, global_estimate: np.ndarray, dual: np.ndarray) -> np.ndarray:
        rhs = self._phi_h_y + self._penalty * global_estimate - dual
        return scipy.linalg.cho_solve(self._factor, rhs)


def local_update(
    problem: SensingProblem,
    global_estimate: np.ndarray,
    dual: np.ndarray,
    penalty: float,
) -> np.ndarray:
    """One agent's estimate ``(Phi^H Phi + b I)^{-1} (Phi^H y + b z_G - dual)``."""
    return LocalSolver(problem, penalty).update(np.asarray(global_estimate), np.asarray(dual))


def global_update(local_estimates, duals, sparsity_weight: float, penalty: float) -> np.ndarray:
    """Shared-estimate refresh: average the dual-corrected locals
    ``mean(z_s) + mean(dual)/penalty``, then soft-threshold at
    ``sparsity_weight / (penalty * S)``.

    The dual enters with a plus sign, as dictated by the augmented
    Lagrangian; flipping it turns the dual feedback positive and the
    iteration diverges.
    """
    agents = len(local_estimates)
    if agents < 1:
        raise ValueError("need at least one agent")
    mean_local = sum(local_estimates) / agents
    mean_dual = sum(duals) / agents
    consensus = mean_local + mean_dual / penalty
    return soft_threshold(consensus, sparsity_weight / (penalty * agents))


def dual_update(dual, local_estimate, global_estimate, penalty: float) -> np.ndarray:
    """Dual ascent step ``dual + penalty * (local - global)``."""
    return np.asarray(dual) + penalty * (np.asarray(local_estimate) - np.asarray(global_estimate))


def consensus_objective(problems, estimate: np.ndarray, sparsity_weight: float) -> float:
    """Effective objective ``sum_s 0.5*||y_s - Phi_s z||^2 + a*||z||_1``."""
    data = sum(
        0.5 * float(np.sum(np.abs(p.observation - p.matrix @ estimate) ** 2)) for p in problems
    )
    return data + sparsity_weight * float(np.sum(np.abs(estimate)))


def solve(problems, params: AdmmParams) -> SolveReport:
    """Run the bulk-synchronous consensus iteration from a zero start.

    Each round updates every agent against the shared estimate, refreshes the
    shared estimate by thresholded averaging, then performs dual ascent.  The
    returned primal residual is ``sum_s ||z_s - z_G||_2`` at the final round.
    """
    problems = list(problems)
    if not problems:
        raise ValueError("need at least one sensing problem")
    cols = problems[0].grid_size
    if any(p.grid_size != cols for p in problems):
        raise ValueError("all problems must share the same grid size")
    solvers = [LocalSolver(p, params.penalty) for p in problems]
    state = AdmmState(
        local_estimates=[np.zeros(cols, dtype=complex) for _ in problems],
        global_estimate=np.zeros(cols, dtype=complex),
        duals=[np.zeros(cols, dtype=complex) for _ in problems],
    )
    trace = np.empty(params.iterations)
    for t in range(params.iterations):
        state.local_estimates = [
            solver.update(state.global_estimate, dual)
            for solver, dual in zip(solvers, state.duals)
        ]
        state.global_estimate = global_update(
            state.local_estimates, state.duals, params.sparsity_weight, params.penalty
        )
        state.duals = [
            dual_update(dual, local, state.global_estimate, params.penalty)
            for dual, local in zip(state.duals, state.local_estimates)
        ]
        state.iteration = t + 1
        trace[t] = consensus_objective(problems, state.global_estimate, params.sparsity_weight)
    primal = sum(
        float(np.linalg.norm(local - state.global_estimate)) for local in state.local_estimates
    )
    return SolveReport(
        global_estimate=state.global_estimate,
        primal_residual=primal,
        objective_trace=trace,
    )


def lasso_objective(matrix: np.ndarray, observation: np.ndarray, sparsity_weight: float, estimate: np.ndarray) -> float:
    """Single-agent objective ``||y - Phi z||^2 + a*||z||_1`` (no 1/2 factor)."""
    resid = observation - matrix @ estimate
    return float(np.sum(np.abs(resid) ** 2)) + sparsity_weight * float(np.sum(np.abs(estimate)))


def _largest_gram_eigenvalue(matrix: np.ndarray, observation: np.ndarray, iterations: int = 200) -> float:
    """Power iteration on ``Phi^H Phi`` with a data-derived deterministic start."""
    v = matrix.conj().T @ observation
    norm = np.linalg.norm(v)
    if norm == 0.0:
        v = np.ones(matrix.shape[1], dtype=complex)
        norm = np.linalg.norm(v)
    v = v / norm
    lam = 0.0
    for _ in range(iterations):
        w = matrix.conj().T @ (matrix @ v)
        lam_new = float(np.linalg.norm(w))
        if lam_new == 0.0:
            return 0.0
        v = w / lam_new
        if abs(lam_new - lam) <= 1e-12 * lam_new:
            return lam_new
        lam = lam_new
    return lam


def oracle_lasso(
    matrix: np.ndarray,
    observation: np.ndarray,
    sparsity_weight: float,
    max_iter: int = 100_000,
    tol: float = 1e-10,
) -> np.ndarray:
    """Proximal-gradient (ISTA) minimizer of ``||y - Phi z||^2 + a*||z||_1``.

    Uses step size ``1 / (2*lambda_max(Phi^H Phi))`` from power iteration and
    stops when the relative objective change drops below ``tol``.  Failure to
    converge within ``max_iter`` warns but still returns the last iterate.
    """
    phi = np.asarray(matrix)
    y = np.asarray(observation)
    lam_max = _largest_gram_eigenvalue(phi, y)
    if lam_max == 0.0:
        return np.zeros(phi.shape[1], dtype=complex)
    step = 1.0 / (2.0 * lam_max)
    z = np.zeros(phi.shape[1], dtype=complex)
    prev = lasso_objective(phi, y, sparsity_weight, z)
    for _ in range(max_iter):
        grad = 2.0 * (phi.conj().T @ (phi @ z - y))
        z = soft_threshold(z - step * grad, step * sparsity_weight)
        obj = lasso_objective(phi, y, sparsity_weight, z)
        if abs(prev - obj) <= tol * max(abs(prev), 1e-300):
            return z
        prev = obj
    warnings.warn("oracle_lasso did not converge within max_iter", RuntimeWarning)
    return z
