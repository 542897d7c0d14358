"""Multicast (compound-channel) capacity-energy function.

One input distribution serves every receiver, so the achievable rate is the
worst receiver's mutual information, maximized over inputs that meet every
receiver's energy requirement ``q . P(l) . b_l >= B_l``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._ascent import DEFAULT_CONFIG, SolverConfig, maximize_min_information
from ._lp import vertex_lp
from .channels import InputDistribution, MulticastProblem, hamming_energy

FEASIBILITY_TOL = 1e-12
ACTIVE_TOL = 1e-7


class InfeasibleConstraintError(ValueError):
    """Energy requirements that no input distribution can meet."""

    def __init__(self, message, b_max=None, receivers=()):
        super().__init__(message)
        self.b_max = b_max
        self.receivers = tuple(receivers)


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    max_slack: float
    witness: Optional[np.ndarray]
    # when infeasible: receiver weights w with sum_l w_l (q.P(l).b_l - B_l) <= max_slack < 0 for every q
    separating_weights: Optional[np.ndarray] = None

    def __bool__(self):
        return self.feasible

    @property
    def violated(self) -> tuple:
        if self.separating_weights is None:
            return ()
        return tuple(int(i) for i in np.flatnonzero(self.separating_weights > 1e-12))


@dataclass(frozen=True)
class MulticastSolution:
    constraints: np.ndarray
    value: float
    optimizer: InputDistribution
    per_channel_mi: np.ndarray
    active_set: tuple
    converged: bool
    gap_estimate: float
    iterations: int


def _max_min_linear(E, B):
    """``max_q min_l (E q - B)_l`` over the simplex, as an epigraph LP."""
    L, n = E.shape
    A_ub = np.vstack([np.hstack([-E, np.ones((L, 1))]), np.hstack([-np.eye(n), np.zeros((n, 1))])])
    b_ub = np.concatenate([-B, np.zeros(n)])
    A_eq = np.hstack([np.ones((1, n)), np.zeros((1, 1))])
    value, z = vertex_lp(np.r_[np.zeros(n), 1.0], A_ub, b_ub, A_eq, [1.0])
    q = np.maximum(z[:n], 0.0)
    return value, q / q.sum()


def _separating_weights(E, B):
    """``argmin_w max_x sum_l w_l (E[l, x] - B_l)`` over the receiver simplex."""
    L, n = E.shape
    M = (E - B[:, None]).T  # (n, L)
    A_ub = np.vstack([np.hstack([M, -np.ones((n, 1))]), np.hstack([-np.eye(L), np.zeros((L, 1))])])
    b_ub = np.zeros(n + L)
    A_eq = np.hstack([np.ones((1, L)), np.zeros((1, 1))])
    _, z = vertex_lp(np.r_[np.zeros(L), -1.0], A_ub, b_ub, A_eq, [1.0])
    return np.maximum(z[:L], 0.0)


def b_max_multicast(channels, energies=None) -> float:
    """Largest common requirement B any input can deliver to every receiver."""
    prob = MulticastProblem.common(channels, 0.0, energies)
    value, _ = _max_min_linear(prob.energy_rows, np.zeros(prob.size))
    return max(0.0, value)


def domain_feasible(prob: MulticastProblem) -> Feasibility:
    """Is ``prob.constraints`` in the achievable energy domain? Returns a witness if so."""
    E, B = prob.energy_rows, prob.constraints
    n = prob.input_size
    uniform = np.full(n, 1.0 / n)
    slack_u = float((E @ uniform - B).min())
    if slack_u >= 0:
        return Feasibility(True, slack_u, uniform)
    value, q = _max_min_linear(E, B)
    if value >= -FEASIBILITY_TOL:
        return Feasibility(True, value, q)
    return Feasibility(False, value, None, _separating_weights(E, B))


def _clamped(prob: MulticastProblem, feas: Feasibility) -> np.ndarray:
    # requirements within FEASIBILITY_TOL of unreachable are clamped to what the witness delivers
    B = prob.constraints
    if feas.max_slack >= 0:
        return B
    return np.minimum(B, prob.energy_rows @ feas.witness)


def require_feasible(prob: MulticastProblem) -> Feasibility:
    feas = domain_feasible(prob)
    if not feas:
        energies = prob.energies
        bmax = b_max_multicast(prob.channels, energies)
        who = ", ".join(str(i + 1) for i in feas.violated)
        noun = "receiver" if len(feas.violated) == 1 else "receivers"
        raise InfeasibleConstraintError(
            f"energy constraints {prob.constraints.tolist()} are infeasible "
            f"({noun} {who}, counted from 1, cannot be served together; common-B maximum is {bmax:.12g})",
            b_max=bmax,
            receivers=feas.violated,
        )
    return feas


def solve(prob: MulticastProblem, config: SolverConfig = DEFAULT_CONFIG) -> MulticastSolution:
    feas = require_feasible(prob)
    B = _clamped(prob, feas)
    res = maximize_min_information([ch.rows for ch in prob.channels], prob.energy_rows, B, feas.witness, config)
    q = InputDistribution(res.q / res.q.sum())
    mis = res.mi
    active = tuple(int(i) for i in np.flatnonzero(mis <= mis.min() + ACTIVE_TOL))
    return MulticastSolution(
        constraints=prob.constraints,
        value=float(mis.min()),
        optimizer=q,
        per_channel_mi=mis,
        active_set=active,
        converged=res.converged,
        gap_estimate=res.gap,
        iterations=res.iterations,
    )


def multicast_capacity(prob: MulticastProblem, config: SolverConfig = DEFAULT_CONFIG) -> MulticastSolution:
    """``max_q min_l I(q; P(l))`` over B-admissible single-letter inputs."""
    return solve(prob, config)


def multicast_capacity_common(channels, B: float, energies=None, config: SolverConfig = DEFAULT_CONFIG):
    return solve(MulticastProblem.common(channels, B, energies), config)


def upper_bound_min_individual(prob: MulticastProblem, config: SolverConfig = DEFAULT_CONFIG) -> float:
    """Minimum over receivers of each one's own capacity-energy value."""
    return min(solve(prob.subproblem([i]), config).value for i in range(prob.size))


def per_channel_curves(
    channels,
    B_grid: Sequence[float],
    energies=None,
    config: SolverConfig = DEFAULT_CONFIG,
    threads: int = 1,
) -> list:
    """Multicast optimizer and every receiver's mutual information at each common B."""
    channels = tuple(channels)
    if energies is None:
        energies = [hamming_energy(ch.output_size) for ch in channels]
    probs = [MulticastProblem.common(channels, B, energies) for B in B_grid]
    return sweep(probs, config, threads)


def sweep(problems, config: SolverConfig = DEFAULT_CONFIG, threads: int = 1) -> list:
    if threads <= 1:
        return [solve(p, config) for p in problems]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda p: solve(p, config), problems))
