"""Point-to-point capacity-energy function C(B) of a single DMC."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._ascent import DEFAULT_CONFIG, SolverConfig
from .channels import Dmc, EnergyFunctional, InputDistribution, MulticastProblem, energy_per_input
from .multicast import InfeasibleConstraintError, solve

__all__ = [
    "CapacityPoint",
    "CapacityCurve",
    "capacity_energy",
    "b_max_single",
    "capacity_curve",
    "InfeasibleConstraintError",
]


@dataclass(frozen=True)
class CapacityPoint:
    constraint: float
    value: float
    optimizer: InputDistribution
    converged: bool
    gap_estimate: float


@dataclass(frozen=True)
class CapacityCurve:
    points: tuple

    def __post_init__(self):
        Bs = [p.constraint for p in self.points]
        if any(b2 <= b1 for b1, b2 in zip(Bs, Bs[1:])):
            raise ValueError("curve constraints must be strictly increasing")

    @property
    def constraints(self) -> np.ndarray:
        return np.array([p.constraint for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])

    def __len__(self):
        return len(self.points)


def b_max_single(ch: Dmc, b: EnergyFunctional) -> float:
    """Largest expected energy any single input symbol delivers."""
    return float(energy_per_input(ch, b).max())


def capacity_energy(ch: Dmc, b: EnergyFunctional, B: float, config: SolverConfig = DEFAULT_CONFIG) -> CapacityPoint:
    """max I(X;Y) over inputs with E[b(Y)] >= B."""
    bmax = b_max_single(ch, b)
    if B > bmax + 1e-12:
        raise InfeasibleConstraintError(
            f"energy constraint B={B:.12g} exceeds B_max={bmax:.12g}", b_max=bmax, receivers=(0,)
        )
    sol = solve(MulticastProblem((ch,), (b,), [min(B, bmax)]), config)
    return CapacityPoint(float(B), sol.value, sol.optimizer, sol.converged, sol.gap_estimate)


def capacity_curve(
    ch: Dmc,
    b: EnergyFunctional,
    grid: Sequence[float],
    config: SolverConfig = DEFAULT_CONFIG,
    threads: int = 1,
) -> CapacityCurve:
    grid = [float(B) for B in grid]
    if threads <= 1:
        pts = [capacity_energy(ch, b, B, config) for B in grid]
    else:
        with ThreadPoolExecutor(threads) as pool:
            pts = list(pool.map(lambda B: capacity_energy(ch, b, B, config), grid))
    return CapacityCurve(tuple(pts))
