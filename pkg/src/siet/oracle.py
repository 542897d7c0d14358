"""Brute-force cross-checks for the solvers.

Everything here is deliberately naive: exhaustive grids over the input
simplex, mutual information recomputed as ``H(Y) - H(Y|X)`` rather than
through the solvers' divergence form, and feasibility re-tested from scratch.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .channels import Dmc, EnergyFunctional, MulticastProblem
from .multicast import domain_feasible

MAX_GRID_POINTS = 60_000_000
PROB_FLOOR = 1e-9
FEAS_TOL = 1e-12

__all__ = [
    "GridSpec",
    "GridResult",
    "simplex_grid",
    "grid_information",
    "grid_capacity_energy",
    "product_problem",
    "product_capacity_n2",
    "concavity_probe",
    "domain_convexity_probe",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform simplex grid with spacing ``step`` in ``dimension`` coordinates."""

    step: float
    dimension: int

    def __post_init__(self):
        if not (0 < self.step <= 0.25):
            raise ValueError(f"step must be in (0, 0.25], got {self.step}")
        if not (1 <= self.dimension <= 4):
            raise ValueError(f"dimension must be in 1..4, got {self.dimension}")
        if self.count > MAX_GRID_POINTS:
            raise ValueError(f"grid of {self.count} points is too large")

    @property
    def divisions(self) -> int:
        return int(round(1.0 / self.step))

    @property
    def count(self) -> int:
        from math import comb

        return comb(self.divisions + self.dimension - 1, self.dimension - 1)


def simplex_grid(n: int, N: int) -> Iterator[np.ndarray]:
    """Chunks of integer compositions of N into n parts (rows sum to N)."""
    if n == 1:
        yield np.array([[N]])
        return
    if n == 2:
        k = np.arange(N + 1)
        yield np.stack([k, N - k], axis=1)
        return
    a, b = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="ij")
    a, b = a.ravel(), b.ravel()
    keep = a + b <= N
    a, b = a[keep], b[keep]
    order = np.argsort(a + b, kind="stable")
    a, b = a[order], b[order]
    ends = np.searchsorted(a + b, np.arange(N + 1), side="right")

    def heads(depth, left):
        if depth == 0:
            yield ()
            return
        for h in range(left + 1):
            for rest in heads(depth - 1, left - h):
                yield (h,) + rest

    for head in heads(n - 3, N):
        rem = N - sum(head)
        m = ends[rem]
        tail = np.stack([a[:m], b[:m], rem - a[:m] - b[:m]], axis=1)
        if head:
            tail = np.hstack([np.broadcast_to(np.array(head), (m, len(head))), tail])
        yield tail


def _entropy_rows(P: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(P > 0, -P * np.log2(P), 0.0)
    return t.sum(axis=-1)


def grid_information(Q: np.ndarray, W: np.ndarray) -> np.ndarray:
    """``I(q; W)`` for each row q of Q, in bits, as H(Y) - H(Y|X)."""
    return _entropy_rows(Q @ W) - Q @ _entropy_rows(W)


@dataclass(frozen=True)
class GridResult:
    value: float
    optimizer: Optional[np.ndarray]
    slack: float
    points: int
    feasible_points: int


def _slack(q: np.ndarray, rows, step: float) -> float:
    """First-order grid slack: step times the largest information-gradient entry at q."""
    worst = 0.0
    for W in rows:
        py = np.maximum(q @ W, PROB_FLOOR)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(W > 0, W * np.log2(np.where(W > 0, W, 1.0) / py), 0.0).sum(axis=1)
        worst = max(worst, float(np.ptp(d)))
    return step * worst


def _scan(rows, E, B, n, N, step):
    best, arg, total, ok = -np.inf, None, 0, 0
    for chunk in simplex_grid(n, N):
        Q = chunk / N
        total += Q.shape[0]
        feas = np.all(Q @ E.T >= B - FEAS_TOL, axis=1)
        if not feas.any():
            continue
        Q = Q[feas]
        ok += Q.shape[0]
        vals = np.min(np.stack([grid_information(Q, W) for W in rows]), axis=0)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, arg = float(vals[i]), Q[i].copy()
    if arg is None:
        raise ValueError("no grid point satisfies the energy constraints")
    return GridResult(best, arg, _slack(arg, rows, step), total, ok)


def grid_capacity_energy(prob: MulticastProblem, grid: GridSpec) -> GridResult:
    """Best grid point of ``min_l I(q; P(l))`` among inputs meeting every constraint.

    The value is a lower bound on the true optimum; ``slack`` estimates how
    far below it can sit.
    """
    if grid.dimension != prob.input_size:
        raise ValueError(f"grid dimension {grid.dimension} != input alphabet {prob.input_size}")
    rows = [ch.rows for ch in prob.channels]
    return _scan(rows, prob.energy_rows, prob.constraints, grid.dimension, grid.divisions, grid.step)


def product_problem(prob: MulticastProblem, B: float) -> MulticastProblem:
    """Two uses of each channel as one channel on pairs, with additive energy and requirement 2B."""
    chans, energies = [], []
    for ch, b in zip(prob.channels, prob.energies):
        chans.append(Dmc(np.kron(ch.rows, ch.rows), name=f"{ch.name}^2"))
        v = b.values
        energies.append(EnergyFunctional((v[:, None] + v[None, :]).ravel()))
    return MulticastProblem(tuple(chans), tuple(energies), np.full(prob.size, 2.0 * B))


def product_capacity_n2(prob: MulticastProblem, B: float, step: float = 2e-3) -> GridResult:
    """Grid maximum of ``min_l I(X1 X2; Y1 Y2)`` over joint inputs on binary pairs.

    Joint distributions range over the whole 3-simplex, not just products,
    so a value above ``2 C1(B)`` would refute single-letterization.
    """
    if prob.input_size != 2:
        raise ValueError("product oracle needs a binary input alphabet")
    prod = product_problem(prob, B)
    N = int(round(1.0 / step))
    rows = [ch.rows for ch in prod.channels]
    return _scan(rows, prod.energy_rows, prod.constraints, 4, N, step)


def concavity_probe(curve, values=None) -> float:
    """Largest amount by which a point falls below the chord of its neighbours.

    Accepts a ``CapacityCurve`` or a pair of arrays (constraints, values).
    Returns 0 for concave data.
    """
    if values is None:
        B, C = curve.constraints, curve.values
    else:
        B, C = np.asarray(curve, dtype=float), np.asarray(values, dtype=float)
    if B.size < 3:
        raise ValueError("need at least three points")
    b0, b1, b2 = B[:-2], B[1:-1], B[2:]
    t = (b1 - b0) / (b2 - b0)
    chord = (1 - t) * C[:-2] + t * C[2:]
    return float(max(0.0, np.max(chord - C[1:-1])))


def domain_convexity_probe(prob: MulticastProblem, trials: int = 1000, rng=None) -> bool:
    """Mix pairs of achievable energy vectors and confirm every mixture stays achievable.

    Achievable vectors come from random inputs (a quarter of them point
    masses, which sit on the domain's extreme points).
    """
    rng = np.random.default_rng(rng)
    n = prob.input_size
    E = prob.energy_rows

    def draw():
        if rng.random() < 0.25:
            return np.eye(n)[rng.integers(n)]
        return rng.dirichlet(np.ones(n))

    for _ in range(trials):
        B1, B2 = E @ draw(), E @ draw()
        t = rng.random()
        if not domain_feasible(prob.with_constraints(t * B1 + (1 - t) * B2)):
            return False
    return True
