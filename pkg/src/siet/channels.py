"""Discrete memoryless channels, input distributions and received energy.

All information quantities are in bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

ROW_TOL = 1e-12

ArrayLike = Union[Sequence[float], np.ndarray]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dmc:
    """Row-stochastic transition matrix, ``rows[x, y] = p(y|x)``."""

    rows: np.ndarray
    name: str = field(default="", compare=False)

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise ValueError(f"transition matrix must be a non-empty 2-D array, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)) or rows.min() < 0 or rows.max() > 1:
            raise ValueError("transition probabilities must lie in [0, 1]")
        sums = rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
        if bad.size:
            raise ValueError(f"row {int(bad[0])} sums to {sums[bad[0]]!r}, not 1")
        rows = rows / sums[:, None]
        object.__setattr__(self, "rows", _frozen(rows))

    @property
    def input_size(self) -> int:
        return self.rows.shape[0]

    @property
    def output_size(self) -> int:
        return self.rows.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Dmc):
            return NotImplemented
        return self.rows.shape == other.rows.shape and bool(np.array_equal(self.rows, other.rows))

    def __hash__(self):
        return hash((self.rows.shape, self.rows.tobytes()))

    def __repr__(self):
        if self.name:
            return f"Dmc({self.name})"
        return f"Dmc({self.rows.tolist()})"


@dataclass(frozen=True, eq=False)
class EnergyFunctional:
    """Harvested energy ``b(y)`` for each output symbol."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("energy functional must be a non-empty vector")
        if not np.all(np.isfinite(v)) or v.min() < 0:
            raise ValueError("energy values must be finite and nonnegative")
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, EnergyFunctional):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash(self.values.tobytes())


@dataclass(frozen=True, eq=False)
class InputDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("input distribution must be a non-empty vector")
        if not np.all(np.isfinite(p)) or p.min() < 0:
            raise ValueError("probabilities must be finite and nonnegative")
        if abs(p.sum() - 1.0) > ROW_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", _frozen(p / p.sum()))

    @classmethod
    def uniform(cls, size: int) -> "InputDistribution":
        return cls(np.full(size, 1.0 / size))

    def __len__(self):
        return self.probs.size

    def __eq__(self, other):
        if not isinstance(other, InputDistribution):
            return NotImplemented
        return bool(np.array_equal(self.probs, other.probs))

    def __hash__(self):
        return hash(self.probs.tobytes())


def make_bsc(eps: float) -> Dmc:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"crossover probability {eps!r} outside [0, 1]")
    return Dmc([[1.0 - eps, eps], [eps, 1.0 - eps]], name=f"BSC({eps:g})")


def make_z(eps0: float) -> Dmc:
    """Z-channel: input 0 is noiseless, input 1 flips to 0 with probability ``eps0``."""
    if not 0.0 <= eps0 <= 1.0:
        raise ValueError(f"1->0 probability {eps0!r} outside [0, 1]")
    return Dmc([[1.0, 0.0], [eps0, 1.0 - eps0]], name=f"Z({eps0:g})")


def hamming_energy(output_size: int = 2) -> EnergyFunctional:
    """Hamming weight of each output symbol's binary label; ``[0, 1]`` for binary outputs."""
    return EnergyFunctional([bin(y).count("1") for y in range(output_size)])


def _probs(q) -> np.ndarray:
    return np.asarray(q.probs if isinstance(q, InputDistribution) else q, dtype=float)


def _check_dims(q: np.ndarray, ch: Dmc):
    if q.shape != (ch.input_size,):
        raise ValueError(f"input distribution has length {q.size}, channel expects {ch.input_size}")


def output_distribution(q, ch: Dmc) -> np.ndarray:
    q = _probs(q)
    _check_dims(q, ch)
    return q @ ch.rows


def mutual_information(q, ch: Dmc) -> float:
    """I(X;Y) in bits, with the 0 log 0 = 0 convention."""
    q = _probs(q)
    _check_dims(q, ch)
    py = q @ ch.rows
    joint = q[:, None] * ch.rows
    mask = joint > 0
    ratio = ch.rows[mask] / np.broadcast_to(py, ch.rows.shape)[mask]
    return max(0.0, float(np.sum(joint[mask] * np.log2(ratio))))


def information_gradient(q, ch: Dmc) -> np.ndarray:
    """Partial derivatives of I(q; ch) w.r.t. each q[x], in bits.

    Component x is ``D(p(.|x) || p_Y) - log2(e)``; it is ``+inf`` when row x puts
    mass on an output that ``q`` never produces.
    """
    q = _probs(q)
    py = q @ ch.rows
    rows = ch.rows
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(rows > 0, rows * np.log2(rows / py), 0.0)
    return terms.sum(axis=1) - np.log2(np.e)


def received_energy(q, ch: Dmc, b: EnergyFunctional) -> float:
    """Expected harvested energy E[b(Y)] = q . P . b."""
    q = _probs(q)
    _check_dims(q, ch)
    if len(b) != ch.output_size:
        raise ValueError(f"energy functional has length {len(b)}, channel output size is {ch.output_size}")
    return float(q @ (ch.rows @ b.values))


def energy_per_input(ch: Dmc, b: EnergyFunctional) -> np.ndarray:
    """Column ``P . b``: expected energy delivered by each input symbol."""
    if len(b) != ch.output_size:
        raise ValueError(f"energy functional has length {len(b)}, channel output size is {ch.output_size}")
    return ch.rows @ b.values


@dataclass(frozen=True, eq=False)
class MulticastProblem:
    """L channels sharing one input alphabet, each with an energy requirement."""

    channels: tuple
    energies: tuple
    constraints: np.ndarray

    def __post_init__(self):
        channels = tuple(self.channels)
        energies = tuple(self.energies)
        B = np.atleast_1d(np.array(self.constraints, dtype=float))
        if not channels:
            raise ValueError("a multicast problem needs at least one channel")
        if len(energies) != len(channels) or B.shape != (len(channels),):
            raise ValueError(
                f"got {len(channels)} channels, {len(energies)} energy functionals "
                f"and {B.size} constraints"
            )
        n = channels[0].input_size
        for i, (ch, b) in enumerate(zip(channels, energies)):
            if ch.input_size != n:
                raise ValueError(f"channel {i} has input size {ch.input_size}, expected {n}")
            if len(b) != ch.output_size:
                raise ValueError(f"energy functional {i} has length {len(b)}, channel output size is {ch.output_size}")
        if not np.all(np.isfinite(B)) or B.min() < 0:
            raise ValueError("energy constraints must be finite and nonnegative")
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "constraints", _frozen(B))

    @classmethod
    def common(cls, channels, B: float, energies=None) -> "MulticastProblem":
        """All receivers share one requirement ``B``; energies default to Hamming weight."""
        channels = tuple(channels)
        if energies is None:
            energies = [hamming_energy(ch.output_size) for ch in channels]
        elif isinstance(energies, EnergyFunctional):
            energies = [energies] * len(channels)
        return cls(channels, tuple(energies), np.full(len(channels), float(B)))

    @property
    def size(self) -> int:
        return len(self.channels)

    @property
    def input_size(self) -> int:
        return self.channels[0].input_size

    @property
    def energy_rows(self) -> np.ndarray:
        """(L, |X|) matrix whose row l is ``P(l) . b_l``."""
        return np.array([energy_per_input(ch, b) for ch, b in zip(self.channels, self.energies)])

    def subproblem(self, indices) -> "MulticastProblem":
        idx = list(indices)
        return MulticastProblem(
            tuple(self.channels[i] for i in idx),
            tuple(self.energies[i] for i in idx),
            self.constraints[idx],
        )

    def with_constraints(self, B) -> "MulticastProblem":
        B = np.broadcast_to(np.asarray(B, dtype=float), (self.size,))
        return MulticastProblem(self.channels, self.energies, B)
