"""Splitting receivers into groups, each served by its own common signal.

A segmentation is scored two ways: by its worst group's multicast capacity
``C_Q`` and by its largest segmentation loss, the gap between a group's
multicast capacity and its weakest member's best rate under the group's
joint energy constraints.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ._ascent import DEFAULT_CONFIG, SolverConfig, maximize_min_information
from .channels import MulticastProblem
from .multicast import InfeasibleConstraintError, require_feasible, _clamped, solve

MAX_RECEIVERS = 12
TIE_TOL = 1e-9

__all__ = [
    "Segmentation",
    "SegmentationScore",
    "GroupScore",
    "enumerate_partitions",
    "stirling2",
    "group_capacity",
    "segmentation_loss",
    "score_groups",
    "score_partition",
    "optimize_capacity",
    "optimize_loss",
    "scan",
]


@dataclass(frozen=True)
class Segmentation:
    """Disjoint nonempty receiver groups, each sorted, ordered by smallest member."""

    groups: tuple

    def __post_init__(self):
        groups = tuple(tuple(sorted(int(i) for i in g)) for g in self.groups)
        if any(len(g) == 0 for g in groups):
            raise ValueError("groups must be nonempty")
        members = [i for g in groups for i in g]
        if len(members) != len(set(members)):
            raise ValueError("groups must be disjoint")
        if sorted(members) != list(range(len(members))):
            raise ValueError("groups must cover 0..L-1")
        object.__setattr__(self, "groups", tuple(sorted(groups)))

    @property
    def size(self) -> int:
        return len(self.groups)

    @property
    def receivers(self) -> int:
        return sum(len(g) for g in self.groups)

    def labels(self) -> tuple:
        """Restricted growth string: receiver i's group rank by smallest member."""
        out = [0] * self.receivers
        for k, g in enumerate(self.groups):
            for i in g:
                out[i] = k
        return tuple(out)

    def key(self) -> tuple:
        """Canonical sort key (lexicographic on ``labels``); lower keys win ties."""
        return self.labels()

    def __str__(self):
        return "".join("{" + ",".join(str(i + 1) for i in g) + "}" for g in self.groups)


@dataclass(frozen=True)
class GroupScore:
    capacity: float
    loss: float
    member_capacities: tuple
    converged: bool


@dataclass(frozen=True)
class SegmentationScore:
    per_group_capacity: tuple
    c_q: float
    per_group_loss: tuple
    max_loss: float
    converged: bool = True


def stirling2(n: int, k: int) -> int:
    """Number of partitions of n labelled items into k nonempty blocks."""
    row = [1] + [0] * k
    for i in range(1, n + 1):
        new = [0] * (k + 1)
        for j in range(1, min(i, k) + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return row[k]


def enumerate_partitions(L: int, K: int) -> Iterator[Segmentation]:
    """Every partition of ``range(L)`` into exactly K groups, each once.

    Generated as restricted growth strings: receiver i joins an existing
    group or opens the next one, never skipping labels. Output is in
    canonical order, lexicographic on the growth string.
    """
    if not (1 <= K <= L <= MAX_RECEIVERS):
        raise ValueError(f"need 1 <= K <= L <= {MAX_RECEIVERS}, got L={L}, K={K}")
    a = [0] * L

    def rec(i, used):
        if L - i < K - used:
            return
        if i == L:
            if used == K:
                groups = [[] for _ in range(K)]
                for idx, label in enumerate(a):
                    groups[label].append(idx)
                yield Segmentation(tuple(tuple(g) for g in groups))
            return
        for label in range(min(used + 1, K)):
            a[i] = label
            yield from rec(i + 1, max(used, label + 1))

    yield from rec(0, 0)


def _member_capacity(sub: MulticastProblem, m: int, config: SolverConfig) -> tuple:
    """max over the group's admissible inputs of receiver m's information alone."""
    feas = require_feasible(sub)
    B = _clamped(sub, feas)
    res = maximize_min_information([sub.channels[m].rows], sub.energy_rows, B, feas.witness, config)
    return float(res.mi[0]), res.converged


def _score_group(prob: MulticastProblem, group: tuple, config: SolverConfig) -> GroupScore:
    sub = prob.subproblem(list(group))
    sol = solve(sub, config)
    if len(group) == 1:
        return GroupScore(sol.value, 0.0, (sol.value,), sol.converged)
    members, ok = [], sol.converged
    for m in range(len(group)):
        c, conv = _member_capacity(sub, m, config)
        members.append(c)
        ok = ok and conv
    loss = abs(sol.value - min(members))
    return GroupScore(sol.value, loss, tuple(members), ok)


def group_capacity(group, prob: MulticastProblem, config: SolverConfig = DEFAULT_CONFIG) -> float:
    """Multicast capacity-energy of the receivers in ``group`` under their own constraints."""
    return solve(prob.subproblem(sorted(group)), config).value


def segmentation_loss(group, prob: MulticastProblem, config: SolverConfig = DEFAULT_CONFIG) -> float:
    """``|C_G - min_m max_{q in F_G} I_m(q)|``; exactly 0 for a singleton."""
    return _score_group(prob, tuple(sorted(group)), config).loss


def score_groups(prob: MulticastProblem, groups, config: SolverConfig = DEFAULT_CONFIG, threads: int = 1) -> dict:
    """Score each distinct group once. Infeasible groups map to ``None``."""
    todo = sorted({tuple(sorted(g)) for g in groups})

    def one(g):
        try:
            return _score_group(prob, g, config)
        except InfeasibleConstraintError:
            return None

    if threads <= 1:
        scores = [one(g) for g in todo]
    else:
        with ThreadPoolExecutor(threads) as pool:
            scores = list(pool.map(one, todo))
    return dict(zip(todo, scores))


def score_partition(seg: Segmentation, cache: dict):
    parts = [cache[g] for g in seg.groups]
    if any(p is None for p in parts):
        return None
    caps = tuple(p.capacity for p in parts)
    losses = tuple(p.loss for p in parts)
    return SegmentationScore(caps, min(caps), losses, max(losses), all(p.converged for p in parts))


def scan(prob: MulticastProblem, K: int, config: SolverConfig = DEFAULT_CONFIG, threads: int = 1) -> list:
    """``(Segmentation, SegmentationScore or None)`` for every K-partition, canonical order."""
    parts = list(enumerate_partitions(prob.size, K))
    cache = score_groups(prob, [g for s in parts for g in s.groups], config, threads)
    return [(s, score_partition(s, cache)) for s in parts]


def _pick(rows, objective):
    rows = [(s, sc) for s, sc in rows if sc is not None]
    if not rows:
        raise InfeasibleConstraintError("no partition has jointly feasible energy constraints in every group")
    vals = np.array([objective(sc) for _, sc in rows])
    best = vals.max()
    # rows are in canonical order, so the first near-best entry wins ties
    i = int(np.flatnonzero(vals >= best - TIE_TOL)[0])
    return rows[i]


def optimize_capacity(prob: MulticastProblem, K: int, config: SolverConfig = DEFAULT_CONFIG, threads: int = 1, table=None):
    """Partition maximizing the worst group's multicast capacity.

    ``table`` may be a previous :func:`scan` of the same problem.
    """
    return _pick(table if table is not None else scan(prob, K, config, threads), lambda sc: sc.c_q)


def optimize_loss(prob: MulticastProblem, K: int, config: SolverConfig = DEFAULT_CONFIG, threads: int = 1, table=None):
    """Partition minimizing the largest per-group segmentation loss."""
    return _pick(table if table is not None else scan(prob, K, config, threads), lambda sc: -sc.max_loss)
