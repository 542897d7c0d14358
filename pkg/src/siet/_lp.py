"""Tiny linear programs solved exactly by vertex enumeration.

Alphabets here are desk-sized (a handful of symbols), so enumerating every
basis is cheap and returns exact vertices rather than interior iterates.
"""
from __future__ import annotations

from itertools import combinations, islice

import numpy as np

FEAS_TOL = 1e-10
_DET_TOL = 1e-12
_CHUNK = 50_000


def _candidates(A_ub, b_ub, A_eq, b_eq):
    """Yield (points, ok) for every basis of tight inequality constraints."""
    d = A_ub.shape[1]
    k = d - A_eq.shape[0]
    if k < 0:
        raise ValueError("more equality constraints than variables")
    m = A_ub.shape[0]
    if k > m:
        return
    combos = combinations(range(m), k)
    while True:
        chunk = np.array(list(islice(combos, _CHUNK)), dtype=int).reshape(-1, k)
        if chunk.size == 0 and k > 0:
            return
        n = chunk.shape[0] if k > 0 else 1
        M = np.empty((n, d, d))
        rhs = np.empty((n, d))
        M[:, : A_eq.shape[0]] = A_eq
        rhs[:, : A_eq.shape[0]] = b_eq
        if k:
            M[:, A_eq.shape[0]:] = A_ub[chunk]
            rhs[:, A_eq.shape[0]:] = b_ub[chunk]
        ok = np.abs(np.linalg.det(M)) > _DET_TOL
        pts = np.full((n, d), np.nan)
        if ok.any():
            pts[ok] = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
            viol = (pts[ok] @ A_ub.T - b_ub).max(axis=1, initial=-np.inf)
            eq_err = np.abs(pts[ok] @ A_eq.T - b_eq).max(axis=1, initial=0.0)
            feas = np.zeros(n, dtype=bool)
            feas[ok] = (viol <= FEAS_TOL) & (eq_err <= FEAS_TOL)
            ok = feas
        yield pts, ok
        if k == 0:
            return


def _as_arrays(A_ub, b_ub, A_eq, b_eq, d):
    A_ub = np.asarray(A_ub, dtype=float).reshape(-1, d)
    b_ub = np.asarray(b_ub, dtype=float).reshape(-1)
    if A_eq is None:
        A_eq, b_eq = np.zeros((0, d)), np.zeros(0)
    A_eq = np.asarray(A_eq, dtype=float).reshape(-1, d)
    b_eq = np.asarray(b_eq, dtype=float).reshape(-1)
    return A_ub, b_ub, A_eq, b_eq


def vertex_lp(c, A_ub, b_ub, A_eq=None, b_eq=None):
    """Maximize ``c @ z`` s.t. ``A_ub z <= b_ub``, ``A_eq z == b_eq``.

    The feasible set must be a pointed polyhedron on which the objective is
    bounded. Returns ``(value, z)`` or ``None`` when no vertex is feasible.
    Among optimal vertices the first basis in enumeration order wins.
    """
    c = np.asarray(c, dtype=float)
    A_ub, b_ub, A_eq, b_eq = _as_arrays(A_ub, b_ub, A_eq, b_eq, c.size)
    best_val, best_z = -np.inf, None
    for pts, ok in _candidates(A_ub, b_ub, A_eq, b_eq):
        if not ok.any():
            continue
        vals = np.where(ok, np.nan_to_num(pts) @ c, -np.inf)
        i = int(np.argmax(vals))
        if vals[i] > best_val + 1e-15:
            best_val, best_z = float(vals[i]), pts[i].copy()
    if best_z is None:
        return None
    return best_val, best_z


def polytope_vertices(A_ub, b_ub, A_eq=None, b_eq=None, decimals: int = 12) -> np.ndarray:
    """All distinct vertices of ``{z : A_ub z <= b_ub, A_eq z == b_eq}``."""
    A_ub = np.asarray(A_ub, dtype=float)
    d = A_ub.shape[1]
    A_ub, b_ub, A_eq, b_eq = _as_arrays(A_ub, b_ub, A_eq, b_eq, d)
    found = [pts[ok] for pts, ok in _candidates(A_ub, b_ub, A_eq, b_eq) if ok.any()]
    if not found:
        return np.zeros((0, d))
    pts = np.concatenate(found)
    _, idx = np.unique(np.round(pts, decimals), axis=0, return_index=True)
    return pts[np.sort(idx)]


def simplex_polytope(energy_rows, B):
    """Inequalities for ``{q in simplex : energy_rows @ q >= B}`` in ``A_ub q <= b_ub`` form."""
    E = np.atleast_2d(np.asarray(energy_rows, dtype=float))
    n = E.shape[1]
    A_ub = np.vstack([-np.eye(n), -E])
    b_ub = np.concatenate([np.zeros(n), -np.asarray(B, dtype=float).reshape(-1)])
    return A_ub, b_ub, np.ones((1, n)), np.ones(1)
