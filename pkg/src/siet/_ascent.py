"""Max-min mutual information over a simplex cut by energy half-spaces.

Both the point-to-point and the multicast solvers funnel into
:func:`maximize_min_information`. The objective ``F(q) = min_l I(q; P_l)`` is
concave; the feasible set is ``{q in simplex : E q >= B}``.

Pipeline: projected supergradient ascent (Dykstra projection, iterate
averaging) for a warm start, then a refinement loop of exact line searches
along coordinate-pair directions and along the min-norm ascent direction of
the nearly-active channels, then a Frank-Wolfe style upper bound on the
remaining gap computed over the vertices of the feasible polytope.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._lp import polytope_vertices, simplex_polytope, vertex_lp

log = logging.getLogger(__name__)

LOG2E = np.log2(np.e)


@dataclass(frozen=True)
class SolverConfig:
    gap_tol: float = 1e-7
    step_scale: float = 0.1
    max_iter: int = 200_000
    stall_window: int = 200
    stall_tol: float = 1e-9
    tie_tol: float = 1e-9
    refine_rounds: int = 500
    dykstra_iter: int = 20_000
    dykstra_tol: float = 1e-12


DEFAULT_CONFIG = SolverConfig()


@dataclass
class AscentResult:
    q: np.ndarray
    mi: np.ndarray
    value: float
    gap: float
    converged: bool
    iterations: int
    refine_rounds: int


def _mi(q, rows):
    py = q @ rows
    joint = q[:, None] * rows
    m = joint > 0
    return max(0.0, float(np.sum(joint[m] * np.log2(rows[m] / np.broadcast_to(py, rows.shape)[m]))))


def _grad(q, rows):
    py = q @ rows
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(rows > 0, rows * np.log2(rows / py), 0.0)
    return t.sum(axis=1) - LOG2E


def project_simplex(y: np.ndarray) -> np.ndarray:
    n = y.size
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.nonzero(u - css / np.arange(1, n + 1) > 0)[0][-1]
    return np.maximum(y - css[k] / (k + 1), 0.0)


def _project_halfspace(z, a, B, aa):
    s = a @ z - B
    if s >= 0 or aa == 0:
        return z
    return z - s / aa * a


def dykstra_project(y, E, B, max_iter=20_000, tol=1e-14):
    """Euclidean projection of ``y`` onto ``{q in simplex : E q >= B}``."""
    x = project_simplex(y)
    if E.size == 0 or np.all(E @ x >= B):
        return x
    # every set lives in the hyperplane sum(q) = 1; project the half-spaces inside it
    x = y - (y.sum() - 1.0) / y.size
    means = E.mean(axis=1)
    E = E - means[:, None]
    B = B - means
    aa = np.einsum("ij,ij->i", E, E)
    incs = np.zeros((1 + len(B), x.size))
    for _ in range(max_iter):
        x_old = x
        z = project_simplex(x + incs[0])
        incs[0] = x + incs[0] - z
        x = z
        for i in range(len(B)):
            z = _project_halfspace(x + incs[i + 1], E[i], B[i], aa[i])
            incs[i + 1] = x + incs[i + 1] - z
            x = z
        if np.max(np.abs(x - x_old)) < tol:
            break
    return x


class _Problem:
    def __init__(self, rows, E, B, config: SolverConfig):
        self.rows = [np.asarray(r, dtype=float) for r in rows]
        self.E = np.atleast_2d(np.asarray(E, dtype=float)).reshape(-1, self.rows[0].shape[0])
        self.B = np.asarray(B, dtype=float).reshape(-1)
        self.n = self.rows[0].shape[0]
        self.cfg = config
        self.scale = 1.0 + np.abs(self.E).max(initial=0.0)
        self._vertices = None

    def mis(self, q):
        return np.array([_mi(q, r) for r in self.rows])

    def value(self, q):
        return min(_mi(q, r) for r in self.rows)

    def argmin(self, mis):
        return int(np.flatnonzero(mis <= mis.min() + self.cfg.tie_tol)[0])

    def slack(self, q):
        return self.E @ q - self.B

    @property
    def vertices(self):
        if self._vertices is None:
            self._vertices = polytope_vertices(*simplex_polytope(self.E, self.B))
        return self._vertices

    def interval(self, q, d):
        """Largest [lo, hi] with q + t d feasible for all t in it."""
        lo, hi = -np.inf, np.inf
        neg, pos = d < 0, d > 0
        if neg.any():
            hi = min(hi, np.min(q[neg] / -d[neg]))
        if pos.any():
            lo = max(lo, np.max(-q[pos] / d[pos]))
        s = np.maximum(self.slack(q), 0.0)
        ad = self.E @ d
        # directions inside a constraint face carry rounding residue in E @ d
        ad[np.abs(ad) <= 1e-10 * np.linalg.norm(self.E, axis=1) * np.linalg.norm(d)] = 0.0
        for si, adi in zip(s, ad):
            if adi > 0:
                lo = max(lo, -si / adi)
            elif adi < 0:
                hi = min(hi, si / -adi)
        return min(lo, 0.0), max(hi, 0.0)


def _repair(prob: _Problem, q, witness):
    """Pull a slightly infeasible point toward a feasible witness."""
    q = np.maximum(q, 0.0)
    q = q / q.sum()
    s = prob.slack(q)
    if s.size == 0 or s.min() >= 0:
        return q
    dw = prob.E @ (witness - q)
    theta = 0.0
    for si, di in zip(s, dw):
        if si < 0:
            theta = max(theta, min(1.0, -si / di) if di > 0 else 1.0)
    q = (1.0 - theta) * q + theta * witness
    return q


def _line_max(prob: _Problem, q, d, lo, hi, f0):
    """Maximize the concave F(q + t d) over [lo, hi] by bisection on the slope."""
    nz = d != 0
    dn = d[nz]

    def at(t):
        p = q + t * d
        np.maximum(p, 0.0, out=p)
        return p

    def slope(t):
        p = at(t)
        mis = prob.mis(p)
        k = int(np.argmin(mis))
        g = _grad(p, prob.rows[k])[nz]
        return float(g @ dn)

    a, b = lo, hi
    for _ in range(200):
        m = 0.5 * (a + b)
        if not a < m < b:
            break
        s = slope(m)
        if s > 0:
            a = m
        elif s < 0:
            b = m
        else:
            a = b = m
            break
    best_t, best_f = 0.0, f0
    for t in (a, 0.5 * (a + b), b):
        f = prob.value(at(t))
        if f > best_f:
            best_t, best_f = t, f
    return best_t, best_f


def _min_norm_weights(H):
    """Weights w on the simplex minimizing ||w @ H|| (face enumeration)."""
    k = H.shape[0]
    if k == 1:
        return np.ones(1)
    best_w, best_n = None, np.inf
    for r in range(1, k + 1):
        for S in combinations(range(k), r):
            Hs = H[list(S)]
            G = Hs @ Hs.T
            A = np.block([[2 * G, np.ones((r, 1))], [np.ones((1, r)), np.zeros((1, 1))]])
            rhs = np.zeros(r + 1)
            rhs[-1] = 1.0
            try:
                sol = np.linalg.lstsq(A, rhs, rcond=None)[0][:r]
            except np.linalg.LinAlgError:
                continue
            if sol.min() < -1e-12:
                continue
            w = np.zeros(k)
            w[list(S)] = np.maximum(sol, 0.0) / max(np.maximum(sol, 0.0).sum(), 1e-300)
            nrm = float(np.linalg.norm(w @ H))
            if nrm < best_n - 1e-15:
                best_w, best_n = w, nrm
    return best_w


def _min_norm_direction(prob: _Problem, q, mis, delta):
    F = mis.min()
    act = np.flatnonzero(mis <= F + delta)
    if act.size > 6:
        return None
    fixed = q <= 1e-15
    cons = [np.ones(prob.n)]
    cons += [np.eye(prob.n)[x] for x in np.flatnonzero(fixed)]
    s = prob.slack(q)
    cons += [prob.E[i] for i in np.flatnonzero(s <= 1e-9 * prob.scale)]
    C = np.array(cons)
    P = np.eye(prob.n) - np.linalg.pinv(C) @ C
    G = np.array([_grad(q, prob.rows[i]) for i in act])
    G[:, fixed] = 0.0
    if not np.all(np.isfinite(G)):
        return None
    H = G @ P
    w = _min_norm_weights(H)
    if w is None:
        return None
    d = w @ H
    if np.linalg.norm(d) < 1e-13:
        return None
    # second pass strips the residue left by projecting an O(1) gradient
    return d @ P


def _refine(prob: _Problem, q):
    f = prob.value(q)
    pairs = list(combinations(range(prob.n), 2))
    rounds = 0
    for rounds in range(1, prob.cfg.refine_rounds + 1):
        f_start = f
        for i, j in pairs:
            d = np.zeros(prob.n)
            d[i], d[j] = -1.0, 1.0
            lo, hi = prob.interval(q, d)
            if hi - lo < 1e-15:
                continue
            t, f_new = _line_max(prob, q, d, lo, hi, f)
            if f_new > f:
                q = np.maximum(q + t * d, 0.0)
                f = prob.value(q)
        for delta in (1e-3, 1e-5, 1e-7, 1e-9, 0.0):
            d = _min_norm_direction(prob, q, prob.mis(q), delta)
            if d is None:
                continue
            lo, hi = prob.interval(q, d)
            if hi <= 1e-16:
                continue
            t, f_new = _line_max(prob, q, d, 0.0, hi, f)
            if f_new > f:
                q = np.maximum(q + t * d, 0.0)
                f = prob.value(q)
                break
        if f - f_start <= 1e-15:
            break
    return q, rounds


def gap_bound(prob: _Problem, q, mis, active_tol=1e-6):
    """Upper bound on ``max F - F(q)`` from supergradients of the nearly-active channels.

    For weights w on those channels, concavity gives
    ``max F <= sum_l w_l I_l(q) + max_v sum_l w_l g_l . (v - q)`` over polytope
    vertices v; the bound is minimized over w.
    """
    V = prob.vertices
    F = float(mis.min())
    if V.shape[0] <= 1:
        return 0.0
    act = np.flatnonzero(mis <= F + active_tol)
    D = V - q
    moves = np.abs(D) > 1e-13
    c = np.empty((act.size, V.shape[0]))
    for r, i in enumerate(act):
        g = _grad(q, prob.rows[i])
        with np.errstate(invalid="ignore"):
            terms = np.where(moves, g * D, 0.0)
        c[r] = mis[i] + terms.sum(axis=1)
    if not np.all(np.isfinite(c)):
        return np.inf
    if act.size == 1:
        return max(0.0, float(c[0].max()) - F)
    k = act.size
    # variables (w_1..w_k, u): maximize -u, sum_l w_l c[l, v] <= u, w >= 0, sum w = 1
    A_ub = np.vstack([np.hstack([c.T, -np.ones((V.shape[0], 1))]), np.hstack([-np.eye(k), np.zeros((k, 1))])])
    b_ub = np.zeros(V.shape[0] + k)
    A_eq = np.hstack([np.ones((1, k)), np.zeros((1, 1))])
    sol = vertex_lp(np.r_[np.zeros(k), -1.0], A_ub, b_ub, A_eq, [1.0])
    if sol is None:
        return np.inf
    return max(0.0, -sol[0] - F)


def maximize_min_information(rows, E, B, witness, config: SolverConfig = DEFAULT_CONFIG, start=None) -> AscentResult:
    """Solve ``max_q min_l I(q; rows[l])`` s.t. ``q`` in the simplex and ``E q >= B``.

    ``witness`` must be a feasible point (used to repair rounding drift of the
    projections). Feasibility is the caller's responsibility.
    """
    prob = _Problem(rows, E, B, config)
    cfg = config
    n = prob.n
    q = np.full(n, 1.0 / n) if start is None else np.asarray(start, dtype=float)
    if prob.slack(q).min(initial=0.0) < 0:
        q = _repair(prob, dykstra_project(q, prob.E, prob.B, cfg.dykstra_iter, cfg.dykstra_tol), witness)

    best_q, best_f = q.copy(), prob.value(q)
    avg = q.copy()
    checkpoint, since = best_f, 0
    it = 0
    for it in range(1, cfg.max_iter + 1):
        mis = prob.mis(q)
        g = _grad(q, prob.rows[prob.argmin(mis)])
        g = np.minimum(g, 64.0)
        g = g - g.mean()
        nrm = np.linalg.norm(g)
        if nrm < 1e-15:
            break
        y = q + cfg.step_scale / np.sqrt(it) * g / nrm
        q = _repair(prob, dykstra_project(y, prob.E, prob.B, cfg.dykstra_iter, cfg.dykstra_tol), witness)
        avg += (q - avg) / (it + 1)
        for cand in (q, avg):
            f = prob.value(cand)
            if f > best_f:
                best_q, best_f = cand.copy(), f
        if best_f - checkpoint >= cfg.stall_tol:
            checkpoint, since = best_f, 0
        else:
            since += 1
            if since >= cfg.stall_window:
                break

    q = _repair(prob, best_q, witness)
    q, rounds = _refine(prob, q)
    q = _repair(prob, q, witness)
    mis = prob.mis(q)
    gap = gap_bound(prob, q, mis)
    log.debug("ascent: %d supergradient iterations, %d refinement rounds, gap %.3g", it, rounds, gap)
    return AscentResult(q, mis, float(mis.min()), float(gap), bool(gap <= cfg.gap_tol), it, rounds)
