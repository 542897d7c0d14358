"""Amplitude-constrained Gaussian multicast with receive-energy constraint.

Every receiver sees ``Y = X + N(0, sigma_l^2)`` and harvests ``b(y) = y^2``,
so an input delivers ``x^2 + sigma_l^2``. The quietest receiver is the
hardest to power and the noisiest one limits the rate, so the multicast
problem reduces to maximizing ``I(X; Y_noisiest)`` over inputs on ``[-P, P]``
with ``E[X^2] + sigma_quietest^2 >= B``.

Inputs are restricted to a symmetric grid. For a tilt ``s`` the grid
optimum of ``I + s E[X^2]`` is found by a small-support Newton method, and
``s`` is bisected until the energy constraint is met; the final ``s`` is the
constraint's multiplier. The continuous optimality condition (marginal
information density plus multiplier times ``x^2``) is then checked on a
grid ten times finer.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .multicast import InfeasibleConstraintError

LOG2E = np.log2(np.e)

TAIL_SIGMAS = 8.0
NORMALIZATION_TOL = 1e-8


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class GaussianMulticast:
    sigmas: tuple
    peak: float
    constraint: float = 0.0

    def __post_init__(self):
        sig = tuple(float(s) for s in np.atleast_1d(self.sigmas))
        if not sig or min(sig) <= 0:
            raise ValueError("noise standard deviations must be positive")
        if not self.peak > 0:
            raise ValueError("peak amplitude must be positive")
        if self.constraint < 0:
            raise ValueError("energy constraint must be nonnegative")
        object.__setattr__(self, "sigmas", sig)

    @property
    def max_energy(self) -> float:
        lmin, _ = reduce_channels(self)
        return self.peak ** 2 + self.sigmas[lmin] ** 2


@dataclass(frozen=True, eq=False)
class DiscreteInputCdf:
    support: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.support, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        if x.shape != m.shape or x.ndim != 1 or x.size == 0:
            raise ValueError("support and masses must be matching non-empty vectors")
        if np.any(np.diff(x) < 0):
            raise ValueError("support must be sorted")
        if m.min() < 0 or abs(m.sum() - 1.0) > 1e-12:
            raise ValueError("masses must be nonnegative and sum to 1")
        object.__setattr__(self, "support", x)
        object.__setattr__(self, "masses", m / m.sum())

    @property
    def second_moment(self) -> float:
        return float(self.masses @ self.support ** 2)

    @property
    def peak(self) -> float:
        return float(np.abs(self.support).max())

    def asymmetry(self) -> float:
        """Largest mass difference between x and -x (support assumed symmetric)."""
        return float(np.abs(self.masses - self.masses[::-1]).max())

    def compact(self, tol: float = 1e-9) -> "DiscreteInputCdf":
        keep = self.masses > tol
        return DiscreteInputCdf(self.support[keep], self.masses[keep] / self.masses[keep].sum())


@dataclass(frozen=True)
class KktReport:
    lam: float
    max_violation: float
    J_value: float
    passed: bool


@dataclass(frozen=True)
class GaussianSolution:
    value: float
    cdf: DiscreteInputCdf
    kkt: KktReport
    information_channel: int
    energy_channel: int
    iterations: int


def rho(x, sigma):
    """Expected harvested energy ``x^2 + sigma^2`` for input ``x``."""
    return np.asarray(x, dtype=float) ** 2 + sigma ** 2


def expected_rho(F: DiscreteInputCdf, sigma: float) -> float:
    return float(F.masses @ rho(F.support, sigma))


def reduce_channels(gm: GaussianMulticast):
    """(index of smallest variance, index of largest variance); first index wins ties."""
    s = np.asarray(gm.sigmas)
    return int(np.argmin(s)), int(np.argmax(s))


@lru_cache(maxsize=64)
def _legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def quadrature_nodes(peak: float, sigma: float, panels_per_sigma: int = 2, order: int = 16):
    """Composite Gauss-Legendre nodes/weights over ``[-P - 8 sigma, P + 8 sigma]``."""
    lo, hi = -peak - TAIL_SIGMAS * sigma, peak + TAIL_SIGMAS * sigma
    n_pan = max(4, int(np.ceil((hi - lo) / sigma * panels_per_sigma)))
    edges = np.linspace(lo, hi, n_pan + 1)
    t, w = _legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    y = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wy = (half[:, None] * w[None, :]).ravel()
    return y, wy


def _log2_gauss(y, x, sigma):
    """log2 of the N(x, sigma^2) density at y, broadcast as (x, y)."""
    d = np.subtract.outer(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return -(d ** 2) / (2 * sigma ** 2) * np.log2(np.e) - np.log2(sigma * np.sqrt(2 * np.pi))


class _Kernel:
    """Channel transition density sampled on quadrature nodes for a fixed input grid."""

    def __init__(self, x, sigma, peak):
        self.x = np.asarray(x, dtype=float)
        self.sigma = sigma
        self.y, self.w = quadrature_nodes(peak, sigma)
        self.logQ = _log2_gauss(self.y, self.x, sigma)
        self.Q = np.exp2(self.logQ)
        self.wQ = self.Q * self.w

    def output_density(self, masses):
        return masses @ self.Q

    def divergences(self, masses):
        """i(x; F) for every grid point x, in bits."""
        p = self.output_density(masses)
        logp = np.log2(np.maximum(p, 1e-300))
        return np.einsum("xy,xy->x", self.wQ, self.logQ) - self.wQ @ logp

    def check_normalization(self, masses):
        total = float(self.output_density(masses) @ self.w)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise QuadratureError(f"output density integrates to {total!r}")
        return total


def output_density(y, F: DiscreteInputCdf, sigma: float) -> np.ndarray:
    return F.masses @ np.exp2(_log2_gauss(y, F.support, sigma))


def marginal_information_density(x, F: DiscreteInputCdf, sigma: float, peak: Optional[float] = None):
    """i(x; F) = integral of Q(y|x) log2(Q(y|x) / p(y; F)) dy, in bits.

    Accepts scalar or array ``x``. Integration covers ``[-P - 8 sigma, P + 8 sigma]``
    with ``P`` the larger of ``peak`` and the reach of ``x`` and the support.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    reach = max(F.peak, float(np.abs(xs).max()), peak or 0.0)
    y, w = quadrature_nodes(reach, sigma)
    logQ = _log2_gauss(y, xs, sigma)
    logp = np.log2(np.maximum(output_density(y, F, sigma), 1e-300))
    Q = np.exp2(logQ)
    total = float(output_density(y, F, sigma) @ w)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise QuadratureError(f"output density integrates to {total!r}")
    out = np.einsum("xy,xy->x", Q * w, logQ - logp)
    return out if np.ndim(x) else float(out[0])


def gaussian_mutual_information(F: DiscreteInputCdf, sigma: float) -> float:
    """I(X; X + N(0, sigma^2)) in bits for a discrete input."""
    return float(F.masses @ marginal_information_density(F.support, F, sigma))


def _tilted_ba(kern: _Kernel, x2, s, q0, tol, max_iter):
    """Maximize I + s E[X^2] over masses on the grid (Blahut-Arimoto with cost)."""
    q = q0.copy()
    it = 0
    for it in range(1, max_iter + 1):
        c = kern.divergences(q) + s * x2
        avg = float(q @ c)
        if c.max() - avg <= tol:
            break
        q = q * np.exp2(c - c.max())
        q /= q.sum()
    return q, it


def _face_newton(kern: _Kernel, q, c, S):
    """Newton direction for I + s E[X^2] on the face {q_x = 0 off S, sum q = 1}."""
    idx = np.flatnonzero(S)
    p = np.maximum(kern.output_density(q), 1e-300)
    QS = kern.Q[idx]
    H = -LOG2E * (kern.wQ[idx] / p) @ QS.T
    k = idx.size
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = H
    K[:k, k] = K[k, :k] = 1.0
    rhs = np.r_[-c[idx], 0.0]
    sol = np.linalg.lstsq(K, rhs, rcond=1e-13)[0]
    d = np.zeros_like(q)
    d[idx] = sol[:k]
    return d


def _objective(kern, x2, s, q):
    return float(q @ (kern.divergences(q) + s * x2))


def _tilted_newton(kern: _Kernel, x2, s, q0, tol, max_iter):
    """Support-reduction Newton for ``max_q I(q) + s q.x2`` on the simplex.

    The support stays small: each round adds the grid point with the largest
    ``c_x = i(x; q) + s x^2``, takes a Newton step on that face and drops
    points whose mass hits zero. Newton on the whole grid is hopeless since
    neighbouring Gaussian kernels are nearly collinear. Stops on the
    Blahut-Arimoto certificate ``max_x c_x - q.c <= tol``.
    """
    q = np.where(q0 > 1e-12, q0, 0.0)
    if np.count_nonzero(q) > 16:
        q = np.zeros_like(q0)
        q[0] = q[-1] = 0.5
    q /= q.sum()
    it = 0
    while it < max_iter:
        it += 1
        c = kern.divergences(q) + s * x2
        f = float(q @ c)
        if c.max() - f <= tol:
            break
        S = q > 0
        j = int(np.argmax(np.where(S, -np.inf, c)))
        if c[j] > f + tol:
            S[j] = True
        for _ in range(q.size):
            d = _face_newton(kern, q, c, S)
            stuck = S & (q <= 0) & (d < 0)
            if not stuck.any():
                break
            S &= ~stuck
        slope = float(c @ d)
        moved = False
        if slope > 0:
            neg = d < 0
            t = min(1.0, float(np.min(-q[neg] / d[neg]))) if neg.any() else 1.0
            while t > 1e-14:
                trial = np.maximum(q + t * d, 0.0)
                trial[trial < 1e-15] = 0.0
                trial /= trial.sum()
                if _objective(kern, x2, s, trial) > f:
                    q, moved = trial, True
                    break
                t *= 0.5
        if not moved:
            # Frank-Wolfe step toward the most violating point
            e = np.zeros_like(q)
            e[int(np.argmax(c))] = 1.0
            t = 1.0
            while t > 1e-16:
                trial = (1 - t) * q + t * e
                if _objective(kern, x2, s, trial) > f:
                    q = trial
                    break
                t *= 0.5
            else:
                break
    return q, it


def kkt_verify(F0: DiscreteInputCdf, lam: float, gm: GaussianMulticast, tol: float = 1e-4, refine: int = 10) -> KktReport:
    """Check ``i(x;F0) + lam x^2 <= I(F0) + lam E_F0[X^2]`` on a fine grid of ``[-P, P]``.

    Testing point masses suffices because the left side is linear in the test
    distribution.
    """
    if lam < 0:
        raise ValueError("multiplier must be nonnegative")
    lmin, lmax = reduce_channels(gm)
    sig_i, sig_e = gm.sigmas[lmax], gm.sigmas[lmin]
    n_fine = max(2, (F0.support.size - 1) * refine + 1)
    xs = np.linspace(-gm.peak, gm.peak, n_fine)
    i_fine = marginal_information_density(xs, F0, sig_i, gm.peak)
    info = gaussian_mutual_information(F0, sig_i)
    m2 = F0.second_moment
    viol = float(np.max(i_fine + lam * xs ** 2) - (info + lam * m2))
    J = gm.constraint - sig_e ** 2 - m2
    return KktReport(float(lam), viol, float(J), bool(viol <= tol))


def _forced_multiplier(F0, gm, sig_i, m2):
    """Smallest lam making the optimality condition hold when F0 sits at full power."""
    xs = np.linspace(-gm.peak, gm.peak, 2001)
    i_x = marginal_information_density(xs, F0, sig_i, gm.peak)
    info = gaussian_mutual_information(F0, sig_i)
    inner = m2 - xs ** 2 > 1e-9 * max(m2, 1.0)
    if not inner.any():
        return 0.0
    return max(0.0, float(np.max((i_x[inner] - info) / (m2 - xs[inner] ** 2))))


def gaussian_capacity_energy(
    gm: GaussianMulticast,
    grid_size: int = 65,
    ba_tol: float = 1e-10,
    max_iter: int = 100_000,
    kkt_tol: float = 1e-4,
) -> GaussianSolution:
    """C(B, P) over inputs on a symmetric ``grid_size``-point grid of ``[-P, P]``."""
    if grid_size < 3:
        raise ValueError("grid_size must be at least 3")
    lmin, lmax = reduce_channels(gm)
    sig_i, sig_e = gm.sigmas[lmax], gm.sigmas[lmin]
    P, B = gm.peak, gm.constraint
    bmax = P ** 2 + sig_e ** 2
    if B > bmax + 1e-12:
        raise InfeasibleConstraintError(f"energy constraint B={B:.12g} exceeds P^2 + sigma_min^2 = {bmax:.12g}", b_max=bmax)
    need = B - sig_e ** 2
    x = np.linspace(-P, P, grid_size)
    x = 0.5 * (x - x[::-1])
    x2 = x ** 2
    kern = _Kernel(x, sig_i, P)

    if need >= P ** 2 - 1e-12:
        q = np.zeros(grid_size)
        q[0] = q[-1] = 0.5
        F0 = DiscreteInputCdf(x, q)
        kern.check_normalization(q)
        lam = _forced_multiplier(F0, gm, sig_i, F0.second_moment)
        value = gaussian_mutual_information(F0, sig_i)
        return GaussianSolution(value, F0, kkt_verify(F0, lam, gm, kkt_tol), lmax, lmin, 0)

    q0 = np.full(grid_size, 1.0 / grid_size)
    q, iters = _tilted_newton(kern, x2, 0.0, q0, ba_tol, max_iter)
    lam = 0.0
    if q @ x2 < need:
        lo, hi = 0.0, 1.0
        q_hi, n = _tilted_newton(kern, x2, hi, q, ba_tol, max_iter)
        iters += n
        while q_hi @ x2 < need:
            lo, hi = hi, 2 * hi
            q_hi, n = _tilted_newton(kern, x2, hi, q_hi, ba_tol, max_iter)
            iters += n
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            q_mid, n = _tilted_newton(kern, x2, mid, q_hi, ba_tol, max_iter)
            iters += n
            if q_mid @ x2 >= need:
                hi, q_hi = mid, q_mid
            else:
                lo = mid
            if hi - lo <= 1e-12 * max(1.0, hi):
                break
        q, lam = q_hi, hi
    kern.check_normalization(q)
    F0 = DiscreteInputCdf(x, q)
    value = gaussian_mutual_information(F0, sig_i)
    return GaussianSolution(value, F0, kkt_verify(F0, lam, gm, kkt_tol), lmax, lmin, iters)


def capacity_vs_constraint(sigmas: Sequence[float], peak: float, B_grid: Sequence[float], grid_size: int = 65):
    return [gaussian_capacity_energy(GaussianMulticast(tuple(sigmas), peak, float(B)), grid_size) for B in B_grid]
