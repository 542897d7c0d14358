import numpy as np
import pytest

from siet.channels import Dmc, MulticastProblem, hamming_energy, make_bsc, make_z
from siet.oracle import (
    GridSpec,
    concavity_probe,
    domain_convexity_probe,
    grid_capacity_energy,
    grid_information,
    product_capacity_n2,
    product_problem,
    simplex_grid,
)
from siet.pointtopoint import capacity_curve, capacity_energy
from math import comb

from conftest import bsc_capacity


def test_gridspec_guards():
    with pytest.raises(ValueError):
        GridSpec(0.0, 2)
    with pytest.raises(ValueError):
        GridSpec(0.3, 2)
    with pytest.raises(ValueError):
        GridSpec(0.1, 5)
    with pytest.raises(ValueError):
        GridSpec(1e-4, 4)
    assert GridSpec(1e-5, 2).count == 100001


@pytest.mark.parametrize("n, N", [(1, 5), (2, 7), (3, 9), (4, 6)])
def test_simplex_grid_complete(n, N):
    pts = np.concatenate(list(simplex_grid(n, N)))
    assert pts.shape == (comb(N + n - 1, n - 1), n)
    assert np.all(pts.sum(axis=1) == N) and pts.min() >= 0
    assert len({tuple(p) for p in pts}) == pts.shape[0]


def test_grid_information_matches_known_values():
    W = make_bsc(0.12).rows
    Q = np.array([[0.5, 0.5], [1.0, 0.0]])
    np.testing.assert_allclose(grid_information(Q, W), [bsc_capacity(0.12), 0.0], atol=1e-14)


def test_bsc_fine_scan():
    r = grid_capacity_energy(MulticastProblem.common([make_bsc(0.12)], 0.0), GridSpec(1e-5, 2))
    assert r.value == pytest.approx(0.4706, abs=1e-4)
    assert r.slack >= 0


def test_identity_channel_uniform():
    r = grid_capacity_energy(MulticastProblem.common([Dmc(np.eye(3))], 0.0, hamming_energy(3)), GridSpec(0.01, 3))
    assert r.value == pytest.approx(np.log2(3), abs=1e-3)


def test_dimension_mismatch_and_empty():
    prob = MulticastProblem.common([make_bsc(0.1)], 0.0)
    with pytest.raises(ValueError):
        grid_capacity_energy(prob, GridSpec(0.1, 3))
    with pytest.raises(ValueError):
        grid_capacity_energy(prob.with_constraints([0.95]), GridSpec(0.1, 2))


def test_product_problem_structure():
    prod = product_problem(MulticastProblem.common([make_z(0.3)], 0.0), 0.4)
    assert prod.channels[0].rows.shape == (4, 4)
    np.testing.assert_allclose(prod.energies[0].values, [0, 1, 1, 2])
    np.testing.assert_allclose(prod.constraints, [0.8])


def test_noiseless_product_two_bits():
    r = product_capacity_n2(MulticastProblem.common([Dmc(np.eye(2))], 0.0), 0.0, step=0.05)
    assert r.value == pytest.approx(2.0, abs=1e-12)


def test_iid_product_of_optimizer_is_feasible():
    B = 0.7
    pt = capacity_energy(make_bsc(0.12), hamming_energy(), B)
    q2 = np.kron(pt.optimizer.probs, pt.optimizer.probs)
    prod = product_problem(MulticastProblem.common([make_bsc(0.12)], 0.0), B)
    assert prod.energy_rows[0] @ q2 >= 2 * B - 1e-9
    assert grid_information(q2[None], prod.channels[0].rows)[0] == pytest.approx(2 * pt.value, abs=1e-9)


def test_product_needs_binary_input():
    with pytest.raises(ValueError):
        product_capacity_n2(MulticastProblem.common([Dmc(np.eye(3))], 0.0, hamming_energy(3)), 0.0)


def test_concavity_probe():
    B = np.linspace(0, 1, 6)
    assert concavity_probe(B, 2 - 3 * B) == pytest.approx(0.0, abs=1e-15)
    assert concavity_probe(B, -B**2) == 0.0
    C = -B**2
    C[3] -= 0.1
    assert concavity_probe(B, C) == pytest.approx(0.06)
    with pytest.raises(ValueError):
        concavity_probe(B[:2], C[:2])
    curve = capacity_curve(make_z(0.3), hamming_energy(), np.linspace(0, 0.7, 8))
    assert concavity_probe(curve) <= 1e-6


def test_domain_convexity():
    prob = MulticastProblem.common([make_bsc(0.1), make_z(0.3)], 0.0)
    assert domain_convexity_probe(prob, 100, rng=1)
    assert domain_convexity_probe(MulticastProblem.common([make_z(0.3)], 0.0), 20, rng=2)
