import numpy as np
import pytest
from hypothesis import given, strategies as st

from siet.channels import (
    Dmc,
    EnergyFunctional,
    InputDistribution,
    MulticastProblem,
    energy_per_input,
    hamming_energy,
    information_gradient,
    make_bsc,
    make_z,
    mutual_information,
    output_distribution,
    received_energy,
)

from conftest import bsc_capacity, h2


def test_dmc_rejects_bad_rows():
    with pytest.raises(ValueError, match="row 1"):
        Dmc([[0.5, 0.5], [0.6, 0.3]])
    with pytest.raises(ValueError):
        Dmc([[1.2, -0.2], [0.5, 0.5]])
    with pytest.raises(ValueError):
        Dmc(np.ones(3) / 3)


def test_dmc_is_read_only_and_hashable():
    ch = make_bsc(0.1)
    with pytest.raises(ValueError):
        ch.rows[0, 0] = 0.3
    assert ch == Dmc([[0.9, 0.1], [0.1, 0.9]])
    assert len({ch, make_bsc(0.1), make_bsc(0.2)}) == 2


def test_z_channel_layout():
    ch = make_z(0.3)
    np.testing.assert_allclose(ch.rows, [[1, 0], [0.3, 0.7]])
    with pytest.raises(ValueError):
        make_z(1.5)


def test_input_distribution_validation():
    q = InputDistribution([0.25, 0.75])
    assert len(q) == 2
    with pytest.raises(ValueError):
        InputDistribution([0.5, 0.6])
    with pytest.raises(ValueError):
        InputDistribution([-0.1, 1.1])
    np.testing.assert_allclose(InputDistribution.uniform(4).probs, 0.25)


def test_hamming_energy_counts_bits():
    np.testing.assert_array_equal(hamming_energy(4).values, [0, 1, 1, 2])
    with pytest.raises(ValueError):
        EnergyFunctional([1.0, -1.0])


def test_mutual_information_bsc_uniform():
    assert mutual_information([0.5, 0.5], make_bsc(0.12)) == pytest.approx(bsc_capacity(0.12), abs=1e-14)


def test_mutual_information_edge_cases():
    assert mutual_information([1.0, 0.0], make_bsc(0.2)) == 0.0
    assert mutual_information([0.5, 0.5], make_bsc(0.5)) == pytest.approx(0.0, abs=1e-15)
    assert mutual_information(np.full(4, 0.25), Dmc(np.eye(4))) == pytest.approx(2.0)


def test_received_energy_is_output_weight():
    ch = make_bsc(0.12)
    q = [0.3, 0.7]
    assert received_energy(q, ch, hamming_energy()) == pytest.approx(output_distribution(q, ch)[1])
    np.testing.assert_allclose(energy_per_input(ch, hamming_energy()), [0.12, 0.88])
    with pytest.raises(ValueError):
        received_energy(q, ch, hamming_energy(4))


@given(st.floats(0.01, 0.99), st.floats(0.0, 0.5))
def test_bsc_information_closed_form(p, eps):
    ch = make_bsc(eps)
    py1 = p * (1 - eps) + (1 - p) * eps
    assert mutual_information([1 - p, p], ch) == pytest.approx(float(h2(py1) - h2(eps)), abs=1e-12)


@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_gradient_matches_finite_difference(n, m, seed):
    rng = np.random.default_rng(seed)
    ch = Dmc(rng.dirichlet(np.ones(m), size=n))
    q = rng.dirichlet(np.ones(n)) * 0.9 + 0.1 / n
    g = information_gradient(q, ch)
    d = rng.normal(size=n)
    d -= d.mean()
    h = 1e-6
    fd = (mutual_information(q + h * d, ch) - mutual_information(q - h * d, ch)) / (2 * h)
    assert g @ d == pytest.approx(fd, abs=1e-6)


def test_problem_validation_and_views():
    chans = (make_bsc(0.1), make_z(0.3))
    prob = MulticastProblem.common(chans, 0.2)
    assert prob.size == 2 and prob.input_size == 2
    np.testing.assert_allclose(prob.energy_rows, [[0.1, 0.9], [0.0, 0.7]])
    sub = prob.subproblem([1])
    assert sub.channels == (chans[1],)
    np.testing.assert_allclose(prob.with_constraints([0.1, 0.3]).constraints, [0.1, 0.3])
    with pytest.raises(ValueError):
        MulticastProblem(chans, (hamming_energy(),), [0.1, 0.1])
    with pytest.raises(ValueError):
        MulticastProblem.common((make_bsc(0.1), Dmc(np.eye(3))), 0.0)
    with pytest.raises(ValueError):
        MulticastProblem.common(chans, -0.1)
