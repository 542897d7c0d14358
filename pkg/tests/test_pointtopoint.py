import numpy as np
import pytest
from hypothesis import given, strategies as st

from siet.channels import Dmc, hamming_energy, make_bsc, make_z, mutual_information
from siet.multicast import InfeasibleConstraintError
from siet.oracle import GridSpec, concavity_probe, grid_capacity_energy
from siet.channels import MulticastProblem
from siet.pointtopoint import CapacityCurve, b_max_single, capacity_curve, capacity_energy

from conftest import bsc_capacity, bsc_capacity_energy, z_capacity

HAM = hamming_energy()


@pytest.mark.parametrize(
    "ch, expected",
    [(make_bsc(0.12), bsc_capacity(0.12)), (make_z(0.3), z_capacity(0.3)), (make_bsc(0.3), bsc_capacity(0.3)),
     (make_z(0.6), z_capacity(0.6)), (make_z(0.65), z_capacity(0.65))],
)
def test_unconstrained_matches_closed_form(ch, expected):
    pt = capacity_energy(ch, HAM, 0.0)
    assert pt.value == pytest.approx(expected, abs=1e-9)
    assert pt.converged


@pytest.mark.parametrize("B", [0.5, 0.6, 0.7, 0.8, 0.85, 0.88])
def test_bsc_active_constraint_closed_form(B):
    pt = capacity_energy(make_bsc(0.12), HAM, B)
    assert pt.value == pytest.approx(bsc_capacity_energy(0.12, B), abs=1e-8)


def test_bsc_at_b_max_is_point_mass():
    pt = capacity_energy(make_bsc(0.12), HAM, 0.88)
    assert pt.value == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(pt.optimizer.probs, [0.0, 1.0], atol=1e-12)


def test_b_max_and_infeasible():
    assert b_max_single(make_z(0.3), HAM) == pytest.approx(0.7)
    with pytest.raises(InfeasibleConstraintError) as info:
        capacity_energy(make_z(0.3), HAM, 0.71)
    assert info.value.b_max == pytest.approx(0.7)


def test_noiseless_channel():
    pt = capacity_energy(Dmc(np.eye(2)), HAM, 0.0)
    assert pt.value == pytest.approx(1.0)


def test_curve_is_nonincreasing_and_concave():
    grid = np.linspace(0, 0.88, 23)
    curve = capacity_curve(make_bsc(0.12), HAM, grid, threads=2)
    assert len(curve) == 23
    assert np.all(np.diff(curve.values) <= 1e-12)
    assert concavity_probe(curve) <= 1e-6


def test_curve_rejects_unsorted_points():
    p = capacity_energy(make_bsc(0.1), HAM, 0.0)
    with pytest.raises(ValueError):
        CapacityCurve((p, p))


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_solver_at_least_grid_and_optimizer_feasible(seed, frac):
    rng = np.random.default_rng(seed)
    ch = Dmc(rng.dirichlet(np.ones(2), size=2))
    B = frac * b_max_single(ch, HAM)
    pt = capacity_energy(ch, HAM, B)
    q = pt.optimizer.probs
    assert q @ ch.rows[:, 1] >= B - 1e-9
    assert pt.value == pytest.approx(mutual_information(q, ch), abs=1e-12)
    g = grid_capacity_energy(MulticastProblem.common([ch], B), GridSpec(1e-3, 2))
    assert pt.value >= g.value - 1e-9
    assert pt.value <= g.value + 2e-3
