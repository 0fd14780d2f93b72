"""Shared fixtures.  The expensive enumeration runs are session-scoped."""

import pathlib

import pytest

from symmpc.condense import condense
from symmpc.enumeration import brute_force, run_dp
from symmpc.lp import LpCounts
from symmpc.ocp import load_problem, validate
from symmpc.symmetry import SymmetryPair, close_group

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "src" / "symmpc" / "fixtures"

EXAMPLE2 = FIXTURES / "example2.json"
DOUBLE_INTEGRATOR = FIXTURES / "double_integrator.json"
PERMUTATION_FIXTURE = FIXTURES / "example1_permutations.json"


@pytest.fixture(scope="session")
def example2_path():
    return EXAMPLE2


@pytest.fixture(scope="session")
def di_path():
    return DOUBLE_INTEGRATOR


@pytest.fixture(scope="session")
def example2_raw():
    return load_problem(EXAMPLE2)


@pytest.fixture(scope="session")
def example2(example2_raw):
    spec, _ = example2_raw
    return validate(spec)


@pytest.fixture(scope="session")
def example2_group(example2_raw, example2):
    _, raw_pairs = example2_raw
    pairs = [SymmetryPair(theta, omega) for theta, omega in raw_pairs]
    return close_group(pairs, example2)


@pytest.fixture(scope="session")
def example2_qp1(example2):
    return condense(example2, 1)


@pytest.fixture(scope="session")
def di():
    spec, _ = load_problem(DOUBLE_INTEGRATOR)
    return validate(spec)


@pytest.fixture(scope="session")
def brute1(example2_qp1):
    """Exhaustive horizon-1 sweep of Example 2, 4096 LP pairs."""
    return brute_force(example2_qp1, LpCounts())


@pytest.fixture(scope="session")
def dp5_baseline(example2):
    return run_dp(example2, group=None, n_max=5)


@pytest.fixture(scope="session")
def dp5_symmetric(example2, example2_group):
    return run_dp(example2, group=example2_group, n_max=5)


@pytest.fixture(scope="session")
def dp1_symmetric(example2, example2_group):
    return run_dp(example2, group=example2_group, n_max=1)


@pytest.fixture(scope="session")
def di_dp(di):
    """Baseline run of the double integrator until early convergence."""
    return run_dp(di, group=None, n_max=8)
