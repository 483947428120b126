"""
Pytest configuration and fixtures for the relations lab tests.
"""
import numpy as np
import pytest
from django.conf import settings

from relab.relations import Relation, from_matrix, make_relation
from relab.subspaces import Tolerance, get_tolerance

E1 = np.array([1, 0], dtype=complex)
E2 = np.array([0, 1], dtype=complex)
ZERO2 = np.zeros(2, dtype=complex)


@pytest.fixture
def tol() -> Tolerance:
    """Default tolerances (gap 1e-9, rank 1e-10)."""
    return get_tolerance()


@pytest.fixture
def rng():
    """Seeded generator; tests needing several streams build their own."""
    return np.random.default_rng(20240611)


@pytest.fixture
def fixtures_dir():
    return settings.RELAB_FIXTURES_DIR


@pytest.fixture
def fx_a() -> Relation:
    """Zero operator on span e1 inside C^2."""
    return make_relation(2, 2, [(E1, ZERO2)])


@pytest.fixture
def fx_b() -> Relation:
    """(1 + i) I on C^2, semi-angle pi / 4."""
    return from_matrix((1 + 1j) * np.eye(2))


@pytest.fixture
def fx_c() -> tuple:
    """Singular T: C^2 -> C^1 with dom T = ker T = span e1, mul T = C, and B = [0.5]."""
    T = make_relation(2, 1, [(E1, [0]), (ZERO2, [1])])
    return T, np.array([[0.5]], dtype=complex)


@pytest.fixture
def fx_d() -> tuple:
    """H1 = diag(1, 2), H2 = diag(1 + i, 0)."""
    return from_matrix(np.diag([1, 2])), from_matrix(np.diag([1 + 1j, 0]))


@pytest.fixture
def span_e1_by_e2() -> Relation:
    """span e1 x span e2: S_F of FX-A and the product of FX-C."""
    return make_relation(2, 2, [(E1, ZERO2), (ZERO2, E2)])


@pytest.fixture
def zero_operator() -> Relation:
    return from_matrix(np.zeros((2, 2)))
