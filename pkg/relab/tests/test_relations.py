"""
Tests for the relation calculus.
"""
import numpy as np
import pytest

from relab.ensembles import random_relation, random_subspace
from relab.exceptions import DimensionMismatch
from relab.relations import (
    Relation, adjoint, compose, compose_chain, contains, direct_product, domain, fingerprint,
    from_matrix, identity, inverse, is_operator, kernel, make_relation, multivalued_part,
    operator_part, operator_sum, parts, pure, range_of, relation_gap, restrict, same_relation,
)
from relab.subspaces import Subspace, complement, gap, span

E1 = [1, 0]
E2 = [0, 1]


# ============================================================================
# Construction and parts
# ============================================================================

class TestConstruction:
    """Tests for make_relation, from_matrix and pure."""

    def test_fx_a_graph(self, fx_a):
        """FX-A should have the one-dimensional graph span (e1, 0)."""
        assert fx_a.graph.dim == 1
        assert gap(fx_a.graph, span([[1, 0, 0, 0]])) < 1e-12

    def test_fx_c_shape(self, fx_c):
        """FX-C should map C^2 to C^1 with a two-dimensional graph."""
        T, _ = fx_c
        assert (T.dim_from, T.dim_to) == (2, 1)
        assert T.graph.dim == 2

    def test_pair_length_checked(self):
        """Generator pairs of the wrong length should be refused."""
        with pytest.raises(DimensionMismatch):
            make_relation(2, 2, [([1, 0, 0], [0, 0])])

    def test_from_matrix_is_operator(self):
        """A matrix should become an everywhere defined operator."""
        relation = from_matrix(np.array([[1, 2], [3, 4], [5, 6]]))
        assert (relation.dim_from, relation.dim_to) == (2, 3)
        assert is_operator(relation)
        assert domain(relation).dim == 2

    def test_pure_relation(self):
        """A pure relation should have zero domain and the given multivalued part."""
        relation = pure(2, span([E1]))
        assert domain(relation).dim == 0
        assert gap(multivalued_part(relation), span([E1])) < 1e-12


class TestParts:
    """Tests for domain, range, kernel and multivalued part."""

    def test_fx_a_parts(self, fx_a):
        """FX-A should have dom = ker = span e1 and trivial range and mul."""
        result = parts(fx_a)
        assert gap(result.dom, span([E1])) < 1e-12
        assert gap(result.ker, span([E1])) < 1e-12
        assert result.ran.dim == 0
        assert result.mul.dim == 0

    def test_fx_c_parts(self, fx_c):
        """FX-C should have a one-dimensional multivalued part."""
        T, _ = fx_c
        result = parts(T)
        assert gap(result.dom, span([E1])) < 1e-12
        assert gap(result.ker, span([E1])) < 1e-12
        assert result.ran.dim == 1
        assert result.mul.dim == 1
        assert not is_operator(T)

    def test_matrix_kernel(self):
        """Kernel and range of a rank-one matrix should be lines."""
        relation = from_matrix(np.array([[1, 1], [1, 1]]))
        assert gap(kernel(relation), span([[1, -1]])) < 1e-12
        assert gap(range_of(relation), span([[1, 1]])) < 1e-12


# ============================================================================
# Calculus
# ============================================================================

class TestAdjointInverse:
    """Tests for adjoint and inverse."""

    def test_adjoint_of_matrix(self, rng):
        """The adjoint of a matrix should be its conjugate transpose."""
        matrix = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
        assert relation_gap(adjoint(from_matrix(matrix)), from_matrix(matrix.conj().T)) < 1e-12

    def test_adjoint_of_fx_c(self, fx_c):
        """T* of FX-C should be purely multivalued."""
        T, _ = fx_c
        T_adj = adjoint(T)
        assert (T_adj.dim_from, T_adj.dim_to) == (1, 2)
        assert domain(T_adj).dim == 0
        assert gap(multivalued_part(T_adj), span([E2])) < 1e-12

    def test_adjoint_is_involutive(self, rng):
        """R** should equal R."""
        relation = random_relation(rng, 3, 4)
        assert relation_gap(adjoint(adjoint(relation)), relation) < 1e-10

    def test_adjoint_swaps_parts(self, rng):
        """mul R* = (dom R)^perp and ker R* = (ran R)^perp."""
        relation = random_relation(rng, 4, 3, 2)
        assert gap(multivalued_part(adjoint(relation)), complement(domain(relation))) < 1e-10
        assert gap(kernel(adjoint(relation)), complement(range_of(relation))) < 1e-10

    def test_inverse_of_fx_a(self, fx_a):
        """The inverse should swap the two components of the graph."""
        assert gap(inverse(fx_a).graph, span([[0, 0, 1, 0]])) < 1e-12

    def test_inverse_commutes_with_adjoint(self, rng):
        """(R*)^-1 should equal (R^-1)*."""
        relation = random_relation(rng, 3, 3)
        assert relation_gap(inverse(adjoint(relation)), adjoint(inverse(relation))) < 1e-10


class TestCompose:
    """Tests for compose and compose_chain."""

    def test_matrices_multiply(self, rng):
        """Composing matrices should multiply them."""
        a = rng.standard_normal((2, 3))
        b = rng.standard_normal((3, 4))
        assert relation_gap(compose(from_matrix(a), from_matrix(b)), from_matrix(a @ b)) < 1e-10

    def test_fx_c_chain(self, fx_c, span_e1_by_e2):
        """alpha is forced to 0 by dom T* = {0}, for any b."""
        T, _ = fx_c
        for b in (0.0, 0.5, -3.0):
            product = compose(adjoint(T), compose(from_matrix([[1 + 1j * b]]), T))
            assert relation_gap(product, span_e1_by_e2) < 1e-10

    def test_chain_order(self, rng):
        """compose_chain should apply the rightmost relation first."""
        a, b, c = (rng.standard_normal((2, 2)) for _ in range(3))
        chain = compose_chain(from_matrix(a), from_matrix(b), from_matrix(c))
        assert relation_gap(chain, from_matrix(a @ b @ c)) < 1e-10

    @pytest.mark.parametrize('seed', range(10))
    def test_associative_on_random_relations(self, seed):
        """(A B) C = A (B C) for random multivalued relations."""
        rng = np.random.default_rng(seed)
        a, b, c = random_relation(rng, 3, 2), random_relation(rng, 3, 3), random_relation(rng, 2, 3)
        assert relation_gap(compose(compose(a, b), c), compose(a, compose(b, c))) <= 1e-8

    def test_identity_is_neutral(self, rng):
        """The identity should be neutral on both sides."""
        relation = random_relation(rng, 3, 3)
        assert relation_gap(compose(identity(3), relation), relation) < 1e-10
        assert relation_gap(compose(relation, identity(3)), relation) < 1e-10

    def test_dimension_mismatch(self):
        """Composing incompatible relations should raise DimensionMismatch."""
        with pytest.raises(DimensionMismatch):
            compose(from_matrix(np.eye(2)), from_matrix(np.eye(3)))

    @pytest.mark.parametrize('seed', range(10))
    def test_adjoint_of_composition_contains_reversed(self, seed):
        """B* A* is contained in (AB)*."""
        rng = np.random.default_rng(seed)
        inner, outer = random_relation(rng, 3, 3), random_relation(rng, 3, 3)
        reversed_product = compose(adjoint(inner), adjoint(outer))
        assert contains(adjoint(compose(outer, inner)), reversed_product)


class TestSumAndParts:
    """Tests for operator_sum, direct_product, operator_part and restrict."""

    def test_fx_d_sum(self, fx_d):
        """The sum of FX-D should be diag(2 + i, 2)."""
        H1, H2 = fx_d
        assert relation_gap(operator_sum(H1, H2), from_matrix(np.diag([2 + 1j, 2]))) < 1e-10

    def test_sum_domain_is_meet(self):
        """The domain of a sum should be the meet of the domains."""
        first = restrict(from_matrix(np.eye(3)), span([[1, 0, 0], [0, 1, 0]]))
        second = restrict(from_matrix(np.eye(3)), span([[0, 1, 0], [0, 0, 1]]))
        total = operator_sum(first, second)
        assert gap(domain(total), span([[0, 1, 0]])) < 1e-12
        assert is_operator(total)
        assert relation_gap(total, restrict(from_matrix(2 * np.eye(3)), span([[0, 1, 0]]))) < 1e-10

    def test_sum_shape_check(self):
        """Summing relations between different spaces should fail."""
        with pytest.raises(DimensionMismatch):
            operator_sum(from_matrix(np.eye(2)), from_matrix(np.ones((3, 2))))

    def test_direct_product(self):
        """direct_product should be block diagonal."""
        product = direct_product(from_matrix([[2]]), from_matrix([[3]]))
        assert relation_gap(product, from_matrix(np.diag([2, 3]))) < 1e-12

    def test_operator_part_of_fx_c(self, fx_c):
        """The operator part of FX-C should be an operator on span e1."""
        T, _ = fx_c
        part = operator_part(T)
        assert is_operator(part)
        assert gap(domain(part), span([E1])) < 1e-12

    def test_restrict(self):
        """Restriction should cut the domain down."""
        relation = restrict(from_matrix(np.diag([1, 2])), span([E2]))
        assert gap(domain(relation), span([E2])) < 1e-12
        assert relation.graph.dim == 1

    def test_restrict_keeps_multivalued_part(self, fx_c):
        """Restriction should keep the multivalued part."""
        T, _ = fx_c
        restricted = restrict(T, Subspace.zero(2))
        assert domain(restricted).dim == 0
        assert multivalued_part(restricted).dim == 1


# ============================================================================
# Comparison
# ============================================================================

class TestComparison:
    """Tests for relation_gap, same_relation and fingerprint."""

    def test_gap_needs_same_spaces(self):
        """relation_gap should refuse relations between different spaces."""
        with pytest.raises(DimensionMismatch):
            relation_gap(from_matrix(np.eye(2)), from_matrix(np.eye(3)))

    def test_same_relation_ignores_basis(self, fx_a):
        """Rescaled generators should give the same relation."""
        other = make_relation(2, 2, [([3j, 0], [0, 0])])
        assert same_relation(fx_a, other)

    def test_fingerprint_is_basis_independent(self, rng):
        """The fingerprint should not depend on the chosen basis."""
        space = random_subspace(rng, 4, 2)
        rotated = Subspace.from_columns(space.basis @ np.array([[1, 1], [1, -1]]) / np.sqrt(2))
        assert fingerprint(Relation(2, 2, space)) == fingerprint(Relation(2, 2, rotated))

    def test_fingerprint_tells_relations_apart(self, fx_a, span_e1_by_e2):
        """Different relations should have different fingerprints."""
        assert fingerprint(fx_a) != fingerprint(span_e1_by_e2)
