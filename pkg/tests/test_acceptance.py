"""
Acceptance suites over seeded ensembles.

Each class covers one acceptance criterion. The large ensembles carry the
`slow` marker; run them with `pytest -m slow` or skip them with
`pytest -m "not slow"`.
"""
import numpy as np
import pytest

from relab.ensembles import random_left_factorization, random_maximal_sectorial
from relab.exceptions import NotFactorizable
from relab.factorized import abstract_model, factorize_product, lemma_alpha, recover_factorization
from relab.instances import gen_random, serialize_instance
from relab.oracles import (
    extension_family_general, extremal_oracle, friedrichs_oracle, krein_oracle, sectorial_enlargement,
)
from relab.relations import (
    adjoint, domain, from_matrix, kernel, make_relation, multivalued_part, range_of, relation_gap,
)
from relab.runner import run
from relab.sectorial import sectoriality
from relab.subspaces import Subspace, gap, span
from relab.verification import check_factorized, check_maximal, check_pair

IDENTITY_LIMIT = 1e-8
DIMENSIONS = (2, 3, 4)


def _dimension(seed: int) -> int:
    return DIMENSIONS[seed % len(DIMENSIONS)]


def _left_instance(seed: int):
    rng = np.random.default_rng(seed)
    return random_left_factorization(rng, _dimension(seed))


def _maximal_instance(seed: int):
    rng = np.random.default_rng(1000 + seed)
    return random_maximal_sectorial(rng, _dimension(seed))


# ============================================================================
# Factorized products
# ============================================================================

@pytest.mark.slow
class TestProductIdentities:
    """mul/ker identities and the alpha witness on 200 factorized-left instances."""

    @pytest.mark.parametrize('seed', range(200))
    def test_instance(self, seed):
        """mul S = mul T*, ker S = ker T and a unique alpha for every phi' in ran S."""
        T, B = _left_instance(seed)
        F = factorize_product(T, B)
        assert gap(multivalued_part(F.S), multivalued_part(adjoint(T))) <= IDENTITY_LIMIT
        assert gap(kernel(F.S), kernel(T)) <= IDENTITY_LIMIT
        for phi_prime in range_of(F.S).basis.T:
            witness = lemma_alpha(F, phi_prime)
            assert witness.nullity == 0
            assert witness.residual <= IDENTITY_LIMIT


@pytest.mark.slow
class TestProductSector:
    """tan_min <= ||B||, maximality and the adjoint product on 200 instances."""

    @pytest.mark.parametrize('seed', range(200))
    def test_instance(self, seed):
        """The product should be maximal with tan_min <= ||B|| and adjoint T*(I - iB)T."""
        T, B = _left_instance(seed)
        F = factorize_product(T, B)
        report = sectoriality(F.S)
        assert report.tan_min <= np.linalg.norm(B, 2) + IDENTITY_LIMIT
        assert report.is_maximal
        assert relation_gap(adjoint(F.S), factorize_product(T, -B).S) <= IDENTITY_LIMIT


@pytest.mark.slow
class TestExtensionsCollapse:
    """Friedrichs and Krein extensions of a factorized product are the product itself."""

    @pytest.mark.parametrize('seed', range(50))
    def test_instance(self, seed):
        """S_F, S_K and both oracles should equal S."""
        result = check_factorized(*_left_instance(seed))
        assert result.passed, result.failures
        for name in ('S_F = S', 'S_K = S', 'S_F = S_K', 'friedrichs oracle = S', 'krein oracle = S'):
            assert result.value(name) <= IDENTITY_LIMIT


# ============================================================================
# FX-A: Friedrichs differs from Krein
# ============================================================================

class TestStrictLattice:
    """Zero operator on span e1 inside C^2."""

    def test_friedrichs(self, fx_a, span_e1_by_e2):
        """S_F should be span e1 x span e2."""
        assert relation_gap(friedrichs_oracle(fx_a), span_e1_by_e2) <= 1e-10

    def test_krein(self, fx_a, zero_operator):
        """S_K should be the zero operator."""
        assert relation_gap(krein_oracle(fx_a), zero_operator) <= 1e-10

    def test_extensions_differ(self, fx_a):
        """S_F and S_K should be at gap 1."""
        assert relation_gap(friedrichs_oracle(fx_a), krein_oracle(fx_a)) == pytest.approx(1.0)


# ============================================================================
# Maximal sectorial relations
# ============================================================================

@pytest.mark.slow
class TestMaximalDecomposition:
    """Real-part decomposition round trip on 100 maximal sectorial relations."""

    @pytest.mark.parametrize('seed', range(100))
    def test_instance(self, seed):
        """Recomposition, B on ker + mul, ||B|| = tan_min and the operator part should hold."""
        result = check_maximal(_maximal_instance(seed))
        assert result.passed, result.failures
        assert result.value('recomposition') <= IDENTITY_LIMIT
        assert result.value('B zero on ker + mul') <= 1e-10
        assert result.value('||B|| = tan_min') <= IDENTITY_LIMIT
        assert result.value('operator part identity') <= IDENTITY_LIMIT


class TestRecovery:
    """Recovered factorizations reproduce the relation."""

    @pytest.mark.parametrize('seed', range(20))
    @pytest.mark.parametrize('mode', ['friedrichs', 'krein'])
    def test_round_trip(self, seed, mode):
        """Both modes should reproduce the relation."""
        relation = _maximal_instance(seed)
        assert relation_gap(recover_factorization(relation, mode).S, relation) <= IDENTITY_LIMIT

    def test_fx_a_names_the_violated_equality(self, fx_a):
        """FX-A should fail on mul S = mul S*."""
        with pytest.raises(NotFactorizable) as excinfo:
            recover_factorization(fx_a, 'friedrichs')
        assert excinfo.value.condition == 'mul S = mul S*'


class TestMaximalityByEnlargement:
    """No sectorial relation of graph dimension n admits a sectorial 1-dimensional enlargement."""

    @pytest.mark.parametrize('seed', range(50))
    def test_instance(self, seed):
        """Random maximal relations should admit no sectorial enlargement."""
        relation = _maximal_instance(seed)
        assert sectoriality(relation).is_maximal
        rng = np.random.default_rng(5000 + seed)
        assert sectorial_enlargement(relation, rng) is None

    def test_non_maximal_enlarges(self, fx_a, rng):
        """FX-A should admit a sectorial enlargement."""
        assert sectorial_enlargement(fx_a, rng) is not None


# ============================================================================
# Sums of maximal sectorial relations
# ============================================================================

@pytest.mark.slow
class TestMaximalPairs:
    """Assembly inclusions, sum extensions and extremality on 100 pairs."""

    @pytest.mark.parametrize('seed', range(100))
    def test_instance(self, seed):
        """The pair suite should pass with every sum extension equal to H1 + H2."""
        rng = np.random.default_rng(2000 + seed)
        n = _dimension(seed)
        result = check_pair(random_maximal_sectorial(rng, n), random_maximal_sectorial(rng, n))
        assert result.passed, result.failures
        for name in ('friedrichs_sum = H1 + H2', 'krein_sum = H1 + H2', 'formsum_extension = H1 + H2'):
            assert result.value(name) <= IDENTITY_LIMIT

    def test_fx_d(self, fx_d):
        """The pair suite should pass on FX-D."""
        result = check_pair(*fx_d)
        assert result.passed, result.failures


# ============================================================================
# Extremal family in C^3
# ============================================================================

class TestExtremalFamilySweep:
    """Zero operator on span e1 inside C^3, swept over admissible domains."""

    @pytest.fixture
    def relation(self):
        return make_relation(3, 3, [([1, 0, 0], [0, 0, 0])])

    @pytest.fixture
    def subspaces(self):
        return [
            span([[1, 0, 0]]),
            span([[1, 0, 0], [0, 1, 0]]),
            span([[1, 0, 0], [0, 0, 1]]),
            span([[1, 0, 0], [0, 1, 1]]),
            span([[1, 0, 0], [0, 1, 1j]]),
            Subspace.full(3),
        ]

    def test_pairwise_distinct_and_extremal(self, relation, subspaces):
        """Six admissible domains should give six distinct extremal extensions."""
        extensions = [extension_family_general(relation, subspace) for subspace in subspaces]
        for extension, subspace in zip(extensions, subspaces):
            verdict = extremal_oracle(extension, relation)
            assert verdict.extremal
            assert verdict.witness_gap <= 1e-9
            assert gap(domain(extension), subspace) <= 1e-10
        for i, first in enumerate(extensions):
            for second in extensions[i + 1:]:
                assert relation_gap(first, second) > 1e-3

    def test_endpoints(self, relation):
        """L = dom S should give S_F and L = C^3 should give S_K = 0."""
        assert relation_gap(extension_family_general(relation, span([[1, 0, 0]])),
                            friedrichs_oracle(relation)) <= 1e-10
        assert relation_gap(extension_family_general(relation, Subspace.full(3)),
                            krein_oracle(relation)) <= 1e-10
        assert relation_gap(krein_oracle(relation), from_matrix(np.zeros((3, 3)))) <= 1e-10


# ============================================================================
# Model on ran S
# ============================================================================

class TestAbstractModel:
    """Isometry and compression residuals of the model on ran S."""

    @pytest.mark.slow
    @pytest.mark.parametrize('seed', range(100))
    def test_instance(self, seed):
        """The model should be isometric with small compression residual."""
        model = abstract_model(factorize_product(*_left_instance(seed)))
        assert model.isometry_residual <= 1e-10
        assert model.compression_residual <= 1e-9

    def test_fx_c_empty_quotient(self, fx_c):
        """FX-C should have an empty quotient."""
        model = abstract_model(factorize_product(*fx_c))
        assert model.quotient.dim == 0
        assert model.isometry_residual <= 1e-10


# ============================================================================
# Determinism
# ============================================================================

class TestDeterminism:
    """Generated files and reports are reproducible."""

    @pytest.mark.parametrize('profile', ['factorized-left', 'maximal-pair', 'general-sectorial'])
    def test_gen_random(self, profile):
        """gen_random should be reproducible."""
        assert serialize_instance(gen_random(7, 3, profile)) == serialize_instance(gen_random(7, 3, profile))

    @pytest.mark.parametrize('name', ['fx_a', 'fx_b', 'fx_c', 'fx_d'])
    def test_report_stability(self, fixtures_dir, name):
        """Reports of the bundled instances should be reproducible."""
        assert run(fixtures_dir / f'{name}.json').to_json() == run(fixtures_dir / f'{name}.json').to_json()
