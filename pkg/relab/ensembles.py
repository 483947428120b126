"""
Seeded random constructions for the property ensembles.

Every function takes a numpy Generator; the same seed always gives the same
object.
"""
import numpy as np
import scipy.linalg as la

from .relations import Relation, restrict
from .sectorial import SesquiForm, relation_of_form
from .subspaces import Subspace

SINGULAR_REAL_PART_RATE = 0.3  # share of forms generated with a degenerate real part


def random_complex(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_subspace(rng: np.random.Generator, n: int, d: int) -> Subspace:
    if d == 0:
        return Subspace.zero(n)
    return Subspace.from_columns(random_complex(rng, n, d))


def random_subspace_of(rng: np.random.Generator, space: Subspace, d: int) -> Subspace:
    """Random d-dimensional subspace of `space`."""
    if d == 0:
        return Subspace.zero(space.ambient_dim)
    return Subspace.from_columns(space.basis @ random_complex(rng, space.dim, d))


def random_hermitian(rng: np.random.Generator, n: int, norm_bound: float = 2.0) -> np.ndarray:
    """Random Hermitian matrix with spectral norm in [norm_bound / 4, norm_bound]."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    g = random_complex(rng, n, n)
    h = (g + g.conj().T) / 2
    return h * (norm_bound * rng.uniform(0.25, 1.0) / la.norm(h, 2))


def random_relation(rng: np.random.Generator, n: int, m: int, d: int = None) -> Relation:
    """Relation C^n -> C^m with a random graph of dimension d (default: 1 .. n + m - 1)."""
    if d is None:
        d = int(rng.integers(1, n + m))
    return Relation(n, m, random_subspace(rng, n + m, d))


def random_sectorial_form(rng: np.random.Generator, domain: Subspace, tan_bound: float = 2.0,
                          real: bool = False) -> SesquiForm:
    """
    W^H (I + iK) W on `domain`, K Hermitian with ||K|| <= tan_bound.

    With probability SINGULAR_REAL_PART_RATE one row of W is zeroed, so the
    real part gets a kernel inside the domain.
    """
    d = domain.dim
    w = random_complex(rng, d, d)
    if d > 1 and rng.random() < SINGULAR_REAL_PART_RATE:
        w[int(rng.integers(d))] = 0
    k = np.zeros((d, d)) if real else random_hermitian(rng, d, tan_bound)
    return SesquiForm(domain, w.conj().T @ (np.eye(d) + 1j * k) @ w)


def random_maximal_sectorial(rng: np.random.Generator, n: int, dom_dim: int = None,
                             tan_bound: float = 2.0, real: bool = False) -> Relation:
    """Relation of a random sectorial form on a random domain (default dimension 1 .. n)."""
    if dom_dim is None:
        dom_dim = int(rng.integers(1, n + 1))
    form = random_sectorial_form(rng, random_subspace(rng, n, dom_dim), tan_bound, real)
    return relation_of_form(form)


def random_general_sectorial(rng: np.random.Generator, n: int, real: bool = False) -> Relation:
    """
    A non-maximal sectorial relation: a maximal one restricted to a proper
    subspace of its domain. Needs n >= 2.
    """
    dom_dim = int(rng.integers(2, n + 1))
    maximal = random_maximal_sectorial(rng, n, dom_dim, real=real)
    dom = Subspace.from_columns(maximal.first)
    return restrict(maximal, random_subspace_of(rng, dom, int(rng.integers(1, dom.dim))))


def random_nonnegative_symmetric(rng: np.random.Generator, n: int) -> Relation:
    return random_general_sectorial(rng, n, real=True)


def random_left_factorization(rng: np.random.Generator, n: int, m: int = None) -> tuple:
    """(T, B) with T: C^n -> C^m a random relation and ||B|| <= 2."""
    m = n if m is None else m
    return random_relation(rng, n, m), random_hermitian(rng, m)
