import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from sympat.dynamics import fitzhugh_nagumo, harmonic, integrator_chain_matrices, pitchfork, zero
from sympat.symmetry import (TOL_EQUIV, TOL_ORTHO, SymmetryElement, SymmetryError, check_commuting,
                             check_equivariance, check_orthogonal, commutant_basis, equivariance_residual,
                             identity, make_rotation_2d, negation, orthogonal_commutant_members,
                             parse_symmetry, random_orthogonal)

SQ3 = np.sqrt(3.0)
HARMONIC_A = np.array([[0.0, -1.0], [1.0, 0.0]])


def exact_commutant_dimension(A) -> int:
    """Independent oracle: solve A X = X A entrywise over the rationals."""
    A = sympy.Matrix(A).applyfunc(sympy.nsimplify)
    n = A.shape[0]
    xs = sympy.symbols(f"x0:{n * n}")
    X = sympy.Matrix(n, n, xs)
    eqs = list(A * X - X * A)
    M, _ = sympy.linear_eq_to_matrix(eqs, xs)
    return n * n - M.rank()


# frozen from exact_commutant_dimension before the implementation was exercised
COMMUTANT_DIMS = {"chain2": 2, "chain3": 3, "chain4": 4, "chain5": 5, "eye2": 4, "harmonic": 2}


def test_commutant_oracle_is_frozen():
    for n in (2, 3, 4, 5):
        assert exact_commutant_dimension(integrator_chain_matrices(n)[0]) == COMMUTANT_DIMS[f"chain{n}"]
    assert exact_commutant_dimension(np.eye(2)) == COMMUTANT_DIMS["eye2"]
    assert exact_commutant_dimension(HARMONIC_A) == COMMUTANT_DIMS["harmonic"]


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_chain_commutant_dimension(n):
    A = integrator_chain_matrices(n)[0]
    basis = commutant_basis(A)
    assert len(basis) == COMMUTANT_DIMS[f"chain{n}"]
    for X in basis:
        np.testing.assert_allclose(A @ X - X @ A, 0.0, atol=1e-12)
    # spanned by powers of A: each basis element is a polynomial in A
    powers = np.stack([np.linalg.matrix_power(A, k).ravel() for k in range(n)], axis=1)
    for X in basis:
        coef, *_ = np.linalg.lstsq(powers, X.ravel(), rcond=None)
        np.testing.assert_allclose(powers @ coef, X.ravel(), atol=1e-12)


def test_commutant_small_cases():
    assert len(commutant_basis(np.eye(2))) == COMMUTANT_DIMS["eye2"]
    assert len(commutant_basis(HARMONIC_A)) == COMMUTANT_DIMS["harmonic"]
    assert len(commutant_basis(np.zeros((3, 3)))) == 9
    G = np.stack([b.ravel() for b in commutant_basis(integrator_chain_matrices(4)[0])])
    np.testing.assert_allclose(G @ G.T, np.eye(4), atol=1e-12)


@pytest.mark.parametrize("deg, expected", [
    (0, [[1, 0], [0, 1]]),
    (120, [[-0.5, -SQ3 / 2], [SQ3 / 2, -0.5]]),
    (180, [[-1, 0], [0, -1]]),
])
def test_rotation_values(deg, expected):
    np.testing.assert_allclose(make_rotation_2d(np.radians(deg)).matrix, expected, atol=1e-15)


def test_check_orthogonal_examples():
    assert check_orthogonal(-np.eye(2))
    assert not check_orthogonal([[1, 1], [0, 1]])
    assert check_orthogonal(make_rotation_2d(2 * np.pi / 3).matrix)
    with pytest.raises(SymmetryError, match="square"):
        check_orthogonal(np.ones((2, 3)))


def test_element_rejects_non_orthogonal():
    with pytest.raises(SymmetryError, match="not orthogonal"):
        SymmetryElement(np.array([[1.0, 1.0], [0.0, 1.0]]), "shear")
    g = negation(2)
    with pytest.raises(ValueError):
        g.matrix[0, 0] = 5.0


def test_fn_odd_passes():
    rep = check_equivariance(fitzhugh_nagumo(), negation(2))
    assert rep.passed and rep.max_residual <= 1e-12
    assert rep.samples_tested == 200


@pytest.mark.parametrize("a, I", [(0.7, 0.0), (0.0, 0.5), (0.7, 0.5)])
def test_fn_asymmetric_residual(a, I):
    c = 3.0
    # f(-x) + f(x) evaluated symbolically is the constant (2 c I, 2 a / c)
    expected = max(2 * c * abs(I), 2 * abs(a) / c)
    rep = check_equivariance(fitzhugh_nagumo(a=a, I_const=I), negation(2))
    assert not rep.passed
    assert rep.max_residual == pytest.approx(expected, rel=1e-12)
    t, x = rep.worst_point
    assert 0 <= t <= 10 and len(x) == 2


def test_pitchfork_odd_passes():
    assert check_equivariance(zero(1, pitchfork()), negation(1)).passed


def test_equivariance_dimension_mismatch():
    with pytest.raises(SymmetryError, match="R\\^3"):
        check_equivariance(fitzhugh_nagumo(), identity(3))


def test_report_invariant_passed_iff_below_tol():
    for d, g in [(fitzhugh_nagumo(a=0.7), negation(2)), (harmonic(), make_rotation_2d(1.0))]:
        rep = check_equivariance(d, g)
        assert rep.passed == (rep.max_residual <= TOL_EQUIV)


@pytest.mark.parametrize("d", [fitzhugh_nagumo(a=0.7, I_const=0.5), harmonic(2.0), zero(1, pitchfork())])
def test_identity_residual_exactly_zero(d):
    rep = check_equivariance(d, identity(d.state_dim))
    assert rep.passed and rep.max_residual == 0.0


def test_equivariance_closed_under_inverse():
    f = fitzhugh_nagumo()
    g = negation(2)
    rng = np.random.default_rng(42)
    ts = rng.uniform(0, 10, 200)
    xs = rng.uniform(-5, 5, (200, 2))
    eps = max(equivariance_residual(f, g, t, x) for t, x in zip(ts, xs))
    image = xs @ g.matrix.T
    back = max(equivariance_residual(f, g.T, t, y) for t, y in zip(ts, image))
    assert eps <= TOL_EQUIV
    assert back <= max(eps, 1e-15) * (1 + TOL_ORTHO)


def test_check_commuting_examples():
    for deg in (0, 37, 120, 240):
        assert check_commuting(HARMONIC_A, make_rotation_2d(np.radians(deg)))
    A2 = integrator_chain_matrices(2)[0]
    assert check_commuting(A2, negation(2))
    assert not check_commuting(A2, make_rotation_2d(np.pi / 2))
    with pytest.raises(SymmetryError):
        check_commuting(np.eye(3), negation(2))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_chain_orthogonal_members_are_plus_minus_identity(n):
    A = integrator_chain_matrices(n)[0]
    rng = np.random.default_rng(7)
    cands = [identity(n), negation(n)] + [SymmetryElement(random_orthogonal(n, rng)) for _ in range(200)]
    kept = orthogonal_commutant_members(A, cands)
    assert kept == [identity(n), negation(n)]


def test_harmonic_members_drop_reflection():
    rots = [make_rotation_2d(np.radians(d)) for d in (0, 120, 240)]
    reflection = SymmetryElement(np.array([[1.0, 0.0], [0.0, -1.0]]), "flip")
    # a reflection anticommutes with the generator: R J = -J R
    np.testing.assert_array_equal(reflection.matrix @ HARMONIC_A, -HARMONIC_A @ reflection.matrix)
    assert orthogonal_commutant_members(HARMONIC_A, rots + [reflection]) == rots
    assert orthogonal_commutant_members(HARMONIC_A, []) == []


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_random_orthogonal_preserves_norm(n, seed):
    rng = np.random.default_rng(seed)
    g = SymmetryElement(random_orthogonal(n, rng))
    x = rng.standard_normal((1000, n)) * rng.uniform(0.1, 100)
    nx_ = np.linalg.norm(x, axis=1)
    np.testing.assert_array_less(np.abs(np.linalg.norm(x @ g.matrix.T, axis=1) - nx_), 1e-12 * nx_ + 1e-300)


@given(st.floats(-720, 720, allow_nan=False))
def test_rotations_are_orthogonal_and_harmonic_equivariant(deg):
    g = make_rotation_2d(np.radians(deg))
    assert check_orthogonal(g.matrix, TOL_ORTHO)
    assert check_equivariance(harmonic(1.0), g, sample_count=20).passed


def test_parse_symmetry_forms():
    assert parse_symmetry("negation", 2) == negation(2)
    assert parse_symmetry("identity", 3, label="G").label == "G"
    assert parse_symmetry({"rotation2d": 180}) == SymmetryElement(make_rotation_2d(np.pi).matrix)
    assert parse_symmetry([[-1]]).dim == 1
    with pytest.raises(SymmetryError):
        parse_symmetry("flip", 2)
    with pytest.raises(SymmetryError):
        parse_symmetry({"angle": 3})
