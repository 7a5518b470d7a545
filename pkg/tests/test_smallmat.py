import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from povm_prep.errors import NegativeEigenvalue, NotHermitian, SingularMatrix
from povm_prep.smallmat import (
    Mat2,
    MatN,
    eig_hermitian_2x2,
    invert,
    psd_inv_sqrt,
    psd_rank,
    psd_sqrt,
    support_projector,
)
from sampling import to_np

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


@st.composite
def hermitian(draw):
    a, d = draw(finite), draw(finite)
    b = draw(cplx)
    return Mat2(a, b, b.conjugate(), d)


@st.composite
def psd(draw):
    h = draw(hermitian())
    return h.dagger() @ h + Mat2.identity() * draw(st.floats(1e-3, 1.0))


def test_mat2_arithmetic_matches_numpy():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        ma, mb = Mat2.from_rows(a.tolist()), Mat2.from_rows(b.tolist())
        np.testing.assert_allclose(to_np(ma @ mb), a @ b, atol=1e-12)
        np.testing.assert_allclose(to_np(ma + mb), a + b, atol=1e-12)
        np.testing.assert_allclose(to_np(ma.dagger()), a.conj().T)
        assert ma.trace() == pytest.approx(np.trace(a))
        assert ma.det() == pytest.approx(np.linalg.det(a))
        v = (1 + 2j, -0.5j)
        np.testing.assert_allclose(ma @ v, a @ np.array(v), atol=1e-12)


def test_outer_product_convention():
    # |u><v| has entries u_i conj(v_j)
    m = Mat2.outer((1j, 2), (3, 1j))
    np.testing.assert_allclose(to_np(m), np.outer([1j, 2], np.conj([3, 1j])))


def test_mat2_rejects_non_finite():
    with pytest.raises(ValueError):
        Mat2(float("nan"), 0, 0, 1)


def test_invert_trivial_cases():
    assert invert(MatN.identity(3, 1.0)).max_abs_diff(MatN.identity(3, 1.0)) == 0
    out = invert(MatN.diag([2.0, 4.0]))
    assert out.tolist() == [[0.5, 0.0], [0.0, 0.25]]


def test_invert_random_symmetric_residual():
    rng = np.random.default_rng(1)
    for _ in range(50):
        a = rng.normal(size=(3, 3))
        a = a + a.T + 6 * np.eye(3)
        x = invert(MatN.from_rows(a.tolist()))
        assert np.max(np.abs(a @ np.array(x.tolist()) - np.eye(3))) < 1e-10
        np.testing.assert_allclose(np.array(x.tolist()), np.linalg.inv(a), atol=1e-10)


def test_invert_exact_with_fractions():
    m = MatN.from_rows([[Fraction(1), Fraction(1, 3), Fraction(1, 7)],
                        [Fraction(1, 3), Fraction(1), Fraction(2, 5)],
                        [Fraction(1, 7), Fraction(2, 5), Fraction(1)]])
    assert m @ invert(m) == MatN.identity(3, Fraction(1))


def test_invert_4x4_and_singular():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(4, 4)) + 4 * np.eye(4)
    np.testing.assert_allclose(np.array(invert(MatN.from_rows(a.tolist())).tolist()),
                               np.linalg.inv(a), atol=1e-10)
    with pytest.raises(SingularMatrix):
        invert(MatN.from_rows([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(SingularMatrix):
        invert(MatN.from_rows([[0.0, 0.0], [0.0, 0.0]]))


def test_matn_size_limits():
    with pytest.raises(ValueError):
        MatN.identity(5)
    with pytest.raises(ValueError):
        MatN(((1, 2), (3,)))


def test_eig_examples():
    vals, _ = eig_hermitian_2x2(Mat2.diag(-1, 1))
    assert vals == (-1.0, 1.0)
    vals, (v_lo, v_hi) = eig_hermitian_2x2(Mat2(0, 1, 1, 0))
    assert vals == pytest.approx((-1.0, 1.0))
    s = 1 / math.sqrt(2)
    np.testing.assert_allclose(v_lo, (s, -s), atol=1e-12)
    np.testing.assert_allclose(v_hi, (s, s), atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        eig_hermitian_2x2(Mat2(0, 1, 0, 0))


@settings(max_examples=300, deadline=None)
@given(hermitian())
def test_eig_reconstruction_and_invariants(h):
    vals, vecs = eig_hermitian_2x2(h)
    scale = max(1.0, h.max_abs())
    rebuilt = sum((Mat2.outer(v, v) * lam for lam, v in zip(vals, vecs)), Mat2.zeros())
    assert rebuilt.max_abs_diff(h) < 1e-10 * scale
    gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
    assert np.max(np.abs(gram - np.eye(2))) < 1e-12
    assert vals[0] <= vals[1]
    assert abs(sum(vals) - h.trace().real) < 1e-10 * scale
    assert abs(vals[0] * vals[1] - h.det().real) < 1e-10 * scale ** 2
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(to_np(h)), atol=1e-10 * scale)


def test_psd_inv_sqrt_examples():
    assert psd_inv_sqrt(Mat2.identity()).max_abs_diff(Mat2.identity()) < 1e-15
    assert psd_inv_sqrt(Mat2.diag(0.25, 0.25)).max_abs_diff(Mat2.diag(2, 2)) < 1e-12
    v = (math.cos(0.3), 1j * math.sin(0.3))
    proj = Mat2.outer(v, v)
    assert psd_inv_sqrt(proj, 1e-12).max_abs_diff(proj) < 1e-12
    assert psd_rank(proj) == 1
    assert support_projector(proj).max_abs_diff(proj) < 1e-12


def test_psd_negative_eigenvalue():
    with pytest.raises(NegativeEigenvalue):
        psd_inv_sqrt(Mat2.diag(1, -1e-6))
    # small negative noise is clamped
    assert psd_rank(Mat2.diag(1, -1e-12)) == 1


@settings(max_examples=300, deadline=None)
@given(psd())
def test_psd_inv_sqrt_whitens(m):
    r = psd_inv_sqrt(m)
    assert (r @ m @ r).max_abs_diff(Mat2.identity()) < 1e-9
    oracle = np.linalg.inv(scipy.linalg.sqrtm(to_np(m)))
    assert np.max(np.abs(to_np(r) - oracle)) < 1e-8 * max(1.0, np.max(np.abs(oracle)))
    s = psd_sqrt(m)
    assert (s @ s).max_abs_diff(m) < 1e-9 * max(1.0, m.max_abs())
