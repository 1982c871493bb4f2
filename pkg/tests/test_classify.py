import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from gsdrank import (DimensionError, Region, Tensor3, boundary_perturbation, classify_general,
                     classify_square, embed_core, find_nonsingular_slicemix, generate_instance,
                     is_singular_pencil, multilinear_multiply, slicemix)
from gsdrank.classify import RankRegionClass

ROT = np.array([[0.0, -1.0], [1.0, 0.0]])
NILP = np.array([[0.0, 1.0], [0.0, 0.0]])

CANONICAL = {
    "a1": Tensor3.from_slices(np.eye(2), np.diag([1.0, 2.0])),
    "a2": Tensor3.from_slices(np.eye(2), np.eye(2)),
    "a3": Tensor3.from_slices(np.eye(2), ROT),
    "b": Tensor3.from_slices(NILP, 2 * NILP),
}


# ---- slicemix search ------------------------------------------------------

def test_slicemix_search_examples():
    U = find_nonsingular_slicemix(Tensor3.from_slices(np.eye(2), np.diag([1.0, 2.0])))
    X1 = slicemix(Tensor3.from_slices(np.eye(2), np.diag([1.0, 2.0])), U).slices[0]
    assert np.linalg.svd(X1, compute_uv=False)[-1] > 0.5

    Y = Tensor3.from_slices(NILP, NILP.T)
    U = find_nonsingular_slicemix(Y)
    assert U is not None
    assert abs(np.linalg.det(slicemix(Y, U).slices[0])) > 0.1

    assert find_nonsingular_slicemix(CANONICAL["b"]) is None


def test_slicemix_search_finds_singular_y1_escape():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(2, 6))
        Y1 = rng.standard_normal((n, n))
        Y1[:, 0] = 0.0                       # Y_1 itself singular
        Y = Tensor3.from_slices(Y1, rng.standard_normal((n, n)))
        U = find_nonsingular_slicemix(Y)
        assert U is not None
        assert np.linalg.svd(slicemix(Y, U).slices[0], compute_uv=False)[-1] > 1e-3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_slicemix_none_iff_singular(seed, singular):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    A, B = rng.standard_normal((2, n, n))
    if singular:
        A[:, -1] = 0.0
        B[:, -1] = 0.0
    Y = Tensor3.from_slices(A, B)
    assert (find_nonsingular_slicemix(Y) is None) == is_singular_pencil(A, B)


# ---- classification -------------------------------------------------------

@pytest.mark.parametrize("case", ["a1", "a2", "a3", "b"])
def test_canonical_cases(case):
    c = classify_square(CANONICAL[case])
    assert c.case == case
    expect = {"a1": Region.INTERIOR, "a2": Region.BOUNDARY, "a3": Region.EXTERIOR,
              "b": Region.BOUNDARY}[case]
    assert c.label is expect
    assert c.margin >= 0
    assert len(c.eigenvalues) == (0 if case == "b" else 2)


def test_rotation_eigenvalues_are_conjugate_pair():
    c = classify_square(CANONICAL["a3"])
    vals = [complex(e.alpha) / e.beta for e in c.eigenvalues]
    # eigenvalues of the mixed pair are a Moebius image of +-i: still a conjugate pair
    assert oracles.match_multisets(vals, [v.conjugate() for v in vals]) <= 1e-14
    assert all(abs(v.imag) > 0.5 for v in vals)


def test_case_label_consistency_enforced():
    with pytest.raises(ValueError):
        RankRegionClass(Region.INTERIOR, "a2")


def test_one_by_one_is_interior():
    c = classify_square(Tensor3.from_slices([[2.0]], [[3.0]]))
    assert c.case == "a1" and math.isinf(c.margin)
    assert classify_square(Tensor3.zeros(1, 1)).case == "b"


def test_square_required():
    with pytest.raises(DimensionError):
        classify_square(Tensor3.zeros(2, 3))


def test_classification_matches_eigenvalue_oracle():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(1, 6))
        A, B = rng.standard_normal((2, n, n))
        c = classify_square(Tensor3.from_slices(A, B), tol=1e-8)
        # independent route: roots of det(B - lam A) with the generic A invertible
        expect = oracles.real_eigs_distinct(oracles.det_poly_eigenvalues(B, A), 1e-8)
        assert c.case == expect


def _transform(Y, rng):
    n = Y.shape[0]
    S = oracles.random_orthogonal(rng, n) @ np.diag(rng.uniform(0.5, 2.0, n))
    T = oracles.random_orthogonal(rng, n) @ np.diag(rng.uniform(0.5, 2.0, n))
    U = oracles.random_orthogonal(rng, 2) @ np.diag(rng.uniform(0.5, 2.0, 2))
    return multilinear_multiply(Y, S, T, U)


@pytest.mark.parametrize("kind", ["interior", "boundary-a2", "exterior", "singular-pencil"])
def test_label_invariant_under_transforms(kind):
    rng = np.random.default_rng(len(kind))
    for n in (2, 3, 4):
        Y = generate_instance(kind, (n, n), seed=n)
        base = classify_square(Y)
        for _ in range(15):
            assert classify_square(_transform(Y, rng)).label is base.label


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exactly_one_case(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    A, B = rng.standard_normal((2, n, n))
    if rng.random() < 0.25:
        A[-1], B[-1] = 0.0, 0.0
    c = classify_square(Tensor3.from_slices(A, B))
    assert c.case in {"a1", "a2", "a3", "b"}
    assert (c.case == "b") == is_singular_pencil(A, B)
    if c.case != "b":
        assert len(c.eigenvalues) == n


# ---- perturbation ---------------------------------------------------------

def test_perturbation_case_common_nonzero():
    R1, R2 = np.diag([0.0, 1.0]), np.diag([0.0, 3.0])
    H1, H2, plan = boundary_perturbation(R1, R2, 1e-2, delta=1e-3)
    assert plan.case == "common-nonzero"
    np.testing.assert_allclose(np.diag(H2) / np.diag(H1), [3.0, 3.0], rtol=1e-15)


def test_perturbation_case_r1_nonzero():
    R1, R2 = np.diag([0.0, 2.0]), np.zeros((2, 2))
    H1, H2, plan = boundary_perturbation(R1, R2, 1e-1, delta=1e-4)
    assert plan.case == "r1-nonzero"
    assert plan.eta == pytest.approx(1e-2)
    np.testing.assert_allclose(np.diag(H2) / np.diag(H1), [5e-3, 5e-3], rtol=1e-12)


def test_perturbation_case_r2_nonzero():
    R1, R2 = np.zeros((2, 2)), np.diag([0.0, 4.0])
    H1, H2, plan = boundary_perturbation(R1, R2, 1e-1, delta=1e-4)
    assert plan.case == "r2-nonzero"
    ev = np.diag(H2) / np.diag(H1)
    assert ev[0] == pytest.approx(ev[1], rel=1e-12)


def test_perturbation_errors():
    with pytest.raises(ValueError, match="not identically singular"):
        boundary_perturbation(np.eye(2), np.eye(2), 1e-3)
    with pytest.raises(ValueError, match="triangular"):
        boundary_perturbation(np.ones((2, 2)), np.ones((2, 2)), 1e-3)
    with pytest.raises(ValueError):
        boundary_perturbation(np.diag([0.0, 1.0]), np.diag([0.0, 1.0]), -1.0)
    with pytest.raises(ValueError, match="exceeds"):
        boundary_perturbation(np.diag([0.0, 1.0]), np.diag([0.0, 1.0]), 1e-6, delta=1.0)


def _singular_triangular(rng, n, common=1):
    R1, R2 = np.triu(rng.standard_normal((2, n, n)))
    zeros = rng.choice(n, size=common, replace=False)
    for k in range(n):
        if k in zeros:
            R1[k, k] = R2[k, k] = 0.0
        else:
            r = rng.random()
            if r < 0.25:
                R1[k, k] = 0.0
            elif r < 0.5:
                R2[k, k] = 0.0
    return R1, R2


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1e-4, 1e-6, 1e-8]), st.integers(1, 2))
def test_perturbation_property(seed, eps, common):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(max(2, common), 6))
    R1, R2 = _singular_triangular(rng, n, common)
    H1, H2, plan = boundary_perturbation(R1, R2, eps)
    assert plan.norm <= eps
    assert math.sqrt(np.sum((H1 - R1) ** 2) + np.sum((H2 - R2) ** 2)) <= eps
    assert np.linalg.svd(H1, compute_uv=False)[-1] > 0
    assert np.all(np.tril(H1, -1) == 0.0) and np.all(np.tril(H2, -1) == 0.0)
    c = classify_square(Tensor3.from_slices(H1, H2), sing_tol=plan.sing_tol)
    assert c.case == "a2" and c.margin <= 1e-10


# ---- general membership ---------------------------------------------------

def test_general_examples():
    g = classify_general(Tensor3.zeros(3, 4), 2)
    assert g.label is Region.IN_CLOSURE and g.residual == 0.0 and g.square is None

    rng = np.random.default_rng(2)
    S = oracles.random_orthogonal(rng, 4)[:, :2]
    T = oracles.random_orthogonal(rng, 5)[:, :2]
    g = classify_general(embed_core(CANONICAL["a1"], S, T), 2)
    assert g.label is Region.IN_CLOSURE
    g = classify_general(embed_core(CANONICAL["a3"], S, T), 2)
    assert g.label is Region.EXTERIOR and g.relative_residual > 1e-3


def test_general_square_refinement():
    g = classify_general(CANONICAL["a2"], 2)
    assert g.label is Region.IN_CLOSURE
    assert g.square is not None and g.square.case == "a2"


def test_general_bad_rank():
    with pytest.raises(ValueError):
        classify_general(Tensor3.zeros(2, 3), 3)
