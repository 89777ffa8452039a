import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fpkit as fp
from fpkit.errors import InvariantViolation, NoConvergence
from fpkit.spaces import as_vector, norms_rowwise

ALL_KINDS = (fp.NormKind.L1, fp.NormKind.L2, fp.NormKind.LINF)

ROT90 = np.array([[0.0, -1.0], [1.0, 0.0]])
HALF_AVG_ROT = np.array([[0.5, -0.5], [0.5, 0.5]])


def test_norm_worked_examples():
    assert fp.norm([3.0, 4.0], fp.NormKind.L2) == 5.0
    assert fp.norm([1.0, -2.0], fp.NormKind.L1) == 3.0
    assert fp.norm([1.0, -2.0], fp.NormKind.LINF) == 2.0


def test_norm_zero_iff_zero_vector():
    for kind in ALL_KINDS:
        assert fp.norm(np.zeros(4), kind) == 0.0
        assert fp.norm([0.0, 1e-30, 0.0], kind) > 0.0


def test_operator_norm_identity_is_one_in_every_kind():
    eye = np.eye(3)
    for kind in ALL_KINDS:
        assert fp.operator_norm(eye, kind) == 1.0


def test_operator_norm_rotation_is_one():
    assert fp.operator_norm(ROT90, fp.NormKind.L2) == pytest.approx(1.0, abs=1e-12)


def test_operator_norm_averaged_rotation_matches_svd_oracle():
    # Oracle goes through LAPACK directly; the implementation must not.
    oracle = float(np.linalg.svd(HALF_AVG_ROT, compute_uv=False)[0])
    got = fp.operator_norm(HALF_AVG_ROT, fp.NormKind.L2)
    assert got == pytest.approx(0.70710678, abs=1e-8)
    assert got == pytest.approx(oracle, abs=1e-10)


def test_operator_norm_l1_linf_exact_sums():
    M = np.array([[1.0, -3.0], [2.0, 0.5]])
    assert fp.operator_norm(M, fp.NormKind.L1) == 3.5  # max column sum
    assert fp.operator_norm(M, fp.NormKind.LINF) == 4.0  # max row sum


def test_operator_norm_zero_matrix():
    assert fp.operator_norm(np.zeros((3, 3)), fp.NormKind.L2) == 0.0


def test_l2_operator_norm_agrees_with_gram_eigendecomposition():
    # Independent route: largest eigenvalue of M^T M, any dimension up to 8.
    rng = np.random.default_rng(11)
    for d in range(1, 9):
        for _ in range(6):
            M = rng.normal(0.0, 2.0, (d, d))
            oracle = float(np.sqrt(np.max(np.linalg.eigvalsh(M.T @ M))))
            assert fp.operator_norm(M, fp.NormKind.L2) == pytest.approx(oracle, abs=1e-8)


def test_l2_operator_norm_handles_start_vector_annihilation():
    # (1,1)/sqrt(2) is in the kernel, so the power method must fall back to
    # a basis start instead of stalling on a zero iterate.
    M = np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert fp.operator_norm(M, fp.NormKind.L2) == pytest.approx(2.0, abs=1e-10)


def test_l2_operator_norm_budget_exhaustion_raises():
    M = np.diag([2.0, 1.0])
    with pytest.raises(NoConvergence):
        fp.operator_norm(M, fp.NormKind.L2, max_iter=1)


def test_triangle_inequality_seeded_pairs():
    rng = np.random.default_rng(101)
    for kind in ALL_KINDS:
        u = rng.uniform(-50.0, 50.0, (1000, 5))
        v = rng.uniform(-50.0, 50.0, (1000, 5))
        lhs = norms_rowwise(u + v, kind)
        rhs = norms_rowwise(u, kind) + norms_rowwise(v, kind)
        assert np.all(lhs <= rhs + 1e-12 * rhs)


def test_absolute_homogeneity_seeded():
    rng = np.random.default_rng(202)
    for kind in ALL_KINDS:
        for _ in range(200):
            v = rng.uniform(-10.0, 10.0, 4)
            a = float(rng.uniform(-8.0, 8.0))
            np.testing.assert_allclose(
                fp.norm(a * v, kind), abs(a) * fp.norm(v, kind), rtol=1e-12
            )


def test_operator_norm_consistency_seeded():
    # norm(M v) <= operator_norm(M) * norm(v), same kind throughout.
    rng = np.random.default_rng(303)
    for kind in ALL_KINDS:
        for _ in range(1000):
            d = int(rng.integers(1, 6))
            M = rng.normal(0.0, 1.5, (d, d))
            v = rng.uniform(-20.0, 20.0, d)
            nv = fp.norm(v, kind)
            assert fp.norm(M @ v, kind) <= fp.operator_norm(M, kind) * nv + 1e-10 * nv


@given(
    st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=8),
    st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=8),
)
@settings(max_examples=200, deadline=None)
def test_norm_axioms_hypothesis(a, b):
    n = min(len(a), len(b))
    u, v = np.asarray(a[:n]), np.asarray(b[:n])
    for kind in ALL_KINDS:
        nu, nv = fp.norm(u, kind), fp.norm(v, kind)
        assert nu >= 0.0
        assert fp.norm(u + v, kind) <= nu + nv + 1e-12 * (nu + nv)
        np.testing.assert_allclose(fp.norm(-u, kind), nu, rtol=1e-15)


def test_vector_and_matrix_validation():
    # norm() itself trusts its input; the type invariants live in as_vector,
    # which everything user-facing routes through.
    with pytest.raises(InvariantViolation):
        as_vector([1.0, np.nan])
    with pytest.raises(InvariantViolation):
        as_vector([])
    with pytest.raises(InvariantViolation):
        as_vector(np.zeros(fp.DIM_CAP + 1))
    with pytest.raises(InvariantViolation):
        fp.operator_norm(np.ones((2, 3)))
    with pytest.raises(InvariantViolation):
        fp.operator_norm(np.full((2, 2), np.inf))
