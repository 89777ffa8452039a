import numpy as np
import pytest

import fpkit as fp
from fpkit.errors import ParameterOutOfRange

from _family import family50, reduction_identity_gap, separated_pairs

T_LINE = fp.line_map(-2.0, 100.0)  # x -> 100 - 2x, the running demo map

# Hand-chosen matrices for the exact min-b analysis. Symmetric parts stay
# well below 1 so the enriched inequality is eventually feasible, and each
# one keeps the feasibility boundary away from the test grid's knife edges.
MATRICES_ENRICHED = [
    np.array([[-2.0]]),
    np.array([[0.2, -1.5], [1.5, 0.3]]),
    np.array([[-2.0, 0.0], [0.0, 0.5]]),
]
MATRICES_MODIFIED = [
    np.array([[-2.0]]),
    np.array([[-0.8, -0.5], [0.5, -0.8]]),
    np.array([[-1.0, -0.3], [0.3, -1.0]]),
]


# --- transforms ---


def test_averaged_identity_is_identity():
    m = fp.averaged(fp.Identity(2), 0.3)
    x = np.array([1.5, -2.0])
    np.testing.assert_allclose(fp.evaluate(m, x), x, rtol=1e-15)


def test_averaged_quarter_step_at_zero():
    m = fp.averaged(T_LINE, 0.25)
    assert fp.evaluate(m, [0.0])[0] == 25.0


def test_averaged_lambda_one_equals_base():
    m = fp.averaged(T_LINE, 1.0)
    for x in ([0.0], [7.0], [-3.5]):
        assert fp.evaluate(m, x)[0] == fp.evaluate(T_LINE, x)[0]


def test_averaged_rejects_bad_lambda():
    for lam in (0.0, -0.1, 1.0 + 1e-12, float("nan")):
        with pytest.raises(ParameterOutOfRange):
            fp.averaged(T_LINE, lam)


def test_enriched_reduction_at_b_zero_equals_base():
    m = fp.enriched_reduction(T_LINE, 0.0)
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.uniform(-100.0, 100.0, 1)
        assert fp.evaluate(m, x)[0] == fp.evaluate(T_LINE, x)[0]


def test_enriched_reduction_half_gives_shifted_negation():
    # ((x/2) + 100 - 2x) / (3/2) simplifies to 200/3 - x.
    m = fp.enriched_reduction(T_LINE, 0.5)
    rng = np.random.default_rng(5)
    for _ in range(5):
        x = float(rng.uniform(-100.0, 100.0))
        np.testing.assert_allclose(fp.evaluate(m, [x])[0], 200.0 / 3.0 - x, rtol=1e-14)


def test_enriched_reduction_coincides_with_averaged():
    # Same dataclass value, not merely pointwise agreement.
    assert fp.enriched_reduction(T_LINE, 3.0) == fp.averaged(T_LINE, 0.25)
    red = fp.enriched_reduction(T_LINE, 2.0)
    avg = fp.averaged(T_LINE, 1.0 / 3.0)
    rng = np.random.default_rng(7)
    for _ in range(1000):
        x = rng.uniform(-100.0, 100.0, 1)
        np.testing.assert_allclose(fp.evaluate(red, x), fp.evaluate(avg, x), atol=1e-12)


def test_modified_shift_basics():
    assert fp.evaluate(fp.modified_shift(T_LINE, 0.0), [4.0])[0] == fp.evaluate(T_LINE, [4.0])[0]
    doubler = fp.modified_shift(fp.Identity(1), 1.0)
    assert fp.evaluate(doubler, [3.0])[0] == 6.0


def test_modified_shift_of_scaled_map_is_identity():
    # T_b x = (1-b)x with b=2: the shift bx + Tx collapses to x, so every
    # point is fixed for the shift while only 0 is fixed for T itself.
    base = fp.scaling_map(-1.0)
    shifted = fp.modified_shift(base, 2.0)
    rng = np.random.default_rng(11)
    for _ in range(100):
        x = rng.uniform(-100.0, 100.0, 1)
        np.testing.assert_array_equal(fp.evaluate(shifted, x), x)
    assert fp.evaluate(base, [0.0])[0] == 0.0
    assert fp.evaluate(base, [1.0])[0] != 1.0


def test_transform_parameter_validation():
    for bad in (-0.5, float("nan")):
        with pytest.raises(ParameterOutOfRange):
            fp.enriched_reduction(T_LINE, bad)
        with pytest.raises(ParameterOutOfRange):
            fp.modified_shift(T_LINE, bad)


# --- sampling ---


def test_sampler_is_deterministic_and_never_degenerate():
    s = fp.PairSampler(seed=77, count=5000)
    xs1, ys1 = s.draw(3)
    xs2, ys2 = s.draw(3)
    np.testing.assert_array_equal(xs1, xs2)
    np.testing.assert_array_equal(ys1, ys2)
    d = np.linalg.norm(xs1 - ys1, axis=1)
    assert np.all(d > 0.0)
    assert np.all(np.abs(xs1) <= s.box_radius) and np.all(np.abs(ys1) <= s.box_radius)


def test_sampler_near_pair_share():
    s = fp.PairSampler(seed=42, count=10_000, near_pair_fraction=0.2)
    xs, ys = s.draw(2)
    d = np.linalg.norm(xs - ys, axis=1)
    near = np.sum(d <= 1e-3 * s.box_radius)
    assert near >= 0.2 * s.count


def test_sampler_validation():
    with pytest.raises(ParameterOutOfRange):
        fp.PairSampler(count=0)
    with pytest.raises(ParameterOutOfRange):
        fp.PairSampler(near_pair_fraction=1.5)
    with pytest.raises(ParameterOutOfRange):
        fp.PairSampler(box_radius=0.0)


# --- sampled verification ---


def test_verify_modified_demo_map_passes_at_three():
    rep = fp.verify_condition(T_LINE, 3.0, fp.ConditionKind.MODIFIED)
    assert rep.passed
    assert rep.max_ratio == pytest.approx(1.0, abs=1e-10)
    assert rep.pairs_tested == 10_000
    assert rep.kind is fp.ConditionKind.MODIFIED


def test_verify_modified_scaled_family_passes():
    for b in (0.5, 1.0, 1.5, 2.0):
        rep = fp.verify_condition(fp.scaling_map(1.0 - b), b, fp.ConditionKind.MODIFIED)
        assert rep.passed
        assert rep.max_ratio == pytest.approx(1.0, abs=1e-10)


def test_verify_modified_demo_map_fails_at_zero_with_witness():
    rep = fp.verify_condition(T_LINE, 0.0, fp.ConditionKind.MODIFIED)
    assert not rep.passed
    assert rep.max_ratio == pytest.approx(2.0, abs=1e-10)
    again = fp.condition_ratio(
        T_LINE, 0.0, fp.ConditionKind.MODIFIED, rep.witness_x, rep.witness_y
    )
    assert again == pytest.approx(rep.max_ratio, abs=1e-12)


def test_verify_enriched_demo_map_ratio_quarter():
    rep = fp.verify_condition(T_LINE, 3.0, fp.ConditionKind.ENRICHED)
    assert rep.passed
    assert rep.max_ratio == pytest.approx(0.25, abs=1e-10)


def test_report_invariants_hold_either_way():
    for b in (0.0, 3.0):
        rep = fp.verify_condition(T_LINE, b, fp.ConditionKind.MODIFIED, slack=1e-9)
        assert rep.passed == (rep.max_ratio <= 1.0 + rep.slack)
        again = fp.condition_ratio(
            T_LINE, b, fp.ConditionKind.MODIFIED, rep.witness_x, rep.witness_y
        )
        assert again == pytest.approx(rep.max_ratio, abs=1e-12)


def test_verify_rejects_negative_b():
    with pytest.raises(ParameterOutOfRange):
        fp.verify_condition(T_LINE, -1.0, fp.ConditionKind.MODIFIED)


# --- the reduction identity ---


def test_reduction_identity_on_separated_pairs():
    # (b+1)*||Sx-Sy|| equals ||b(x-y)+Tx-Ty|| up to rounding; with pairs at
    # least 10 apart the relative form is clean of cancellation noise.
    maps = [T_LINE, fp.scaling_map(-1.0, 2), *family50()[::9]]
    for i, m in enumerate(maps):
        xs, ys = separated_pairs(1300 + i, 300, m.dim)
        for b in (0.0, 0.5, 1.0, 3.0):
            assert reduction_identity_gap(m, b, xs, ys) <= 1e-12


def test_reduction_identity_on_near_pairs_absolute_form():
    # Near pairs make the relative form blow up on rounding, so the check
    # there uses the absolute tolerance floored at distance 1.
    s = fp.PairSampler(seed=99, count=2000)
    for m in (T_LINE, fp.scaling_map(-1.0, 2)):
        xs, ys = s.draw(m.dim)
        d = np.linalg.norm(xs - ys, axis=1)
        for b in (0.5, 3.0):
            S = fp.enriched_reduction(m, b)
            lhs = (b + 1.0) * np.linalg.norm(
                fp.evaluate_many(S, xs) - fp.evaluate_many(S, ys), axis=1
            )
            rhs = np.linalg.norm(
                b * (xs - ys) + fp.evaluate_many(m, xs) - fp.evaluate_many(m, ys), axis=1
            )
            assert np.max(np.abs(lhs - rhs) - 1e-10 * np.maximum(1.0, d)) <= 0.0


def test_reduction_identity_transfers_verdicts():
    # verify(T, b, enriched) and verify(reduction, 0, enriched) agree on the
    # same pair set, passing and failing alike.
    sampler = fp.PairSampler(seed=55, count=3000)
    for m, b in ((T_LINE, 3.0), (fp.scaling_map(2.0), 1.0)):
        direct = fp.verify_condition(m, b, fp.ConditionKind.ENRICHED, sampler)
        reduced = fp.verify_condition(
            fp.enriched_reduction(m, b), 0.0, fp.ConditionKind.ENRICHED, sampler
        )
        assert direct.passed == reduced.passed


def test_modified_shift_identity_transfers_verdicts():
    # ||Sx-Sy|| with S = bx+Tx is the same expression as ||b(x-y)+Tx-Ty||,
    # so the modified verdict equals plain nonexpansiveness of the shift.
    sampler = fp.PairSampler(seed=56, count=3000)
    for m, b, expect in ((T_LINE, 3.0, True), (T_LINE, 0.0, False)):
        direct = fp.verify_condition(m, b, fp.ConditionKind.MODIFIED, sampler)
        shifted = fp.verify_condition(
            fp.modified_shift(m, b), 0.0, fp.ConditionKind.MODIFIED, sampler
        )
        assert direct.passed == shifted.passed == expect
        xs, ys = sampler.draw(m.dim)
        S = fp.modified_shift(m, b)
        lhs = np.linalg.norm(fp.evaluate_many(S, xs) - fp.evaluate_many(S, ys), axis=1)
        rhs = np.linalg.norm(
            b * (xs - ys) + fp.evaluate_many(m, xs) - fp.evaluate_many(m, ys), axis=1
        )
        assert np.max(np.abs(lhs - rhs) - 1e-10 * np.maximum(1.0, lhs)) <= 0.0


# --- minimal enrichment constant ---


def grid_min_b(A, kind, b_max=10.0, step=1e-4):
    """Dense-scan oracle: least grid b with ||bI + A|| <= rhs(b), svd route."""
    bs = np.arange(0.0, b_max + step, step)
    stacked = bs[:, None, None] * np.eye(A.shape[0]) + A
    tops = np.linalg.svd(stacked, compute_uv=False)[:, 0]
    rhs = bs + 1.0 if kind is fp.ConditionKind.ENRICHED else np.ones_like(bs)
    feasible = np.flatnonzero(tops <= rhs)
    return float(bs[feasible[0]]) if feasible.size else None


def test_min_b_scalar_examples():
    A = np.array([[-2.0]])
    assert fp.min_b_affine(A, fp.ConditionKind.MODIFIED) == pytest.approx(1.0, abs=1e-6)
    assert fp.min_b_affine(A, fp.ConditionKind.ENRICHED) == pytest.approx(0.5, abs=1e-6)
    assert fp.min_b_affine(2.0 * np.eye(2), fp.ConditionKind.MODIFIED) is None


def test_min_b_matches_grid_oracle():
    for kind, mats in (
        (fp.ConditionKind.ENRICHED, MATRICES_ENRICHED),
        (fp.ConditionKind.MODIFIED, MATRICES_MODIFIED),
    ):
        for A in mats:
            got = fp.min_b_affine(A, kind)
            oracle = grid_min_b(A, kind)
            assert got is not None and oracle is not None
            assert got == pytest.approx(oracle, abs=2e-4)


def test_min_b_ignores_offset():
    A = np.array([[0.2, -1.5], [1.5, 0.3]])
    b = fp.min_b_affine(A, fp.ConditionKind.ENRICHED)
    rep = fp.verify_condition(
        fp.Affine(A, [17.0, -4.0]), b + 1e-6, fp.ConditionKind.ENRICHED,
        fp.PairSampler(seed=5, count=2000),
    )
    assert rep.passed


def test_min_b_soundness_above_and_refutation_below():
    for kind, mats in (
        (fp.ConditionKind.ENRICHED, MATRICES_ENRICHED),
        (fp.ConditionKind.MODIFIED, MATRICES_MODIFIED),
    ):
        for A in mats:
            b = fp.min_b_affine(A, kind)
            mapping = fp.Affine(A, np.zeros(A.shape[0]))
            rep = fp.verify_condition(
                mapping, b + 1e-6, kind, fp.PairSampler(seed=21, count=10_000)
            )
            assert rep.passed
            if b > 1e-3:
                b_low = b - 1e-3
                # A pair aligned with the top singular direction of b'I + A
                # exposes the violation.
                M = b_low * np.eye(A.shape[0]) + A
                v = np.linalg.svd(M)[2][0]
                ratio = fp.condition_ratio(mapping, b_low, kind, 50.0 * v, -50.0 * v)
                assert ratio > 1.0 + 1e-9


def test_enriched_feasibility_is_upward_closed():
    # Once the reduced inequality holds it keeps holding for larger b:
    # scan 100 grid points and reject any feasible -> infeasible transition.
    for A in MATRICES_ENRICHED:
        feas = np.array([
            fp.operator_norm(b * np.eye(A.shape[0]) + A) <= b + 1.0
            for b in np.linspace(0.0, 6.0, 100)
        ])
        assert not np.any(feas[:-1] & ~feas[1:])
        assert feas[-1]
