import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import exact_recursion
from tedastream.exceptions import InputError, StateError, StreamShapeError
from tedastream.properties import running_states
from tedastream.stats import (
    DetectorState,
    VarianceMode,
    as_sample,
    batch_mean,
    batch_variance,
    unrolled_oracle,
    update_mean,
    update_variance,
)


def absorb(samples, mode="paper"):
    state = DetectorState()
    for x in samples:
        x = np.asarray(x, dtype=float)
        mu = update_mean(state, x)
        s2 = update_variance(state, x, mu, mode)
        state = DetectorState(state.k + 1, mu, s2)
    return state


class TestUpdateMean:
    def test_first_sample_is_its_own_mean(self):
        np.testing.assert_array_equal(update_mean(DetectorState(), [7.5]), [7.5])

    def test_two_sample_average(self):
        state = DetectorState(1, np.array([0.0]), 0.0)
        np.testing.assert_array_equal(update_mean(state, [2.0]), [1.0])

    def test_long_stream_matches_batch_mean(self, rng):
        X = rng.normal(3.0, 2.0, (1000, 4))
        state = absorb(X)
        np.testing.assert_allclose(state.mu, batch_mean(X), rtol=1e-9)

    def test_dimension_mismatch(self):
        state = DetectorState(1, np.array([0.0, 1.0]), 0.0)
        with pytest.raises(StreamShapeError):
            update_mean(state, [1.0])

    @pytest.mark.parametrize("bad", [[np.nan], [np.inf, 1.0], ["a"]])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(InputError):
            update_mean(DetectorState(), bad)


class TestUpdateVariance:
    @pytest.mark.parametrize("mode", ["paper", "exact"])
    def test_first_sample_gives_zero(self, mode):
        x = np.array([4.0, -1.0])
        assert update_variance(DetectorState(), x, x, mode) == 0.0

    def test_paper_mode_zero_two(self):
        state = DetectorState(1, np.array([0.0]), 0.0)
        assert update_variance(state, [2.0], [1.0], VarianceMode.PAPER) == 0.5

    def test_exact_mode_zero_two(self):
        state = DetectorState(1, np.array([0.0]), 0.0)
        assert update_variance(state, [2.0], [1.0], VarianceMode.EXACT) == 1.0

    def test_mean_shape_mismatch(self):
        state = DetectorState(1, np.array([0.0]), 0.0)
        with pytest.raises(StreamShapeError):
            update_variance(state, [2.0], [1.0, 1.0])

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            update_variance(DetectorState(), [1.0], [1.0], "sample")

    @pytest.mark.parametrize("mode", ["paper", "exact"])
    def test_matches_rational_recursion(self, rng, mode):
        X = rng.integers(-50, 50, (40, 3)).astype(float)
        ref = exact_recursion(X, mode)
        _, sig = running_states(X, VarianceMode(mode))
        np.testing.assert_allclose(sig, [float(s) for _, s in ref], rtol=1e-13)


class TestDetectorState:
    def test_invalid_states(self):
        with pytest.raises(StateError):
            DetectorState(k=-1)
        with pytest.raises(StateError):
            DetectorState(k=2)
        with pytest.raises(StateError):
            DetectorState(k=0, mu=np.zeros(1))
        with pytest.raises(StateError):
            DetectorState(k=1, mu=np.zeros(1), sigma2=-1.0)

    def test_equality(self):
        a = DetectorState(1, np.array([1.0]), 0.0)
        assert a == DetectorState(1, np.array([1.0]), 0.0)
        assert a != DetectorState(1, np.array([2.0]), 0.0)


class TestBatchOracles:
    def test_mean_of_zero_two(self):
        np.testing.assert_array_equal(batch_mean([[0.0], [2.0]]), [1.0])

    def test_constant_stream(self):
        X = [[3.25]] * 17
        np.testing.assert_array_equal(batch_mean(X), [3.25])
        assert batch_variance(X, [3.25]) == 0.0

    def test_variance_of_zero_two(self):
        assert batch_variance([[0.0], [2.0]], [1.0]) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            batch_mean([])
        with pytest.raises(ValueError):
            batch_variance([], [0.0])

    def test_ragged_rejected(self):
        with pytest.raises(StreamShapeError):
            batch_mean([[1.0, 2.0], [1.0]])

    def test_batch_mean_equals_running_mean(self, rng):
        X = rng.standard_normal((500, 3))
        np.testing.assert_allclose(batch_mean(X), absorb(X).mu, rtol=1e-9)

    def test_batch_variance_equals_exact_running(self, rng):
        X = rng.normal(-2.0, 0.7, (500, 3))
        state = absorb(X, "exact")
        assert np.isclose(state.sigma2, batch_variance(X, batch_mean(X)), rtol=1e-9)


class TestUnrolledOracle:
    def test_zero_two_paper(self):
        assert [s for _, s in unrolled_oracle([[0.0], [2.0]], "paper")] == [0.0, 0.5]

    def test_zero_two_exact(self):
        assert [s for _, s in unrolled_oracle([[0.0], [2.0]], "exact")] == [0.0, 1.0]

    @pytest.mark.parametrize("mode", ["paper", "exact"])
    def test_constant_stream(self, mode):
        assert all(s == 0.0 for _, s in unrolled_oracle([[1.5, -2.0]] * 30, mode))

    @pytest.mark.parametrize("mode", ["paper", "exact"])
    def test_closed_form_matches_rational_recursion(self, rng, mode):
        X = rng.integers(-9, 9, (60, 2)).astype(float)
        ref = exact_recursion(X, mode)
        got = unrolled_oracle(X, mode)
        for (mu, s), (rmu, rs) in zip(got, ref):
            np.testing.assert_allclose(mu, [float(v) for v in rmu], rtol=1e-12, atol=1e-12)
            assert np.isclose(s, float(rs), rtol=1e-12, atol=1e-12)


def test_as_sample_scalar_and_shape():
    np.testing.assert_array_equal(as_sample(2.0), [2.0])
    with pytest.raises(StreamShapeError):
        as_sample([[1.0, 2.0]])
    with pytest.raises(StreamShapeError):
        as_sample([])


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def streams(draw, max_len=200):
    dim = draw(st.integers(1, 8))
    k = draw(st.integers(1, max_len))
    return draw(arrays(np.float64, (k, dim), elements=finite))


@settings(max_examples=60, deadline=None)
@given(X=streams(), mode=st.sampled_from(list(VarianceMode)))
def test_recursion_equals_unrolled_oracle(X, mode):
    mus, sig = running_states(X, mode)
    oracle = unrolled_oracle(X, mode)
    o_sig = np.array([s for _, s in oracle])
    o_mu = np.array([m for m, _ in oracle])
    # Tolerance scaled to the data: prefix-sum means round differently.
    scale = max(1.0, float(np.abs(X).max()))
    np.testing.assert_allclose(mus, o_mu, rtol=1e-9, atol=1e-12 * scale)
    np.testing.assert_allclose(sig, o_sig, rtol=1e-9, atol=1e-12 * scale**2)
    assert np.all(sig >= 0)


@settings(max_examples=40, deadline=None)
@given(X=streams(), mode=st.sampled_from(list(VarianceMode)),
       a=st.sampled_from([-3.0, 0.5, 2.0]), b=finite)
def test_shift_and_scale(X, mode, a, b):
    mus, sig = running_states(X, mode)
    mus_b, sig_b = running_states(X + b, mode)
    _, sig_a = running_states(a * X, mode)
    scale = max(1.0, float(np.abs(X).max()), abs(b))
    np.testing.assert_allclose(sig_b, sig, rtol=1e-9, atol=1e-9 * scale**2)
    np.testing.assert_allclose(mus_b, mus + b, rtol=1e-9, atol=1e-12 * scale)
    np.testing.assert_allclose(sig_a, a * a * sig, rtol=1e-9, atol=1e-12 * scale**2)
