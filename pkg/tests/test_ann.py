"""Unit and property tests for the network core."""

from __future__ import annotations

import math
import random

import pytest

from fedsim.ann import (
    GradientMode,
    ModelWeights,
    Sample,
    backprop_layer,
    forward_layer,
    gradient,
    hidden_error,
    mse,
    output_error,
    sigmoid,
    train_batch,
    train_epoch,
)

from conftest import assert_weights_identical, rand_sample, rand_weights, weight_bits
from reference_net import reference_train_batch, reference_train_epoch

LN3 = 1.0986122886681098  # closest double to ln(3)


class TestSigmoid:
    def test_symmetry_point(self):
        assert sigmoid(0.0) == 0.5

    def test_log3_closed_form(self):
        # 1 / (1 + 1/3) and its mirror; exact in binary64 with this exp
        assert sigmoid(LN3) == 0.75
        assert sigmoid(-LN3) == 0.25

    def test_symmetry_property(self):
        rnd = random.Random(1)
        for _ in range(1000):
            x = rnd.uniform(-30, 30)
            assert abs(sigmoid(-x) - (1.0 - sigmoid(x))) < 1e-15

    def test_strictly_increasing(self):
        xs = [-30.0 + i * (60.0 / 2000) for i in range(2001)]
        ys = [sigmoid(x) for x in xs]
        assert all(a < b for a, b in zip(ys, ys[1:]))

    def test_open_unit_interval(self):
        # binary64 saturates past |x| ~ 37; inside that, strictly open
        rnd = random.Random(2)
        for _ in range(1000):
            s = sigmoid(rnd.uniform(-36, 36))
            assert 0.0 < s < 1.0


class TestForwardLayer:
    def test_worked_hidden_preactivation(self):
        # dot((0.25, 0.70), (0.05, 0.09)) with zero bias, exactly
        out = forward_layer((0.25, 0.70), ((0.05, 0.09, 0.0),))
        assert out == (0.0755,)

    def test_zero_input_exposes_bias(self):
        out = forward_layer((0.0, 0.0), ((3.5, -2.5, 0.125), (1.0, 1.0, -4.0)))
        assert out == (0.125, -4.0)

    def test_hand_dot_product(self):
        assert forward_layer((1.0, 1.0), ((0.2, 0.3, 0.1),)) == (0.6,)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            forward_layer((1.0, 2.0, 3.0), ((0.1, 0.2, 0.3),))


class TestOutputError:
    def test_zero_when_on_target(self):
        assert output_error((0.3, 0.8), (0.3, 0.8)) == (0.0, 0.0)

    def test_hand_values(self):
        assert output_error((0.6,), (0.0,)) == (0.144,)
        assert output_error((0.5,), (1.0,)) == (-0.125,)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            output_error((0.5,), (1.0, 0.0))


class TestBackpropLayer:
    def test_zero_deltas_leave_layer_unchanged(self):
        layer = ((0.1, 0.2, 0.3), (0.4, 0.5, 0.6))
        assert backprop_layer((0.9, 0.8), (0.0, 0.0), layer) == layer

    def test_hand_update(self):
        (row,) = backprop_layer((1.0, 0.0), (0.5,), ((0.2, 0.3, 0.4),))
        assert row == (0.2 - 0.5, 0.3 - 0.0, 0.4 - 0.5)
        assert abs(row[0] - (-0.3)) < 1e-15
        assert abs(row[2] - (-0.1)) < 1e-15

    def test_zero_input_isolates_bias(self):
        (row,) = backprop_layer((0.0,), (0.25,), ((0.5, 0.75),))
        assert row[0] == 0.5  # input column untouched by a zero activation
        assert row[1] == 0.75 - 0.25

    def test_value_semantics(self):
        layer = ((0.1, 0.2, 0.3),)
        backprop_layer((1.0, 1.0), (1.0,), layer)
        assert layer == ((0.1, 0.2, 0.3),)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            backprop_layer((1.0,), (0.5, 0.5), ((0.2, 0.3),))


class TestHiddenError:
    def test_zero_output_deltas(self):
        assert hidden_error(
            (0.2, 0.5, 0.9), (0.0, 0.0), ((1.0, 2.0, 3.0, 4.0), (5.0, 6.0, 7.0, 8.0))
        ) == (0.0, 0.0, 0.0)

    def test_saturated_hidden_output(self):
        deltas = hidden_error(
            (0.0, 1.0, 0.5), (0.3, -0.2), ((1.0, 1.0, 1.0, 1.0), (1.0, 1.0, 1.0, 1.0))
        )
        assert deltas[0] == 0.0
        assert deltas[1] == 0.0

    def test_hand_value(self):
        # single hidden neuron at 0.5 feeding two outputs
        (d,) = hidden_error((0.5,), (0.1, -0.1), ((0.4, 9.0), (0.6, 9.0)))
        assert abs(d - (-0.005)) < 1e-15

    def test_bias_column_excluded(self):
        # varying the bias column must not change hidden deltas
        a = hidden_error((0.5, 0.5, 0.5), (0.1, 0.2), ((1, 2, 3, 100.0), (4, 5, 6, -50.0)))
        b = hidden_error((0.5, 0.5, 0.5), (0.1, 0.2), ((1, 2, 3, 0.0), (4, 5, 6, 0.0)))
        assert a == b

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            hidden_error((0.5, 0.5), (0.1,), ((1.0, 2.0),))


def _fixed_point_sample(w: ModelWeights, x: float, y: float) -> Sample:
    """A sample whose targets equal the current forward outputs."""
    from fedsim.ann import _forward_pass

    _, out = _forward_pass(w, (x, y))
    return Sample(input=(x, y), target=out)


class TestTrainEpoch:
    def test_zero_error_fixed_point(self, rnd):
        w = rand_weights(rnd)
        s = _fixed_point_sample(w, 0.3, 0.6)
        for mode in GradientMode:
            deltas, w2 = train_epoch(s, w, mode)
            assert deltas == (0.0, 0.0)
            assert_weights_identical(w, w2)

    def test_chained_mode_matches_reference(self, rnd):
        for _ in range(50):
            w = rand_weights(rnd)
            s = rand_sample(rnd)
            deltas, w2 = train_epoch(s, w, GradientMode.CHAINED)
            ref_deltas, ref_w2 = reference_train_epoch(s, w)
            assert deltas == ref_deltas
            assert_weights_identical(w2, ref_w2)

    def test_classic_mode_equals_weights_minus_gradient(self, rnd):
        for _ in range(50):
            w = rand_weights(rnd)
            s = rand_sample(rnd)
            _, w2 = train_epoch(s, w, GradientMode.CLASSIC)
            g = gradient(w, s)
            expected = ModelWeights.from_flat(
                [wv - gv for wv, gv in zip(w.flat(), g.flat())]
            )
            assert_weights_identical(w2, expected)

    def test_modes_agree_on_output_layer(self, rnd):
        """Hidden-delta timing only affects w_input; w_hidden updates are identical."""
        for _ in range(50):
            w = rand_weights(rnd)
            s = rand_sample(rnd)
            _, w_chained = train_epoch(s, w, GradientMode.CHAINED)
            _, w_classic = train_epoch(s, w, GradientMode.CLASSIC)
            assert w_chained.w_hidden == w_classic.w_hidden

    def test_modes_diverge_on_input_layer(self, rnd):
        diverged = 0
        for _ in range(20):
            w = rand_weights(rnd)
            s = rand_sample(rnd)
            _, w_chained = train_epoch(s, w, GradientMode.CHAINED)
            _, w_classic = train_epoch(s, w, GradientMode.CLASSIC)
            diverged += w_chained.w_input != w_classic.w_input
        assert diverged > 0

    def test_purity(self, rnd):
        w = rand_weights(rnd)
        s = rand_sample(rnd)
        first = train_epoch(s, w, GradientMode.CHAINED)
        second = train_epoch(s, w, GradientMode.CHAINED)
        assert first[0] == second[0]
        assert_weights_identical(first[1], second[1])


class TestGradient:
    def test_zero_at_fixed_point(self, rnd):
        w = rand_weights(rnd)
        s = _fixed_point_sample(w, 0.25, 0.75)
        g = gradient(w, s)
        assert all(v == 0.0 for v in g.flat())

    def test_matches_central_finite_differences(self, rnd):
        h = 1e-6
        for _ in range(20):
            w = rand_weights(rnd)
            s = rand_sample(rnd)
            g = gradient(w, s).flat()
            flat = list(w.flat())
            for i in range(17):
                plus = list(flat)
                minus = list(flat)
                plus[i] += h
                minus[i] -= h
                fd = (_loss(ModelWeights.from_flat(plus), s)
                      - _loss(ModelWeights.from_flat(minus), s)) / (2 * h)
                err = abs(g[i] - fd)
                assert err <= max(1e-6 * abs(fd), 1e-10), f"entry {i}: {g[i]} vs {fd}"

    def test_deterministic(self, rnd):
        w = rand_weights(rnd)
        s = rand_sample(rnd)
        assert weight_bits(gradient(w, s)) == weight_bits(gradient(w, s))


def _loss(w: ModelWeights, s: Sample) -> float:
    """E = 1/2 sum_k (o_k - t_k)^2, the quantity gradient() differentiates."""
    from fedsim.ann import _forward_pass

    _, out = _forward_pass(w, s.input)
    return 0.5 * sum((o - t) ** 2 for o, t in zip(out, s.target))


class TestTrainBatch:
    def test_empty_batch_is_identity(self, rnd):
        w = rand_weights(rnd)
        errors, w2 = train_batch([], w, GradientMode.CHAINED)
        assert errors == []
        assert_weights_identical(w, w2)

    def test_single_sample_equals_train_epoch(self, rnd):
        w = rand_weights(rnd)
        s = rand_sample(rnd)
        errors, w2 = train_batch([s], w, GradientMode.CHAINED)
        d, w3 = train_epoch(s, w, GradientMode.CHAINED)
        assert errors == [d]
        assert_weights_identical(w2, w3)

    def test_batch_is_fold_of_epochs(self, rnd):
        w = rand_weights(rnd)
        batch = [rand_sample(rnd) for _ in range(8)]
        errors, w_batch = train_batch(batch, w, GradientMode.CHAINED)
        w_fold = w
        fold_errors = []
        for s in batch:
            d, w_fold = train_epoch(s, w_fold, GradientMode.CHAINED)
            fold_errors.append(d)
        assert errors == fold_errors
        assert_weights_identical(w_batch, w_fold)

    def test_batch_matches_reference(self, rnd):
        w = rand_weights(rnd)
        batch = [rand_sample(rnd) for _ in range(16)]
        errors, w2 = train_batch(batch, w, GradientMode.CHAINED)
        ref_errors, ref_w2 = reference_train_batch(batch, w)
        assert errors == ref_errors
        assert_weights_identical(w2, ref_w2)


class TestMse:
    def test_zero_at_fixed_point(self, rnd):
        w = rand_weights(rnd)
        samples = [_fixed_point_sample(w, rnd.random(), rnd.random()) for _ in range(5)]
        assert mse(w, samples) == 0.0

    def test_saturated_outputs_give_unit_error(self):
        # huge bias weights drive every sigmoid to exactly 1.0 in binary64
        w = ModelWeights.from_flat([0, 0, 50, 0, 0, 50, 0, 0, 50, 0, 0, 0, 50, 0, 0, 0, 50])
        s = Sample(input=(0.1, 0.9), target=(0.0, 0.0))
        assert mse(w, [s]) == 1.0

    def test_permutation_invariant(self, rnd):
        w = rand_weights(rnd)
        samples = [rand_sample(rnd) for _ in range(20)]
        shuffled = list(samples)
        rnd.shuffle(shuffled)
        assert mse(w, samples) == mse(w, shuffled)

    def test_finite_for_random_weights(self, rnd):
        for _ in range(20):
            w = rand_weights(rnd, -5.0, 5.0)
            s = [rand_sample(rnd) for _ in range(3)]
            assert math.isfinite(mse(w, s))

    def test_empty_rejected(self, rnd):
        with pytest.raises(ValueError):
            mse(rand_weights(rnd), [])


class TestModelWeights:
    def test_shape_enforced(self):
        with pytest.raises(ValueError):
            ModelWeights(w_input=((1.0, 2.0),), w_hidden=((1.0,),))

    def test_finiteness_enforced(self):
        flat = [0.0] * 17
        flat[4] = math.inf
        with pytest.raises(ValueError):
            ModelWeights.from_flat(flat)

    def test_flat_round_trip(self, rnd):
        w = rand_weights(rnd)
        assert_weights_identical(w, ModelWeights.from_flat(w.flat()))

    def test_from_flat_length_check(self):
        with pytest.raises(ValueError):
            ModelWeights.from_flat([0.0] * 16)
