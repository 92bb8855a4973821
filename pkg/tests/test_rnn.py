import math

import numpy as np
import pytest

from ascprobe import rnn
from ascprobe.corpus import EncodedCorpus, Vocabulary
from ascprobe.errors import CheckpointError, TokenOutOfRange

from rnn_helpers import finite_difference_max_rel_err, random_encoded, scalar_cell_oracle


def tiny_config(**kw):
    defaults = dict(
        vocab_size=8, embedding_dim=3, hidden1=4, hidden2=4, max_seq_len=5,
        init_scale=0.1, rng_seed=0,
    )
    defaults.update(kw)
    return rnn.ModelConfig(**defaults)


class TestInit:
    def test_deterministic(self):
        a = rnn.init_params(tiny_config())
        b = rnn.init_params(tiny_config())
        for k, arr in a.tensors().items():
            assert np.array_equal(arr, b.tensors()[k]), k

    def test_shapes(self):
        cfg = rnn.ModelConfig(vocab_size=6, embedding_dim=4, hidden1=8, hidden2=8,
                              max_seq_len=4)
        p = rnn.init_params(cfg)
        assert p.embedding.shape == (6, 4)
        assert p.w1.shape == (4, 32) and p.u1.shape == (8, 32)
        assert p.w_out.shape == (8, 6) and p.b_out.shape == (6,)

    def test_bounds_and_forget_bias(self):
        p = rnn.init_params(tiny_config(init_scale=0.1))
        for name in ("embedding", "w1", "u1", "w2", "u2", "w_out"):
            assert np.abs(p.tensors()[name]).max() <= 0.1
        h = 4
        assert np.array_equal(p.b1[h : 2 * h], np.ones(h))
        assert np.array_equal(p.b1[:h], np.zeros(h))
        assert np.array_equal(p.b1[2 * h :], np.zeros(2 * h))
        assert np.array_equal(p.b_out, np.zeros(8))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            rnn.ModelConfig(vocab_size=2)
        with pytest.raises(ValueError):
            rnn.ModelConfig(vocab_size=5, init_scale=0.0)


class TestCell:
    def test_zero_params_closed_form(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(3, 2))
        c_prev = rng.normal(size=(3, 4))
        h_prev = rng.normal(size=(3, 4))
        w = np.zeros((2, 16))
        u = np.zeros((4, 16))
        b = np.zeros(16)
        h, c = rnn.lstm_cell_step(x, h_prev, c_prev, w, u, b)
        assert np.allclose(c, 0.5 * c_prev, atol=1e-15)
        assert np.allclose(h, 0.5 * np.tanh(0.5 * c_prev), atol=1e-15)

    def test_zero_fixed_point(self):
        w = np.zeros((2, 16))
        u = np.zeros((4, 16))
        b = np.zeros(16)
        b[4:8] = 1.0
        h, c = rnn.lstm_cell_step(np.zeros((1, 2)), np.zeros((1, 4)),
                                  np.zeros((1, 4)), w, u, b)
        assert np.array_equal(c, np.zeros((1, 4)))
        assert np.array_equal(h, np.zeros((1, 4)))

    def test_matches_scalar_loop_oracle(self):
        rng = np.random.default_rng(13)
        e, h = 3, 2
        x = rng.normal(size=(1, e))
        h_prev = rng.normal(size=(1, h))
        c_prev = rng.normal(size=(1, h))
        w = rng.normal(size=(e, 4 * h))
        u = rng.normal(size=(h, 4 * h))
        b = rng.normal(size=4 * h)
        got_h, got_c = rnn.lstm_cell_step(x, h_prev, c_prev, w, u, b)
        ref_h, ref_c = scalar_cell_oracle(x[0], h_prev[0], c_prev[0], w, u, b)
        assert np.abs(got_h[0] - ref_h).max() < 1e-12
        assert np.abs(got_c[0] - ref_c).max() < 1e-12

    def test_gate_ranges(self):
        rng = np.random.default_rng(2)
        h, c = rnn.lstm_cell_step(
            rng.normal(size=(5, 3)) * 10, rng.normal(size=(5, 4)),
            rng.normal(size=(5, 4)), rng.normal(size=(3, 16)),
            rng.normal(size=(4, 16)), rng.normal(size=16),
        )
        assert np.isfinite(h).all() and np.isfinite(c).all()
        assert np.abs(h).max() < 1.0  # |o * tanh(c)| < 1


class TestForward:
    def test_all_pad_row(self):
        p = rnn.init_params(tiny_config())
        tokens = np.zeros((1, 5), dtype=np.int64)
        mask = np.zeros((1, 5), dtype=bool)
        fwd = rnn.forward(p, tokens, mask)
        assert np.array_equal(fwd.h1, np.zeros((1, 5, 4)))
        assert np.array_equal(fwd.h2, np.zeros((1, 5, 4)))
        expected = rnn.softmax(p.b_out[None, :])[0]
        for t in range(5):
            assert np.array_equal(fwd.probs[0, t], expected)

    def test_probs_normalized(self):
        p = rnn.init_params(tiny_config(rng_seed=3))
        enc = random_encoded(seed=4, n=6, t=5, vocab=8)
        fwd = rnn.forward(p, enc.tokens, enc.mask)
        sums = fwd.probs.sum(axis=2)
        assert np.abs(sums - 1.0).max() < 1e-9
        assert fwd.probs.min() >= 0.0

    def test_token_out_of_range(self):
        p = rnn.init_params(tiny_config())
        tokens = np.array([[1, 2, 9, 0, 0]])
        mask = np.array([[True, True, True, False, False]])
        with pytest.raises(TokenOutOfRange):
            rnn.forward(p, tokens, mask)

    def test_truncation_equivalence(self):
        p = rnn.init_params(tiny_config(rng_seed=5))
        tokens = np.array([[3, 5, 2, 0, 0]])
        mask = np.array([[True, True, True, False, False]])
        full = rnn.forward(p, tokens, mask)
        short = rnn.forward(p, tokens[:, :3], mask[:, :3])
        for name in ("emb", "h1", "c1", "h2", "c2", "probs"):
            assert np.array_equal(getattr(full, name)[:, :3], getattr(short, name)), name

    def test_forward_row_view(self):
        p = rnn.init_params(tiny_config())
        acts = rnn.forward_row(p, [2, 3, 4], [True, True, True])
        assert acts.h1.shape == (3, 4) and acts.probs.shape == (3, 8)


class TestLoss:
    def test_uniform_predictions(self):
        v, b, t = 50, 2, 4
        probs = np.full((b, t, v), 1.0 / v)
        tokens = np.ones((b, t), dtype=np.int64)
        mask = np.ones((b, t), dtype=bool)
        got = rnn.loss_from_probs(probs, tokens, mask)
        assert abs(got - math.log(50.0)) < 1e-12

    def test_perfect_predictions_near_zero(self):
        tokens = np.array([[2, 3, 4]])
        mask = np.ones((1, 3), dtype=bool)
        probs = np.zeros((1, 3, 8))
        probs[0, 0, 3] = 1.0
        probs[0, 1, 4] = 1.0
        probs[0, 2, 0] = 1.0  # position without target; value irrelevant
        assert rnn.loss_from_probs(probs, tokens, mask) == 0.0

    def test_all_pad_sentence_contributes_zero(self):
        p = rnn.init_params(tiny_config(rng_seed=6))
        tokens = np.array([[2, 3, 4, 5, 0], [0, 0, 0, 0, 0]])
        mask = np.array([[1, 1, 1, 1, 0], [0, 0, 0, 0, 0]], dtype=bool)
        both = rnn.loss(p, tokens, mask)
        real = rnn.loss(p, tokens[:1], mask[:1])
        assert both == real

    def test_no_targets_gives_zero(self):
        p = rnn.init_params(tiny_config())
        tokens = np.array([[2, 0, 0, 0, 0]])
        mask = np.array([[1, 0, 0, 0, 0]], dtype=bool)
        assert rnn.loss(p, tokens, mask) == 0.0


class TestBackward:
    def test_finite_differences_small_model(self):
        err = finite_difference_max_rel_err(seed=0, n_sentences=3)
        assert err < 1e-4

    def test_all_pad_targets_zero_gradients(self):
        p = rnn.init_params(tiny_config())
        tokens = np.array([[3, 0, 0, 0, 0]])
        mask = np.array([[1, 0, 0, 0, 0]], dtype=bool)
        fwd = rnn.forward(p, tokens, mask, want_cache=True)
        grads = rnn.backward(p, fwd, tokens, mask)
        for name, g in grads.items():
            assert np.array_equal(g, np.zeros_like(g)), name

    def test_duplicated_sentence_normalizes_out(self):
        p = rnn.init_params(tiny_config(rng_seed=7))
        tokens = np.array([[2, 5, 3, 7, 0]])
        mask = np.array([[1, 1, 1, 1, 0]], dtype=bool)
        single = rnn.backward(p, rnn.forward(p, tokens, mask, want_cache=True),
                              tokens, mask)
        doubled_tokens = np.repeat(tokens, 2, axis=0)
        doubled_mask = np.repeat(mask, 2, axis=0)
        doubled = rnn.backward(
            p, rnn.forward(p, doubled_tokens, doubled_mask, want_cache=True),
            doubled_tokens, doubled_mask,
        )
        for name in single:
            assert np.allclose(single[name], doubled[name], rtol=1e-12, atol=1e-15)


class TestPaddingInertness:
    def test_activations_loss_gradients(self):
        p = rnn.init_params(tiny_config(rng_seed=8))
        rng = np.random.default_rng(9)
        for _ in range(20):
            length = int(rng.integers(2, 6))
            pad = int(rng.integers(1, 11))
            row = rng.integers(2, 8, size=length)
            tokens = row[None, :].astype(np.int64)
            mask = np.ones((1, length), dtype=bool)
            padded_tokens = np.concatenate(
                [tokens, np.zeros((1, pad), dtype=np.int64)], axis=1
            )
            padded_mask = np.concatenate(
                [mask, np.zeros((1, pad), dtype=bool)], axis=1
            )
            base_fwd = rnn.forward(p, tokens, mask, want_cache=True)
            pad_fwd = rnn.forward(p, padded_tokens, padded_mask, want_cache=True)
            for name in ("emb", "h1", "c1", "h2", "c2", "probs"):
                assert np.array_equal(
                    getattr(pad_fwd, name)[:, :length], getattr(base_fwd, name)
                ), name
            assert rnn.loss_from_probs(pad_fwd.probs, padded_tokens, padded_mask) == \
                rnn.loss_from_probs(base_fwd.probs, tokens, mask)
            g0 = rnn.backward(p, base_fwd, tokens, mask)
            g1 = rnn.backward(p, pad_fwd, padded_tokens, padded_mask)
            for name in g0:
                assert np.array_equal(g0[name], g1[name]), name


class TestTrain:
    def _data(self, n=40, seed=10):
        return random_encoded(seed=seed, n=n, t=5, vocab=8)

    def test_loss_decreases(self):
        p = rnn.init_params(tiny_config(rng_seed=11))
        data = self._data()
        _, history = rnn.train(
            p, data, rnn.TrainConfig(epochs=8, batch_size=8, shuffle_seed=1)
        )
        assert history[-1].train_loss < history[0].train_loss
        assert len(history) == 8

    def test_zero_learning_rate_is_identity(self):
        p = rnn.init_params(tiny_config(rng_seed=12))
        before = {k: v.copy() for k, v in p.tensors().items()}
        rnn.train(
            p, self._data(),
            rnn.TrainConfig(epochs=2, batch_size=8, learning_rate=0.0, shuffle_seed=2),
        )
        for k, arr in p.tensors().items():
            assert np.array_equal(arr, before[k]), k

    def test_bitwise_deterministic(self):
        data = self._data()
        cfg = rnn.TrainConfig(epochs=3, batch_size=8, shuffle_seed=3)
        p1, h1 = rnn.train(rnn.init_params(tiny_config(rng_seed=13)), data, cfg)
        p2, h2 = rnn.train(rnn.init_params(tiny_config(rng_seed=13)), data, cfg)
        for k in p1.tensors():
            assert np.array_equal(p1.tensors()[k], p2.tensors()[k]), k
        assert [s.train_loss for s in h1] == [s.train_loss for s in h2]

    def test_sgd_path(self):
        p = rnn.init_params(tiny_config(rng_seed=14))
        _, history = rnn.train(
            p, self._data(),
            rnn.TrainConfig(epochs=4, batch_size=8, optimizer="sgd",
                            learning_rate=0.5, shuffle_seed=4),
        )
        assert history[-1].train_loss < history[0].train_loss

    def test_val_metrics_recorded(self):
        p = rnn.init_params(tiny_config(rng_seed=15))
        _, history = rnn.train(
            p, self._data(), rnn.TrainConfig(epochs=2, batch_size=8, shuffle_seed=5),
            val_set=self._data(n=12, seed=16),
        )
        assert history[0].val_loss is not None
        assert 0.0 <= history[0].val_accuracy <= 1.0


class TestEvaluate:
    def test_chance_level_untrained(self):
        p = rnn.init_params(tiny_config(rng_seed=17))
        ev = rnn.evaluate(p, random_encoded(seed=18, n=50, t=5, vocab=8))
        assert 0.0 <= ev.accuracy < 0.6
        assert abs(ev.perplexity - math.exp(ev.loss)) < 1e-12

    def test_memorizer_hits_ceiling(self):
        # one sentence repeated; a few epochs should drive accuracy to 1
        tokens = np.tile(np.array([[2, 3, 4, 5, 6]], dtype=np.int64), (8, 1))
        mask = np.ones((8, 5), dtype=bool)
        vocab = Vocabulary(words=sorted("abcdefg"[:6]))
        data = EncodedCorpus(tokens=tokens, mask=mask,
                             labels=np.zeros(8, dtype=np.int64),
                             vocab=vocab, t_max=5)
        p = rnn.init_params(tiny_config(rng_seed=19))
        rnn.train(p, data, rnn.TrainConfig(epochs=200, batch_size=8,
                                           learning_rate=0.02, shuffle_seed=6))
        ev = rnn.evaluate(p, data)
        assert ev.accuracy == 1.0
        assert ev.perplexity < 1.5


class TestCheckpoint:
    def test_round_trip_bitwise(self, tmp_path):
        p = rnn.init_params(tiny_config(rng_seed=20))
        path = tmp_path / "model.ckpt"
        rnn.save_checkpoint(path, p, extra={"vocab_sha256": "ab" * 32})
        loaded, extra = rnn.load_checkpoint(path)
        assert extra == {"vocab_sha256": "ab" * 32}
        assert loaded.config == p.config
        for k in p.tensors():
            assert np.array_equal(loaded.tensors()[k], p.tensors()[k]), k

    def test_shape_mismatch_rejected(self, tmp_path):
        p = rnn.init_params(tiny_config())
        path = tmp_path / "model.ckpt"
        rnn.save_checkpoint(path, p)
        from ascprobe.container import load_container, save_container

        config, tensors = load_container(path)
        tensors["w1"] = tensors["w1"][:, :-1]
        save_container(path, "checkpoint", config, tensors)
        with pytest.raises(CheckpointError, match="shape"):
            rnn.load_checkpoint(path)

    def test_non_finite_rejected(self, tmp_path):
        p = rnn.init_params(tiny_config())
        p.w2[0, 0] = np.nan
        path = tmp_path / "model.ckpt"
        rnn.save_checkpoint(path, p)
        with pytest.raises(CheckpointError, match="non-finite"):
            rnn.load_checkpoint(path)
