"""Encoder behavior, optimizer arithmetic, checkpoint format."""
import numpy as np
import pytest

from envinv.nn import ops
from envinv.nn.checkpoint import MAGIC, load_checkpoint, save_checkpoint
from envinv.nn.encoder import (
    embedding_dim,
    init_encoder,
    init_predictor,
    predict_env_log_probs,
    tcn_encode,
)
from envinv.nn.optim import Adam
from envinv.nn.tensor import param


class TestEmbeddingDim:
    def test_formula_cases(self):
        # hand: round(0.1*144*2*2)=58; round(0.1*288*4)=115; round(0.1*144*2)=29
        assert embedding_dim(144, 2, 2) == 58
        assert embedding_dim(288, 2, 2) == 115
        assert embedding_dim(144, 1, 2) == 29

    def test_cap_at_256(self):
        assert embedding_dim(288, 5, 4) == 256

    def test_floor_at_one(self):
        assert embedding_dim(2, 1, 1) == 1


class TestEncoder:
    def test_rows_unit_norm(self):
        rng = np.random.default_rng(0)
        enc = init_encoder(3, 7, rng, channels=8, n_blocks=3)
        out = tcn_encode(enc, rng.standard_normal((5, 3, 40)))
        np.testing.assert_allclose(np.linalg.norm(out.values, axis=1), 1.0, atol=1e-12)

    def test_padding_with_lengths_is_exact(self):
        """A right-padded sample embeds like the same sample alone.

        Causal taps make the conv outputs bit-identical over the real extent;
        the pooled mean may differ by summation order, so allow a few ulp.
        """
        rng = np.random.default_rng(1)
        enc = init_encoder(2, 6, rng, channels=8, n_blocks=4)
        short = rng.standard_normal((1, 2, 23))
        padded = np.zeros((1, 2, 64))
        padded[:, :, :23] = short
        alone = tcn_encode(enc, short).values
        batched = tcn_encode(enc, padded, lengths=np.array([23])).values
        np.testing.assert_allclose(batched, alone, atol=1e-13)

    def test_rejects_wrong_channels(self):
        enc = init_encoder(3, 4, np.random.default_rng(0), channels=4, n_blocks=2)
        with pytest.raises(ValueError):
            tcn_encode(enc, np.zeros((1, 2, 10)))

    def test_depth_and_dilation_layout(self):
        enc = init_encoder(2, 4, np.random.default_rng(0))
        assert len(enc.conv_w) == 10
        assert enc.conv_w[0].shape == (32, 2, 3)
        assert all(w.shape == (32, 32, 3) for w in enc.conv_w[1:])
        assert enc.proj_w.shape == (4, 32)

    def test_predictor_log_probs_normalized(self):
        rng = np.random.default_rng(2)
        pred = init_predictor(emb_dim=6, n_env=3, n_buckets=5, rng=rng)
        emb = rng.standard_normal((4, 6))
        logp = predict_env_log_probs(pred, param(emb))
        assert logp.shape == (4, 3, 5)
        np.testing.assert_allclose(np.exp(logp.values).sum(axis=-1), 1.0, atol=1e-12)


class TestAdam:
    def test_first_step_hand_oracle(self):
        # constant gradient g: mhat=g, vhat=g^2, step = -lr*g/(|g|+eps)
        p = param(np.array([1.0, -2.0]))
        opt = Adam([p], lr=0.1)
        p.grad = np.array([2.0, -4.0])
        opt.step()
        expect = np.array([1.0, -2.0]) - 0.1 * np.array([2.0, -4.0]) / (
            np.array([2.0, 4.0]) + 1e-8
        )
        np.testing.assert_allclose(p.values, expect, rtol=1e-12)

    def test_constant_gradient_two_steps(self):
        # with a constant gradient the bias-corrected step stays -lr*sign(g)
        p = param(np.array([0.0]))
        opt = Adam([p], lr=0.01)
        for _ in range(2):
            p.grad = np.array([3.0])
            opt.step()
        np.testing.assert_allclose(p.values, [-0.02 * 3.0 / (3.0 + 1e-8)], rtol=1e-9)

    def test_zero_grad(self):
        p = param(np.ones(3))
        opt = Adam([p], lr=0.1)
        p.grad = np.ones(3)
        opt.zero_grad()
        opt.step()
        np.testing.assert_array_equal(p.values, np.ones(3))

    def test_none_grad_treated_as_zero(self):
        p = param(np.ones(2))
        Adam([p], lr=0.1).step()
        np.testing.assert_array_equal(p.values, np.ones(2))

    def test_descends_quadratic(self):
        p = param(np.array([5.0]))
        opt = Adam([p], lr=0.05)
        for _ in range(400):
            opt.zero_grad()
            loss = ops.mean_all(ops.square(p))
            loss.backward()
            opt.step()
        assert abs(p.values[0]) < 1e-2


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        tensors = {
            "enc/block0/w": rng.standard_normal((4, 2, 3)),
            "adv/b": rng.standard_normal(7),
            "bins/env_0": rng.standard_normal(19),
        }
        meta = {"kind": "test", "emb_dim": 4, "nested": {"a": 1}}
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, meta, tensors)
        meta2, tensors2 = load_checkpoint(path)
        assert meta2 == meta
        assert set(tensors2) == set(tensors)
        for k in tensors:
            np.testing.assert_array_equal(tensors2[k], tensors[k])

    def test_bytes_stable_and_order_independent(self, tmp_path):
        rng = np.random.default_rng(4)
        a = rng.standard_normal(5)
        b = rng.standard_normal((2, 2))
        p1, p2 = tmp_path / "1.ckpt", tmp_path / "2.ckpt"
        save_checkpoint(p1, {"k": 1}, {"x": a, "y": b})
        save_checkpoint(p2, {"k": 1}, {"y": b, "x": a})
        assert p1.read_bytes() == p2.read_bytes()

    def test_magic_guard(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 32)
        with pytest.raises(ValueError):
            load_checkpoint(path)
        assert len(MAGIC) == 8
