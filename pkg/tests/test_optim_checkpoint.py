import json

import numpy as np
import pytest

from harlstm.errors import (
    CorruptChecksumError,
    ShapeMismatchError,
    VersionMismatchError,
)
from harlstm.nn import (
    AdamState,
    ModelDims,
    deserialize_checkpoint,
    init_params,
    load_checkpoint,
    optimizer_step,
    save_checkpoint,
    serialize_checkpoint,
    sgd_step,
)
from harlstm.windows import ClassMap


def params_of(seed=0, hidden=4, dtype=np.float64):
    return init_params(seed, ModelDims(3, hidden, 2), dtype=dtype)


class TestAdam:
    def test_zero_gradient_is_fixed_point(self):
        p = params_of(1)
        before = {n: t.copy() for n, t in p.named_tensors()}
        optimizer_step(p, p.zeros_like(), AdamState.zeros(p), lr=0.0025)
        for n, t in p.named_tensors():
            assert np.array_equal(t, before[n])

    def test_first_step_magnitude(self):
        # hand-evaluated: with g=1 the bias-corrected moments are both 1,
        # so the step is lr / (1 + eps)
        p = params_of(2)
        before = p.fc_b.copy()
        g = p.zeros_like()
        g.fc_b[:] = 1.0
        optimizer_step(p, g, AdamState.zeros(p), lr=0.0025)
        delta = before - p.fc_b
        assert np.allclose(delta, 0.0024999999750000006, atol=1e-15)

    def test_deterministic_trajectory(self):
        def run():
            p = params_of(3)
            state = AdamState.zeros(p)
            rng = np.random.default_rng(7)
            for _ in range(5):
                g = p.zeros_like()
                for _, t in g.named_tensors():
                    t += rng.normal(size=t.shape)
                optimizer_step(p, g, state, lr=0.01)
            return p

        a, b = run(), run()
        for (_, ta), (_, tb) in zip(a.named_tensors(), b.named_tensors()):
            assert ta.tobytes() == tb.tobytes()

    def test_shape_mismatch(self):
        p = params_of(4)
        g = params_of(4, hidden=5).zeros_like()
        with pytest.raises(ShapeMismatchError):
            optimizer_step(p, g, AdamState.zeros(p), lr=0.1)

    def test_sgd_plain_step(self):
        p = params_of(5)
        before = p.out_w.copy()
        g = p.zeros_like()
        g.out_w[:] = 2.0
        sgd_step(p, g, lr=0.1)
        assert np.allclose(before - p.out_w, 0.2, atol=1e-15)


class TestCheckpoint:
    def test_round_trip_bit_exact_f32(self, tmp_path):
        p = params_of(6, dtype=np.float32)
        path = tmp_path / "model.ckpt"
        save_checkpoint(p, path, class_map=ClassMap(("eating", "other"), 0), window_size=150)
        loaded = load_checkpoint(path)
        assert loaded["params"].dtype == np.float32
        assert loaded["window_size"] == 150
        assert loaded["class_map"].names == ("eating", "other")
        for (_, a), (_, b) in zip(p.named_tensors(), loaded["params"].named_tensors()):
            assert a.tobytes() == b.tobytes()

    def test_round_trip_bit_exact_f64_with_optimizer(self, tmp_path):
        p = params_of(7, dtype=np.float64)
        state = AdamState.zeros(p)
        g = p.zeros_like()
        g.fc_w[:] = 0.5
        optimizer_step(p, g, state, lr=0.01)
        path = tmp_path / "model.ckpt"
        save_checkpoint(p, path, optimizer_state=state)
        loaded = load_checkpoint(path)
        assert loaded["optimizer_state"].t == 1
        assert loaded["params"].dtype == np.float64
        for (_, a), (_, b) in zip(p.named_tensors(), loaded["params"].named_tensors()):
            assert a.tobytes() == b.tobytes()
        for name in loaded["optimizer_state"].m:
            assert loaded["optimizer_state"].m[name].tobytes() == state.m[name].tobytes()

    def test_save_is_deterministic(self):
        p = params_of(8, dtype=np.float32)
        assert serialize_checkpoint(p) == serialize_checkpoint(p)

    def test_truncated_file_rejected(self, tmp_path):
        p = params_of(9)
        path = tmp_path / "model.ckpt"
        save_checkpoint(p, path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(CorruptChecksumError):
            load_checkpoint(path)

    def test_bitflip_rejected(self, tmp_path):
        p = params_of(10)
        path = tmp_path / "model.ckpt"
        save_checkpoint(p, path)
        doc = json.loads(path.read_text())
        b64 = doc["tensors"]["fc.w"]["data"]
        doc["tensors"]["fc.w"]["data"] = b64[:-4] + ("AAAA" if b64[-4:] != "AAAA" else "BBBB")
        path.write_text(json.dumps(doc))
        with pytest.raises(CorruptChecksumError):
            load_checkpoint(path)

    def test_future_version_rejected(self, tmp_path):
        p = params_of(11)
        path = tmp_path / "model.ckpt"
        save_checkpoint(p, path)
        doc = json.loads(path.read_text())
        doc["version"] = 2
        path.write_text(json.dumps(doc))
        with pytest.raises(VersionMismatchError):
            load_checkpoint(path)

    def test_not_a_checkpoint(self):
        with pytest.raises(CorruptChecksumError):
            deserialize_checkpoint('{"format": "something-else"}')
