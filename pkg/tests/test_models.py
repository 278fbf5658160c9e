import numpy as np
import pytest

from senscommon.models import (
    LogisticRegressionModel,
    LstmClassifier,
    MemoryInstance,
    MemoryNetwork,
    ModelConfig,
    build_vocab,
    grad_check,
    load_checkpoint,
    logreg_train,
    lstm_encode,
    lstm_train,
    memnet_forward,
    memnet_train,
    random_instance_check,
    save_checkpoint,
)
from senscommon.models.common import DegenerateLabelsError
from senscommon.models.lstm import lstm_params


def separable_1d(n=40, margin=1.0):
    xs = []
    ys = []
    for k in range(n // 2):
        xs.append(np.array([-(margin + 0.1 * k)]))
        ys.append(0)
        xs.append(np.array([margin + 0.1 * k]))
        ys.append(1)
    return list(zip(xs, ys))


class TestLogreg:
    def test_separable_toy_reaches_99pct(self):
        data = separable_1d()
        config = ModelConfig(family="logreg", learning_rate=0.5, epochs=200, seed=3)
        model, trained = logreg_train(data, config)
        correct = sum(1 for x, y in data if model.predict(x) == y)
        assert correct / len(data) >= 0.99
        assert len(trained.training_history) == 200

    def test_zero_init_predicts_half(self):
        model = LogisticRegressionModel(5, 2)  # zero weights, untrained
        for _ in range(3):
            p = model.predict_proba(np.random.default_rng(1).normal(size=5))
            np.testing.assert_allclose(p, [0.5, 0.5])

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            model = LogisticRegressionModel(6, 3, rng)
            x = rng.normal(size=6)
            y = int(rng.integers(3))
            assert grad_check(model, (x, y), eps=1e-4) < 1e-4

    def test_single_class_rejected(self):
        data = [(np.array([1.0]), 1), (np.array([2.0]), 1)]
        with pytest.raises(DegenerateLabelsError, match="degenerate"):
            logreg_train(data, ModelConfig(family="logreg", epochs=1))

    def test_ragged_features_rejected(self):
        data = [(np.array([1.0]), 0), (np.array([1.0, 2.0]), 1)]
        with pytest.raises(ValueError, match="inconsistent"):
            logreg_train(data, ModelConfig(family="logreg", epochs=1))

    def test_loss_non_increasing_at_small_lr(self):
        data = separable_1d()
        config = ModelConfig(family="logreg", learning_rate=0.01, epochs=60, seed=0)
        _, trained = logreg_train(data, config)
        h = trained.training_history
        assert all(h[i + 1] <= h[i] + 1e-12 for i in range(len(h) - 1))

    def test_bitwise_deterministic(self):
        data = separable_1d()
        config = ModelConfig(family="logreg", learning_rate=0.1, epochs=20, seed=11)
        m1, t1 = logreg_train(data, config)
        m2, t2 = logreg_train(data, config)
        for k in m1.params:
            np.testing.assert_array_equal(m1.params[k], m2.params[k])
        assert t1.training_history == t2.training_history


class TestLstmEncoder:
    def test_zero_parameters_give_zero_vector(self):
        params = lstm_params(input_dim=4, hidden=3)
        rng = np.random.default_rng(2)
        for _ in range(5):
            seq = rng.normal(size=(int(rng.integers(1, 6)), 4))
            np.testing.assert_array_equal(lstm_encode(seq, params), np.zeros(3))

    def test_hand_computed_single_step(self):
        # integer weights pushed through the gate equations by hand:
        # z_i=[1,-1] z_f=[0,0] z_o=[-1,1] z_g=[1,0]
        # c = sigmoid(z_i)*tanh(z_g) = [0.5567699411459397, 0.0]
        # h = sigmoid(z_o)*tanh(c)  = [0.1359705785714023, 0.0]
        params = {
            "w_x": np.array([
                [1, 0], [0, 1],   # input gate
                [1, 1], [0, 0],   # forget gate
                [0, 1], [1, 0],   # output gate
                [1, 0], [1, 1],   # candidate
            ], dtype=np.float64),
            "w_h": np.zeros((8, 2)),
            "b": np.zeros(8),
        }
        h = lstm_encode(np.array([[1.0, -1.0]]), params)
        np.testing.assert_allclose(h, [0.1359705785714023, 0.0], atol=1e-6)

    def test_output_length_equals_hidden_size(self):
        rng = np.random.default_rng(5)
        for h in (1, 3, 7):
            params = lstm_params(4, h, rng)
            out = lstm_encode(rng.normal(size=(3, 4)), params)
            assert out.shape == (h,)

    def test_empty_sequence_rejected(self):
        params = lstm_params(4, 3)
        with pytest.raises(ValueError):
            lstm_encode(np.zeros((0, 4)), params)

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(23)
        model = LstmClassifier(3, 4, 2, rng)
        seq = rng.normal(size=(3, 3))
        assert grad_check(model, ((seq,), 1), eps=1e-4) < 1e-4

    def test_two_channel_gradients(self):
        rng = np.random.default_rng(29)
        model = LstmClassifier(3, 3, 2, rng, channels=2)
        example = ((rng.normal(size=(2, 3)), rng.normal(size=(4, 3))), 0)
        assert grad_check(model, example, eps=1e-4) < 1e-4

    def test_learns_cluster_rule(self):
        rng = np.random.default_rng(31)
        data = []
        for _ in range(60):
            y = int(rng.integers(2))
            mean = 1.5 if y else -1.5
            seq = rng.normal(mean, 0.3, size=(2, 4))
            data.append(((seq,), y))
        config = ModelConfig(family="lstm_encoder", hidden_size=6,
                             learning_rate=0.2, epochs=60, seed=1)
        model, _ = lstm_train(data, config)
        acc = sum(1 for seqs, y in data if model.predict(seqs) == y) / len(data)
        assert acc >= 0.95


class TestMemoryNetwork:
    def hand_model(self):
        model = MemoryNetwork(vocab_size=4, embed_dim=2, n_classes=2, hops=1,
                              vocab={"<unk>": 0, "a": 1, "b": 2, "q": 3})
        model.params["emb_0"] = np.array([[0, 0], [1, 1], [0, 2], [1, 0]], dtype=np.float64)
        model.params["emb_1"] = np.array([[0, 0], [2, 0], [0, 2], [0, 0]], dtype=np.float64)
        model.params["w_out"] = np.eye(2)
        model.params["b_out"] = np.zeros(2)
        return model

    def test_single_slot_attention_is_one(self):
        rng = np.random.default_rng(3)
        model = MemoryNetwork(5, 4, 2, hops=3, rng=rng)
        _, attns = model.forward([1, 2], [3])
        assert len(attns) == 3
        for p in attns:
            np.testing.assert_array_equal(p, [1.0])

    def test_identical_slots_uniform_attention(self):
        rng = np.random.default_rng(4)
        model = MemoryNetwork(5, 4, 2, hops=2, rng=rng)
        n = 6
        _, attns = model.forward([1], [2] * n)
        for p in attns:
            np.testing.assert_allclose(p, np.full(n, 1.0 / n), atol=1e-12)

    def test_hand_computed_one_hop(self):
        # worked by hand: attention softmax([1,0]) = [0.7310585786, 0.2689414214],
        # u' = [2.4621171573, 0.5378828427], output softmax -> [0.8726098712, 0.1273901288]
        model = self.hand_model()
        probs, attns = model.forward([3], [1, 2])
        np.testing.assert_allclose(attns[0], [0.7310585786300049, 0.2689414213699951], atol=1e-6)
        np.testing.assert_allclose(probs, [0.8726098711649092, 0.12739012883509082], atol=1e-6)

    def test_distributions_normalized(self):
        rng = np.random.default_rng(6)
        model = MemoryNetwork(20, 8, 3, hops=2, rng=rng)
        for _ in range(50):
            q = rng.integers(0, 20, size=2).tolist()
            m = rng.integers(0, 20, size=int(rng.integers(1, 12))).tolist()
            probs, attns = model.forward(q, m)
            assert abs(probs.sum() - 1.0) < 1e-6
            for p in attns:
                assert abs(p.sum() - 1.0) < 1e-6

    def test_zero_memory_slots_rejected(self):
        model = MemoryNetwork(5, 4, 2, hops=1, rng=np.random.default_rng(0))
        with pytest.raises(ValueError, match="zero memory"):
            model.forward([1], [])
        with pytest.raises(ValueError):
            MemoryInstance(query_words=("a",), memory_words=())

    def test_learns_keyword_rule(self):
        # label decided by the presence of one distinguishing memory word
        rng = np.random.default_rng(12)
        fillers = ["door", "wall", "floor", "glass", "window", "shelf"]
        instances = []
        for i in range(20):
            has_alarm = i % 2 == 0
            mems = list(rng.choice(fillers, size=3))
            if has_alarm:
                mems[int(rng.integers(3))] = "alarm"
            instances.append(MemoryInstance(
                query_words=(str(rng.choice(fillers)), str(rng.choice(fillers))),
                memory_words=tuple(mems),
                label=int(has_alarm),
            ))
        config = ModelConfig(family="memnet", hops=1, embed_dim=16,
                             learning_rate=0.2, epochs=100, seed=2)
        model, _ = memnet_train(instances, config)
        acc = sum(1 for inst in instances if model.predict(inst) == inst.label) / len(instances)
        assert acc >= 0.95

    def test_hops_compared_side_by_side(self):
        rng = np.random.default_rng(13)
        instances = []
        for i in range(24):
            y = i % 2
            mems = ("ping",) if y else ("pong", "pad")
            instances.append(MemoryInstance(("q1", "q2"), mems, label=y))
        accs = {}
        for k in (1, 3):
            config = ModelConfig(family="memnet", hops=k, embed_dim=8,
                                 learning_rate=0.2, epochs=50, seed=9)
            model, _ = memnet_train(instances, config)
            probs, attns = memnet_forward(instances[0], model)
            assert abs(probs.sum() - 1.0) < 1e-6
            assert len(attns) == k
            accs[k] = sum(1 for i in instances if model.predict(i) == i.label) / len(instances)
        print(f"memnet accuracy by hop count: {accs}")

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(14)
        model = MemoryNetwork(8, 4, 3, hops=2, rng=rng)
        example = (([1, 2], [3, 4, 5, 1]), 2)
        assert grad_check(model, example, eps=1e-4) < 1e-4

    def test_unknown_words_share_unk_id(self):
        instances = [
            MemoryInstance(("a",), ("x", "y"), label=0),
            MemoryInstance(("b",), ("y", "z"), label=1),
        ]
        vocab = build_vocab(instances)
        assert vocab["<unk>"] == 0
        config = ModelConfig(family="memnet", hops=1, embed_dim=4,
                             learning_rate=0.1, epochs=2, seed=0)
        model, _ = memnet_train(instances, config)
        novel = MemoryInstance(("never-seen",), ("also-new",))
        probs = model.predict_proba(novel)
        assert abs(probs.sum() - 1.0) < 1e-6

    def test_memory_capacity_truncates(self):
        config = ModelConfig(family="memnet", hops=1, embed_dim=4, memory_capacity=3,
                             learning_rate=0.1, epochs=1, seed=0)
        instances = [
            MemoryInstance(("a",), tuple(f"w{i}" for i in range(10)), label=0),
            MemoryInstance(("b",), ("w0",), label=1),
        ]
        model, _ = memnet_train(instances, config)
        _, attns = memnet_forward(instances[0], model)
        assert attns[0].shape == (3,)


class TestGradCheckHarness:
    @pytest.mark.parametrize("family", ["logreg", "lstm_encoder", "memnet"])
    def test_random_instances(self, family):
        for seed in range(3):
            assert random_instance_check(family, seed=seed, eps=1e-4) < 1e-4

    def test_eps_bounds(self):
        with pytest.raises(ValueError):
            random_instance_check("logreg", seed=0, eps=1e-2)


class TestCheckpoints:
    def test_roundtrip(self, tmp_path):
        instances = [
            MemoryInstance(("a",), ("x", "y"), label=0),
            MemoryInstance(("b",), ("y",), label=1),
        ]
        config = ModelConfig(family="memnet", hops=2, embed_dim=4,
                             learning_rate=0.1, epochs=3, seed=5)
        model, trained = memnet_train(instances, config)
        trained.classes = ["negative", "positive"]
        path = tmp_path / "model.json"
        save_checkpoint(trained, path)
        loaded = load_checkpoint(path)
        assert loaded.config == config
        assert loaded.classes == ["negative", "positive"]
        assert loaded.vocab == trained.vocab
        for k in trained.parameters:
            np.testing.assert_array_equal(loaded.parameters[k], trained.parameters[k])
        assert loaded.training_history == trained.training_history

    def test_rejects_junk(self, tmp_path):
        p = tmp_path / "junk.json"
        p.write_text('{"v": 2}', encoding="utf-8")
        with pytest.raises(ValueError):
            load_checkpoint(p)
