"""Single-layer LSTM encoder with a linear softmax head.

Gate layout in the fused weight matrices is [input; forget; output;
candidate], each block of size h. The encoder output is the final hidden
state; a classifier may run one encoder per input channel (e.g. shortest
path + sentence) and concatenate the encodings before the head.
"""

from __future__ import annotations

import numpy as np

from .common import (
    ModelConfig,
    TrainedModel,
    check_labels,
    init_uniform,
    log_loss,
    sgd_train,
    sigmoid,
    softmax,
)


def lstm_params(input_dim: int, hidden: int, rng: np.random.Generator | None = None, prefix: str = "") -> dict[str, np.ndarray]:
    shape_x = (4 * hidden, input_dim)
    shape_h = (4 * hidden, hidden)
    if rng is None:
        return {
            f"{prefix}w_x": np.zeros(shape_x),
            f"{prefix}w_h": np.zeros(shape_h),
            f"{prefix}b": np.zeros(4 * hidden),
        }
    return {
        f"{prefix}w_x": init_uniform(rng, shape_x),
        f"{prefix}w_h": init_uniform(rng, shape_h),
        f"{prefix}b": init_uniform(rng, (4 * hidden,)),
    }


def _forward(sequence: np.ndarray, w_x, w_h, b, hidden: int):
    h_prev = np.zeros(hidden)
    c_prev = np.zeros(hidden)
    caches = []
    for x in sequence:
        z = w_x @ x + w_h @ h_prev + b
        i = sigmoid(z[:hidden])
        f = sigmoid(z[hidden:2 * hidden])
        o = sigmoid(z[2 * hidden:3 * hidden])
        g = np.tanh(z[3 * hidden:])
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        caches.append((x, h_prev, c_prev, i, f, o, g, tc))
        h_prev, c_prev = h, c
    return h_prev, caches


def _backward(dh: np.ndarray, caches, w_h, hidden: int):
    dw_x = None
    dw_h = np.zeros_like(w_h)
    db = np.zeros(4 * hidden)
    dc = np.zeros(hidden)
    for x, h_prev, c_prev, i, f, o, g, tc in reversed(caches):
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_next = dc * f
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            do * o * (1.0 - o),
            dg * (1.0 - g * g),
        ])
        if dw_x is None:
            dw_x = np.zeros((4 * hidden, x.shape[0]))
        dw_x += np.outer(dz, x)
        dw_h += np.outer(dz, h_prev)
        db += dz
        dh = w_h.T @ dz
        dc = dc_next
    return dw_x, dw_h, db


def lstm_encode(sequence, params: dict[str, np.ndarray], prefix: str = "") -> np.ndarray:
    """Final hidden state of the LSTM over a non-empty vector sequence."""
    seq = np.asarray(sequence, dtype=np.float64)
    if seq.ndim != 2 or seq.shape[0] == 0:
        raise ValueError("sequence must be a non-empty list of vectors")
    w_x = params[f"{prefix}w_x"]
    w_h = params[f"{prefix}w_h"]
    hidden = w_h.shape[1]
    if seq.shape[1] != w_x.shape[1]:
        raise ValueError(f"input dim {seq.shape[1]} does not match parameters ({w_x.shape[1]})")
    h, _ = _forward(seq, w_x, w_h, params[f"{prefix}b"], hidden)
    return h


class LstmClassifier:
    """One LSTM per channel, concatenated encodings, softmax head.

    An example is ((seq_1, .., seq_C), class index); each seq is (T, d).
    """

    def __init__(self, input_dim: int, hidden: int, n_classes: int,
                 rng: np.random.Generator | None = None, channels: int = 1):
        self.input_dim = input_dim
        self.hidden = hidden
        self.n_classes = n_classes
        self.channels = channels
        self.params: dict[str, np.ndarray] = {}
        for c in range(channels):
            self.params.update(lstm_params(input_dim, hidden, rng, prefix=f"c{c}_"))
        if rng is None:
            self.params["w_out"] = np.zeros((n_classes, channels * hidden))
            self.params["b_out"] = np.zeros(n_classes)
        else:
            self.params["w_out"] = init_uniform(rng, (n_classes, channels * hidden))
            self.params["b_out"] = init_uniform(rng, (n_classes,))

    def _norm_input(self, seqs):
        if isinstance(seqs, np.ndarray) and seqs.ndim == 2:
            seqs = (seqs,)
        if len(seqs) != self.channels:
            raise ValueError(f"expected {self.channels} input channels, got {len(seqs)}")
        return [np.asarray(s, dtype=np.float64) for s in seqs]

    def encode(self, seqs) -> np.ndarray:
        parts = [
            lstm_encode(seq, self.params, prefix=f"c{c}_")
            for c, seq in enumerate(self._norm_input(seqs))
        ]
        return np.concatenate(parts)

    def logits(self, seqs) -> np.ndarray:
        return self.params["w_out"] @ self.encode(seqs) + self.params["b_out"]

    def predict_proba(self, seqs) -> np.ndarray:
        return softmax(self.logits(seqs))

    def predict(self, seqs) -> int:
        return int(np.argmax(self.logits(seqs)))

    def loss(self, example) -> float:
        seqs, y = example
        return log_loss(self.logits(seqs), y)

    def loss_and_grads(self, example):
        seqs, y = example
        seqs = self._norm_input(seqs)
        encs = []
        caches = []
        for c, seq in enumerate(seqs):
            if seq.shape[0] == 0:
                raise ValueError("empty sequence")
            h, cache = _forward(seq, self.params[f"c{c}_w_x"], self.params[f"c{c}_w_h"],
                                self.params[f"c{c}_b"], self.hidden)
            encs.append(h)
            caches.append(cache)
        enc = np.concatenate(encs)
        logits = self.params["w_out"] @ enc + self.params["b_out"]
        probs = softmax(logits)
        loss = log_loss(logits, y)

        dlogits = probs.copy()
        dlogits[y] -= 1.0
        grads = {
            "w_out": np.outer(dlogits, enc),
            "b_out": dlogits,
        }
        denc = self.params["w_out"].T @ dlogits
        for c in range(self.channels):
            dh = denc[c * self.hidden:(c + 1) * self.hidden]
            dw_x, dw_h, db = _backward(dh, caches[c], self.params[f"c{c}_w_h"], self.hidden)
            grads[f"c{c}_w_x"] = dw_x
            grads[f"c{c}_w_h"] = dw_h
            grads[f"c{c}_b"] = db
        return loss, grads


def lstm_train(dataset, config: ModelConfig, channels: int = 1) -> tuple[LstmClassifier, TrainedModel]:
    """Train the LSTM classifier on ((seq, ..), label) examples."""
    examples = []
    input_dim = None
    for seqs, y in dataset:
        if isinstance(seqs, np.ndarray) and seqs.ndim == 2:
            seqs = (seqs,)
        seqs = tuple(np.asarray(s, dtype=np.float64) for s in seqs)
        for s in seqs:
            if s.shape[0] == 0:
                raise ValueError("empty sequence in training data")
            if input_dim is None:
                input_dim = s.shape[1]
            elif s.shape[1] != input_dim:
                raise ValueError("inconsistent sequence dimensions")
        examples.append((seqs, int(y)))
    check_labels([y for _, y in examples])
    rng = np.random.default_rng(config.seed)
    model = LstmClassifier(input_dim, config.hidden_size, config.n_classes, rng, channels=channels)
    history = sgd_train(model, examples, config, rng)
    trained = TrainedModel(
        config=config,
        parameters={k: v.copy() for k, v in model.params.items()},
        training_history=history,
    )
    return model, trained
