"""Shared model plumbing: config, SGD loop, gradient checker, checkpoints.

All parameters live in float64; every model exposes a ``params`` dict of
named arrays plus ``loss(example)`` and ``loss_and_grads(example)``, which
is all the trainer and the finite-difference checker need.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

FAMILIES = ("logreg", "lstm_encoder", "memnet")
INIT_SCALE = 0.1  # uniform [-0.1, 0.1] initialization


class DegenerateLabelsError(ValueError):
    """Training data with fewer than 2 classes present."""


@dataclass(frozen=True)
class ModelConfig:
    family: str
    feature_mode: str | None = None
    hidden_size: int = 50
    hops: int = 1
    memory_capacity: int = 30
    embed_dim: int = 32
    learning_rate: float = 0.1
    epochs: int = 200
    seed: int = 0
    n_classes: int = 2

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")
        if self.hidden_size < 1:
            raise ValueError("hidden_size must be >= 1")
        if self.hops < 1:
            raise ValueError("hops must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.n_classes not in (2, 3):
            raise ValueError("n_classes must be 2 or 3")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, rec: dict) -> "ModelConfig":
        return cls(**rec)


@dataclass
class TrainedModel:
    config: ModelConfig
    parameters: dict[str, np.ndarray]
    training_history: list[float]
    classes: list[str] = field(default_factory=list)
    vocab: dict[str, int] | None = None
    relation: str = ""

    def __post_init__(self) -> None:
        if len(self.training_history) != self.config.epochs:
            raise ValueError("history length must equal the configured epoch count")


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - np.max(z)
    e = np.exp(z)
    return e / e.sum()


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def log_loss(logits: np.ndarray, label: int) -> float:
    m = np.max(logits)
    return float(m + np.log(np.exp(logits - m).sum()) - logits[label])


def init_uniform(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)


def check_labels(labels: Sequence[int]) -> None:
    if len(set(labels)) < 2:
        raise DegenerateLabelsError("degenerate labels: need at least 2 classes in the data")


def sgd_train(model, examples: Sequence, config: ModelConfig, rng: np.random.Generator) -> list[float]:
    """Plain per-example SGD with per-epoch reshuffling from the run seed."""
    history = []
    n = len(examples)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for idx in order:
            loss, grads = model.loss_and_grads(examples[idx])
            if not np.isfinite(loss):
                raise FloatingPointError("non-finite training loss")
            for name, g in grads.items():
                model.params[name] -= config.learning_rate * g
            total += loss
        history.append(total / max(1, n))
    return history


def grad_check(model, example, eps: float = 1e-4) -> float:
    """Worst relative error between analytic and central-difference gradients.

    Perturbs every parameter entry: (f(th+eps) - f(th-eps)) / 2 eps against
    the analytic gradient, error scaled by max(|a| + |n|, 1e-8).
    """
    if not (1e-6 <= eps <= 1e-3):
        raise ValueError("eps must lie in [1e-6, 1e-3]")
    base, grads = model.loss_and_grads(example)
    if not np.isfinite(base):
        raise FloatingPointError("non-finite loss")
    worst = 0.0
    for name, arr in model.params.items():
        analytic = grads.get(name)
        aflat = None if analytic is None else analytic.ravel()
        flat = arr.ravel()
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + eps
            lp = model.loss(example)
            flat[i] = keep - eps
            lm = model.loss(example)
            flat[i] = keep
            numeric = (lp - lm) / (2.0 * eps)
            a = 0.0 if aflat is None else float(aflat[i])
            err = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
            if err > worst:
                worst = err
    return worst


def random_instance_check(family: str, seed: int, eps: float = 1e-4) -> float:
    """grad_check on a small random model + instance of the given family."""
    from .logreg import LogisticRegressionModel
    from .lstm import LstmClassifier
    from .memnet import MemoryNetwork

    rng = np.random.default_rng(seed)
    n_classes = int(rng.integers(2, 4))
    if family == "logreg":
        d = int(rng.integers(3, 9))
        model = LogisticRegressionModel(d, n_classes, rng)
        x = rng.normal(size=d)
        return grad_check(model, (x, int(rng.integers(n_classes))), eps)
    if family == "lstm_encoder":
        d = int(rng.integers(2, 6))
        h = int(rng.integers(2, 6))
        channels = int(rng.integers(1, 3))
        model = LstmClassifier(d, h, n_classes, rng, channels=channels)
        seqs = tuple(
            rng.normal(size=(int(rng.integers(1, 5)), d)) for _ in range(channels)
        )
        return grad_check(model, (seqs, int(rng.integers(n_classes))), eps)
    if family.startswith("memnet"):
        hops = int(family.split(":")[1]) if ":" in family else int(rng.integers(1, 4))
        vocab_size = int(rng.integers(6, 12))
        model = MemoryNetwork(vocab_size, embed_dim=int(rng.integers(3, 7)),
                              n_classes=n_classes, hops=hops, rng=rng)
        q = rng.integers(0, vocab_size, size=int(rng.integers(1, 4))).tolist()
        m = rng.integers(0, vocab_size, size=int(rng.integers(1, 7))).tolist()
        return grad_check(model, ((q, m), int(rng.integers(n_classes))), eps)
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# checkpoints: JSON container with config + named tensors

def save_checkpoint(trained: TrainedModel, path: str | Path) -> None:
    rec: dict[str, Any] = {
        "v": 1,
        "kind": "senscommon-model",
        "config": trained.config.to_dict(),
        "classes": trained.classes,
        "vocab": trained.vocab,
        "relation": trained.relation,
        "history": trained.training_history,
        "parameters": {
            name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
            for name, arr in trained.parameters.items()
        },
    }
    Path(path).write_text(json.dumps(rec, sort_keys=True), encoding="utf-8")


def load_checkpoint(path: str | Path) -> TrainedModel:
    rec = json.loads(Path(path).read_text(encoding="utf-8"))
    if rec.get("kind") != "senscommon-model" or rec.get("v") != 1:
        raise ValueError(f"{path}: not a model checkpoint")
    params = {
        name: np.asarray(spec["data"], dtype=np.float64).reshape(spec["shape"])
        for name, spec in rec["parameters"].items()
    }
    return TrainedModel(
        config=ModelConfig.from_dict(rec["config"]),
        parameters=params,
        training_history=rec["history"],
        classes=rec.get("classes", []),
        vocab=rec.get("vocab"),
        relation=rec.get("relation", ""),
    )
