"""Multinomial logistic regression over fixed feature vectors."""

from __future__ import annotations

import numpy as np

from .common import (
    ModelConfig,
    TrainedModel,
    check_labels,
    init_uniform,
    log_loss,
    sgd_train,
    softmax,
)


class LogisticRegressionModel:
    """Softmax regression; an example is (feature vector, class index)."""

    def __init__(self, n_features: int, n_classes: int, rng: np.random.Generator | None = None):
        self.n_features = n_features
        self.n_classes = n_classes
        if rng is None:
            self.params = {
                "w": np.zeros((n_classes, n_features)),
                "b": np.zeros(n_classes),
            }
        else:
            self.params = {
                "w": init_uniform(rng, (n_classes, n_features)),
                "b": init_uniform(rng, (n_classes,)),
            }

    def logits(self, x: np.ndarray) -> np.ndarray:
        return self.params["w"] @ np.asarray(x, dtype=np.float64) + self.params["b"]

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.logits(x))

    def predict(self, x: np.ndarray) -> int:
        return int(np.argmax(self.logits(x)))

    def loss(self, example) -> float:
        x, y = example
        return log_loss(self.logits(x), y)

    def loss_and_grads(self, example):
        x, y = example
        x = np.asarray(x, dtype=np.float64)
        logits = self.params["w"] @ x + self.params["b"]
        probs = softmax(logits)
        loss = log_loss(logits, y)
        dlogits = probs.copy()
        dlogits[y] -= 1.0
        return loss, {"w": np.outer(dlogits, x), "b": dlogits}


def logreg_train(dataset, config: ModelConfig) -> tuple[LogisticRegressionModel, TrainedModel]:
    """SGD cross-entropy fit; deterministic for a fixed config.seed."""
    xs = [np.asarray(x, dtype=np.float64) for x, _ in dataset]
    ys = [int(y) for _, y in dataset]
    check_labels(ys)
    dims = {x.shape for x in xs}
    if len(dims) != 1:
        raise ValueError(f"inconsistent feature lengths: {sorted(dims)}")
    rng = np.random.default_rng(config.seed)
    model = LogisticRegressionModel(xs[0].shape[0], config.n_classes, rng)
    history = sgd_train(model, list(zip(xs, ys)), config, rng)
    trained = TrainedModel(
        config=config,
        parameters={k: v.copy() for k, v in model.params.items()},
        training_history=history,
    )
    return model, trained
