"""From-scratch learners: logistic regression, LSTM encoder classifier and
end-to-end memory network, plus a shared SGD trainer and gradient checker."""

from .common import (
    ModelConfig,
    TrainedModel,
    grad_check,
    load_checkpoint,
    random_instance_check,
    save_checkpoint,
    sgd_train,
    softmax,
)
from .logreg import LogisticRegressionModel, logreg_train
from .lstm import LstmClassifier, lstm_encode, lstm_train
from .memnet import MemoryInstance, MemoryNetwork, build_vocab, memnet_forward, memnet_train

__all__ = [
    "ModelConfig",
    "TrainedModel",
    "grad_check",
    "random_instance_check",
    "sgd_train",
    "softmax",
    "save_checkpoint",
    "load_checkpoint",
    "LogisticRegressionModel",
    "logreg_train",
    "LstmClassifier",
    "lstm_encode",
    "lstm_train",
    "MemoryInstance",
    "MemoryNetwork",
    "build_vocab",
    "memnet_forward",
    "memnet_train",
]
