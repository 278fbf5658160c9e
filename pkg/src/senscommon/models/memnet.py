"""End-to-end memory network over word memories.

The query (argument-pair words) is embedded as a bag of words; each hop
scores the memory words against the query state, attends with a softmax,
adds the attended output-side representation to the state, and the final
state feeds a linear softmax layer. Adjacent weight tying: the output
embedding of hop t is the input embedding of hop t+1, so k hops use k+1
embedding matrices, with the query side tied to the first.
"""

from __future__ import annotations

from dataclasses import dataclass

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

UNK = "<unk>"


@dataclass(frozen=True)
class MemoryInstance:
    """One training/prediction item: query words, memory words, class."""

    query_words: tuple[str, ...]
    memory_words: tuple[str, ...]
    label: int | None = None

    def __post_init__(self) -> None:
        if not self.query_words:
            raise ValueError("query_words must be non-empty")
        if not self.memory_words:
            raise ValueError("memory_words must be non-empty")


def build_vocab(instances) -> dict[str, int]:
    """Word -> id map over all instance words; id 0 is the shared unknown."""
    vocab = {UNK: 0}
    for inst in instances:
        for w in list(inst.query_words) + list(inst.memory_words):
            if w not in vocab:
                vocab[w] = len(vocab)
    return vocab


class MemoryNetwork:
    def __init__(self, vocab_size: int, embed_dim: int, n_classes: int, hops: int,
                 rng: np.random.Generator | None = None, memory_capacity: int = 30,
                 vocab: dict[str, int] | None = None):
        if hops < 1:
            raise ValueError("hops must be >= 1")
        self.vocab_size = vocab_size
        self.embed_dim = embed_dim
        self.n_classes = n_classes
        self.hops = hops
        self.memory_capacity = memory_capacity
        self.vocab = vocab
        self.params: dict[str, np.ndarray] = {}
        for t in range(hops + 1):
            if rng is None:
                self.params[f"emb_{t}"] = np.zeros((vocab_size, embed_dim))
            else:
                self.params[f"emb_{t}"] = init_uniform(rng, (vocab_size, embed_dim))
        if rng is None:
            self.params["w_out"] = np.zeros((n_classes, embed_dim))
            self.params["b_out"] = np.zeros(n_classes)
        else:
            self.params["w_out"] = init_uniform(rng, (n_classes, embed_dim))
            self.params["b_out"] = init_uniform(rng, (n_classes,))

    # -- id mapping -----------------------------------------------------
    def ids_of(self, words) -> list[int]:
        if self.vocab is None:
            raise ValueError("model has no vocabulary; pass id lists directly")
        return [self.vocab.get(w, 0) for w in words]

    def instance_ids(self, inst: MemoryInstance) -> tuple[list[int], list[int]]:
        mems = list(inst.memory_words)[: self.memory_capacity]
        return self.ids_of(inst.query_words), self.ids_of(mems)

    # -- forward ---------------------------------------------------------
    def _forward_full(self, query_ids, memory_ids):
        if len(memory_ids) == 0:
            raise ValueError("zero memory slots")
        q = np.asarray(query_ids, dtype=np.int64)
        m = np.asarray(memory_ids, dtype=np.int64)
        u = self.params["emb_0"][q].sum(axis=0)
        hop_cache = []
        for t in range(1, self.hops + 1):
            mem_in = self.params[f"emb_{t - 1}"][m]
            mem_out = self.params[f"emb_{t}"][m]
            p = softmax(mem_in @ u)
            hop_cache.append((u.copy(), mem_in, mem_out, p))
            u = u + p @ mem_out
        logits = self.params["w_out"] @ u + self.params["b_out"]
        return logits, u, hop_cache, q, m

    def forward(self, query_ids, memory_ids):
        """(class distribution, per-hop attention vectors)."""
        logits, _, hop_cache, _, _ = self._forward_full(query_ids, memory_ids)
        return softmax(logits), [p for _, _, _, p in hop_cache]

    def predict_proba(self, item) -> np.ndarray:
        probs, _ = self.forward(*self._ids(item))
        return probs

    def predict(self, item) -> int:
        return int(np.argmax(self.predict_proba(item)))

    def _ids(self, item):
        if isinstance(item, MemoryInstance):
            return self.instance_ids(item)
        q, m = item
        return list(q), list(m)

    # -- loss / gradients --------------------------------------------------
    def loss(self, example) -> float:
        item, y = example
        logits, _, _, _, _ = self._forward_full(*self._ids(item))
        return log_loss(logits, y)

    def loss_and_grads(self, example):
        item, y = example
        q_ids, m_ids = self._ids(item)
        logits, u, hop_cache, q, m = self._forward_full(q_ids, m_ids)
        probs = softmax(logits)
        loss = log_loss(logits, y)

        grads = {name: np.zeros_like(arr) for name, arr in self.params.items()}
        dlogits = probs.copy()
        dlogits[y] -= 1.0
        grads["w_out"] = np.outer(dlogits, u)
        grads["b_out"] = dlogits
        du = self.params["w_out"].T @ dlogits

        for t in range(self.hops, 0, -1):
            u_t, mem_in, mem_out, p = hop_cache[t - 1]
            do = du  # u_{t+1} = u_t + o_t
            dp = mem_out @ do
            dmem_out = np.outer(p, do)
            ds = p * (dp - float(dp @ p))  # softmax backward
            dmem_in = np.outer(ds, u_t)
            du_t = mem_in.T @ ds
            np.add.at(grads[f"emb_{t}"], m, dmem_out)
            np.add.at(grads[f"emb_{t - 1}"], m, dmem_in)
            du = du + du_t
        np.add.at(grads["emb_0"], q, np.tile(du, (len(q_ids), 1)))
        return loss, grads


def memnet_forward(instance: MemoryInstance, model: MemoryNetwork):
    """Class distribution + attention for one instance on a vocab-bound model."""
    return model.forward(*model.instance_ids(instance))


def memnet_train(instances, config: ModelConfig) -> tuple[MemoryNetwork, TrainedModel]:
    labels = [inst.label for inst in instances]
    if any(l is None for l in labels):
        raise ValueError("all training instances need labels")
    check_labels(labels)
    vocab = build_vocab(instances)
    rng = np.random.default_rng(config.seed)
    model = MemoryNetwork(
        vocab_size=len(vocab),
        embed_dim=config.embed_dim,
        n_classes=config.n_classes,
        hops=config.hops,
        rng=rng,
        memory_capacity=config.memory_capacity,
        vocab=vocab,
    )
    examples = [(model.instance_ids(inst), inst.label) for inst in instances]
    history = sgd_train(model, examples, config, rng)
    trained = TrainedModel(
        config=config,
        parameters={k: v.copy() for k, v in model.params.items()},
        training_history=history,
        vocab=vocab,
    )
    return model, trained
