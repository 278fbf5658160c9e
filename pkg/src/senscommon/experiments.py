"""Dataset assembly, deterministic splits, cross-validation and evaluation.

Builds labeled datasets from aggregated annotations, adapts payloads to
each model family, and renders result tables next to the published
reference numbers (which depend on data we do not have and are shown as
labeled reference rows only).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import annotation
from .embeddings import EmbeddingTable, compose, phrase_vector
from .mining import normalize_phrase
from .models import (
    LogisticRegressionModel,
    LstmClassifier,
    MemoryInstance,
    MemoryNetwork,
    ModelConfig,
    TrainedModel,
    logreg_train,
    lstm_train,
    memnet_train,
)

logger = logging.getLogger(__name__)

BINARY_CLASSES = ["negative", "positive"]
SENTIMENT_CLASSES = ["pleasant", "unpleasant", "neutral"]

REFERENCE_LABEL = "reference — original data unavailable"

# published accuracies, rendered as reference rows next to run results
REFERENCE_RESULTS = {
    "soundSource": [
        ("LM: LSTM encoder", 0.90),
        ("LM: source minus sound", 0.88),
        ("LM: sound minus source", 0.87),
        ("LM: vector concatenation", 0.83),
        ("MM: 1 hop", 0.87),
        ("MM: 3 hops", 0.85),
    ],
    "soundScene": [
        ("LM: shortest path", 0.81),
        ("LM: shortest path + sentence", 0.80),
        ("LM: sentence", 0.75),
        ("MM: 1 hop", 0.75),
        ("MM: 3 hops", 0.80),
    ],
    "smellSentiment": [
        ("LM: LSTM encoder", 0.84),
        ("LM: vector addition", 0.81),
        ("MM: 1 hop", 0.82),
        ("MM: 3 hops", 0.82),
    ],
}

REFERENCE_KAPPA = {"soundSource": 0.57, "soundScene": 0.35, "smellSentiment": 0.43}


class SplitError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledDataset:
    relation: str
    examples: tuple[tuple[dict, str], ...]  # (payload, class label)
    classes: tuple[str, ...]
    provenance: tuple[str, ...] = ()  # question ids

    def __post_init__(self) -> None:
        seen = set()
        for payload, label in self.examples:
            if label not in self.classes:
                raise ValueError(f"label {label!r} outside classes {self.classes}")
            key = _payload_key(payload)
            if key in seen:
                raise ValueError(f"duplicate payload: {key}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.examples)


@dataclass(frozen=True)
class TrainSplit:
    examples: tuple[tuple[dict, str], ...]
    classes: tuple[str, ...]
    relation: str

    def __len__(self) -> int:
        return len(self.examples)


@dataclass(frozen=True)
class EvalSplit:
    examples: tuple[tuple[dict, str], ...]
    classes: tuple[str, ...]
    relation: str

    def __len__(self) -> int:
        return len(self.examples)


@dataclass
class EvalReport:
    relation: str
    model_name: str
    accuracy: float
    n_train: int
    n_test: int
    config: dict
    seed: int
    predictions: list[tuple[str, str, str]] = field(default_factory=list)  # (key, gold, predicted)


def _payload_key(payload: dict) -> str:
    import json

    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# splits

def split_dataset(dataset: LabeledDataset, test_size: int, seed: int) -> tuple[TrainSplit, EvalSplit]:
    """Seeded uniform split with exact sizes; train and test are disjoint."""
    n = len(dataset)
    if test_size >= n:
        raise SplitError(f"test_size {test_size} must be smaller than the dataset ({n})")
    if test_size < 1:
        raise SplitError("test_size must be >= 1")
    perm = np.random.default_rng(seed).permutation(n)
    test_idx = sorted(int(i) for i in perm[:test_size])
    train_idx = sorted(int(i) for i in perm[test_size:])
    return (
        TrainSplit(
            examples=tuple(dataset.examples[i] for i in train_idx),
            classes=dataset.classes,
            relation=dataset.relation,
        ),
        EvalSplit(
            examples=tuple(dataset.examples[i] for i in test_idx),
            classes=dataset.classes,
            relation=dataset.relation,
        ),
    )


# ---------------------------------------------------------------------------
# featurization

def _needed_tokens(relation: str, payload: dict) -> list[str]:
    if relation == "soundSource":
        return [payload["sound"], payload["source"], *payload["origin"]]
    if relation == "soundScene":
        return [*payload["path_tokens"], *payload["sentence_tokens"]]
    if relation == "smellSentiment":
        toks = list(payload["tokens"])
        toks += normalize_phrase(payload.get("context") or "")
        return toks
    raise ValueError(f"no featurizer for relation {relation!r}")


def drop_oov(relation: str, examples: Sequence[tuple[dict, str]], table: EmbeddingTable) -> tuple[list, int]:
    """OOV examples are dropped, never imputed; returns (kept, dropped count)."""
    kept = []
    dropped = 0
    for payload, label in examples:
        if all(tok in table for tok in _needed_tokens(relation, payload)):
            kept.append((payload, label))
        else:
            dropped += 1
    return kept, dropped


def _logreg_features(relation: str, payload: dict, mode: str, table: EmbeddingTable) -> np.ndarray:
    if relation == "soundSource":
        v_snd = table.lookup(payload["sound"])
        v_src = table.lookup(payload["source"])
        return compose(v_src, v_snd, mode).values.astype(np.float64)
    if relation == "smellSentiment":
        if mode != "add":
            raise ValueError("smellSentiment linear features support mode 'add'")
        vec = phrase_vector(table, payload["tokens"])
        return vec.astype(np.float64)
    raise ValueError(f"logreg has no feature mode for relation {relation!r}")


def _lstm_sequences(relation: str, payload: dict, mode: str | None, table: EmbeddingTable) -> tuple[np.ndarray, ...]:
    def seq(tokens: Iterable[str]) -> np.ndarray:
        return np.stack([table.lookup(t) for t in tokens]).astype(np.float64)

    if relation == "soundSource":
        return (seq(payload["origin"]),)
    if relation == "smellSentiment":
        return (seq(payload["tokens"]),)
    if relation == "soundScene":
        mode = mode or "sp"
        if mode == "sp":
            return (seq(payload["path_tokens"]),)
        if mode == "s":
            return (seq(payload["sentence_tokens"]),)
        if mode == "sp_s":
            return (seq(payload["path_tokens"]), seq(payload["sentence_tokens"]))
        raise ValueError(f"unknown soundScene feature mode {mode!r}")
    raise ValueError(f"lstm has no features for relation {relation!r}")


def _memory_instance(relation: str, payload: dict, label_idx: int | None) -> MemoryInstance:
    if relation == "soundSource":
        query = (payload["sound"], payload["source"])
        mems = tuple(payload["origin"])
    elif relation == "soundScene":
        query = tuple(payload["scene"].split()) + tuple(payload["sound"].split())
        mems = tuple(payload["path_tokens"])
    elif relation == "smellSentiment":
        query = tuple(payload["tokens"])
        context = normalize_phrase(payload.get("context") or "") or list(payload["tokens"])
        mems = tuple(context)
    else:
        raise ValueError(f"memnet has no adapter for relation {relation!r}")
    return MemoryInstance(query_words=query, memory_words=mems, label=label_idx)


# ---------------------------------------------------------------------------
# training and evaluation

class FittedModel:
    """A trained family model bound to its featurizer and class list."""

    def __init__(self, relation: str, classes: Sequence[str], config: ModelConfig,
                 inner, table: EmbeddingTable | None, trained: TrainedModel):
        self.relation = relation
        self.classes = list(classes)
        self.config = config
        self.inner = inner
        self.table = table
        self.trained = trained

    def predict_label(self, payload: dict) -> str:
        cfg = self.config
        if cfg.family == "logreg":
            x = _logreg_features(self.relation, payload, cfg.feature_mode, self.table)
            return self.classes[self.inner.predict(x)]
        if cfg.family == "lstm_encoder":
            seqs = _lstm_sequences(self.relation, payload, cfg.feature_mode, self.table)
            return self.classes[self.inner.predict(seqs)]
        inst = _memory_instance(self.relation, payload, None)
        return self.classes[self.inner.predict(inst)]


def train_model(
    relation: str,
    examples: Sequence[tuple[dict, str]],
    classes: Sequence[str],
    config: ModelConfig,
    table: EmbeddingTable | None = None,
) -> FittedModel:
    class_idx = {c: i for i, c in enumerate(classes)}
    if config.n_classes != len(classes):
        config = ModelConfig(**{**config.to_dict(), "n_classes": len(classes)})
    if config.family == "logreg":
        data = [
            (_logreg_features(relation, p, config.feature_mode, table), class_idx[l])
            for p, l in examples
        ]
        inner, trained = logreg_train(data, config)
    elif config.family == "lstm_encoder":
        data = [
            (_lstm_sequences(relation, p, config.feature_mode, table), class_idx[l])
            for p, l in examples
        ]
        channels = len(data[0][0]) if data else 1
        inner, trained = lstm_train(data, config, channels=channels)
    elif config.family == "memnet":
        instances = [_memory_instance(relation, p, class_idx[l]) for p, l in examples]
        inner, trained = memnet_train(instances, config)
    else:
        raise ValueError(f"unknown family {config.family!r}")
    trained.classes = list(classes)
    trained.relation = relation
    return FittedModel(relation, classes, config, inner, table, trained)


def fitted_from_checkpoint(trained: TrainedModel, table: EmbeddingTable | None = None) -> FittedModel:
    """Rebuild a predictor from a saved checkpoint."""
    config = trained.config
    if config.family == "logreg":
        w = trained.parameters["w"]
        inner = LogisticRegressionModel(w.shape[1], w.shape[0])
        inner.params = {k: v.copy() for k, v in trained.parameters.items()}
    elif config.family == "lstm_encoder":
        channels = len({k.split("_")[0] for k in trained.parameters if k.startswith("c")})
        w_x = trained.parameters["c0_w_x"]
        inner = LstmClassifier(w_x.shape[1], config.hidden_size,
                               trained.parameters["w_out"].shape[0], channels=channels)
        inner.params = {k: v.copy() for k, v in trained.parameters.items()}
    elif config.family == "memnet":
        if trained.vocab is None:
            raise ValueError("memnet checkpoint is missing its vocabulary")
        inner = MemoryNetwork(
            vocab_size=len(trained.vocab),
            embed_dim=config.embed_dim,
            n_classes=trained.parameters["w_out"].shape[0],
            hops=config.hops,
            memory_capacity=config.memory_capacity,
            vocab=trained.vocab,
        )
        inner.params = {k: v.copy() for k, v in trained.parameters.items()}
    else:
        raise ValueError(f"unknown family {config.family!r}")
    return FittedModel(trained.relation, trained.classes, config, inner, table, trained)


def evaluate(model: FittedModel, test: EvalSplit, n_train: int = 0) -> EvalReport:
    """Exact accuracy over the test split; per-example predictions retained."""
    if len(test) == 0:
        raise ValueError("empty test set")
    predictions = []
    correct = 0
    for payload, gold in test.examples:
        pred = model.predict_label(payload)
        predictions.append((_payload_key(payload), gold, pred))
        if pred == gold:
            correct += 1
    return EvalReport(
        relation=test.relation,
        model_name=model_display_name(model.config),
        accuracy=correct / len(test),
        n_train=n_train,
        n_test=len(test),
        config=model.config.to_dict(),
        seed=model.config.seed,
        predictions=predictions,
    )


def model_display_name(config: ModelConfig) -> str:
    if config.family == "logreg":
        mode_names = {
            "concat": "LM: vector concatenation",
            "diff_src_snd": "LM: source minus sound",
            "diff_snd_src": "LM: sound minus source",
            "add": "LM: vector addition",
        }
        return mode_names.get(config.feature_mode, f"LM: {config.feature_mode}")
    if config.family == "lstm_encoder":
        mode_names = {
            "sp": "LM: shortest path",
            "s": "LM: sentence",
            "sp_s": "LM: shortest path + sentence",
        }
        return mode_names.get(config.feature_mode, "LM: LSTM encoder")
    return f"MM: {config.hops} hop" + ("s" if config.hops > 1 else "")


# ---------------------------------------------------------------------------
# cross-validation

def cross_validate(
    train: TrainSplit,
    grid: Sequence[ModelConfig],
    folds: int = 5,
    table: EmbeddingTable | None = None,
    seed: int = 0,
) -> tuple[ModelConfig, list[tuple[ModelConfig, float]]]:
    """Mean validation accuracy per config over deterministic folds.

    Best config by (accuracy desc, grid order asc). The tuner only accepts
    TrainSplit, so the held-out test handle cannot leak in.
    """
    if isinstance(train, EvalSplit):
        raise TypeError("cross_validate must not see the test split")
    if not isinstance(train, TrainSplit):
        raise TypeError("cross_validate expects a TrainSplit")
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if not grid:
        raise ValueError("empty config grid")
    n = len(train)
    if n < folds:
        raise ValueError(f"cannot make {folds} folds from {n} examples")

    perm = np.random.default_rng(seed).permutation(n)
    fold_indices = [sorted(int(i) for i in chunk) for chunk in np.array_split(perm, folds)]
    if any(len(f) < 1 for f in fold_indices):
        raise ValueError("fold smaller than 1 example")

    scored: list[tuple[ModelConfig, float]] = []
    for config in grid:
        accs = []
        for held in fold_indices:
            held_set = set(held)
            fit_examples = [ex for i, ex in enumerate(train.examples) if i not in held_set]
            val_examples = [train.examples[i] for i in held]
            model = train_model(train.relation, fit_examples, train.classes, config, table)
            correct = sum(
                1 for payload, gold in val_examples if model.predict_label(payload) == gold
            )
            accs.append(correct / len(val_examples))
        scored.append((config, float(np.mean(accs))))
    best_idx = max(range(len(scored)), key=lambda i: (scored[i][1], -i))
    return scored[best_idx][0], scored


def default_grid(family: str, feature_mode: str | None = None, epochs: int = 200) -> list[ModelConfig]:
    """Desk-scale grid: h in {25,50,100}, k in {1,2,3}, lr in {0.01,0.1}."""
    lrs = (0.01, 0.1)
    if family == "logreg":
        return [ModelConfig(family=family, feature_mode=feature_mode, learning_rate=lr,
                            epochs=epochs) for lr in lrs]
    if family == "lstm_encoder":
        return [
            ModelConfig(family=family, feature_mode=feature_mode, hidden_size=h,
                        learning_rate=lr, epochs=epochs)
            for h in (25, 50, 100) for lr in lrs
        ]
    if family == "memnet":
        return [
            ModelConfig(family=family, hops=k, learning_rate=lr, epochs=epochs)
            for k in (1, 2, 3) for lr in lrs
        ]
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# dataset assembly from aggregated annotations

def classes_for_relation(relation: str) -> list[str]:
    return SENTIMENT_CLASSES if relation == "smellSentiment" else BINARY_CLASSES


def build_dataset(
    questions: Sequence[annotation.AnnotationQuestion],
    labels: dict[str, str],
    relation: str,
    table: EmbeddingTable | None = None,
) -> tuple[LabeledDataset, dict[str, int]]:
    """Join majority labels onto question payloads for one relation.

    Majority options without a training class (notsure, notasmell,
    unresolved) are excluded; with a table, OOV examples are dropped too.
    """
    classes = classes_for_relation(relation)
    examples = []
    provenance = []
    stats = {"questions": 0, "unlabeled": 0, "excluded": 0, "oov_dropped": 0}
    seen = set()
    for q in questions:
        if q.relation != relation:
            continue
        stats["questions"] += 1
        majority = labels.get(q.id)
        if majority is None:
            stats["unlabeled"] += 1
            continue
        mapped = annotation.LABEL_MAP.get(majority)
        if mapped is None:
            stats["excluded"] += 1
            continue
        payload = dict(q.payload)
        if q.context is not None and "context" not in payload:
            payload["context"] = q.context
        key = _payload_key(payload)
        if key in seen:
            continue
        seen.add(key)
        examples.append((payload, mapped))
        provenance.append(q.id)
    if table is not None:
        examples_kept, dropped = drop_oov(relation, examples, table)
        stats["oov_dropped"] = dropped
        keep_keys = {_payload_key(p) for p, _ in examples_kept}
        provenance = [
            qid for qid, (p, _) in zip(provenance, examples) if _payload_key(p) in keep_keys
        ]
        examples = examples_kept
    dataset = LabeledDataset(
        relation=relation,
        examples=tuple(examples),
        classes=tuple(classes),
        provenance=tuple(provenance),
    )
    return dataset, stats


# ---------------------------------------------------------------------------
# synthetic analogue of the crowd-labeled sound-source data

def synthetic_sound_source(
    n: int = 634,
    seed: int = 2016,
    n_sounds: int = 40,
    n_sources: int = 30,
    dim: int = 8,
    margin: float = 2.0,
    noise: float = 0.5,
) -> tuple[LabeledDataset, EmbeddingTable]:
    """Separable-cluster stand-in for the crowd-labeled pair data.

    Sound-word vectors sit in a positive or a negative cluster; the pair
    label is the sound word's cluster, so an oracle exists by construction.
    """
    rng = np.random.default_rng(seed)
    entries: dict[str, np.ndarray] = {}
    sound_words = []
    for i in range(n_sounds):
        word = f"snd{i:02d}ing"
        positive = i < n_sounds // 2
        center = margin if positive else -margin
        entries[word] = (center + rng.normal(0.0, noise, size=dim)).astype(np.float32)
        sound_words.append((word, positive))
    source_words = []
    for j in range(n_sources):
        word = f"src{j:02d}"
        entries[word] = rng.normal(0.0, noise, size=dim).astype(np.float32)
        source_words.append(word)

    combos = [(i, j) for i in range(n_sounds) for j in range(n_sources)]
    if n > len(combos):
        raise ValueError(f"cannot draw {n} distinct pairs from {len(combos)} combos")
    order = rng.permutation(len(combos))
    examples = []
    for k in range(n):
        i, j = combos[order[k]]
        sound, positive = sound_words[i]
        source = source_words[j]
        surface = "noun-verb" if k % 2 == 0 else "verb-noun"
        origin = [source, sound] if surface == "noun-verb" else [sound, source]
        payload = {
            "sound": sound,
            "source": source,
            "origin": origin,
            "surface_order": surface,
        }
        examples.append((payload, "positive" if positive else "negative"))
    dataset = LabeledDataset(
        relation="soundSource",
        examples=tuple(examples),
        classes=tuple(BINARY_CLASSES),
    )
    return dataset, EmbeddingTable(dim=dim, entries=entries)


# ---------------------------------------------------------------------------
# report rendering

def reference_table(relation: str, run_results: Sequence[EvalReport]) -> list[str]:
    """Markdown table of run accuracies next to labeled reference rows."""
    lines = [
        "| Learning model | Accuracy | Note |",
        "|---|---|---|",
    ]
    run_by_name = {r.model_name: r for r in run_results}
    listed = set()
    for name, ref in REFERENCE_RESULTS.get(relation, []):
        run = run_by_name.get(name)
        if run is not None:
            listed.add(name)
            lines.append(f"| {name} | {run.accuracy:.2f} | this run |")
        lines.append(f"| {name} | {ref:.2f} | {REFERENCE_LABEL} |")
    for r in run_results:
        if r.model_name not in listed:
            lines.append(f"| {r.model_name} | {r.accuracy:.2f} | this run |")
    return lines
