import numpy as np
import pytest

from senscommon.annotation import generate_question
from senscommon.embeddings import EmbeddingTable
from senscommon.experiments import (
    BINARY_CLASSES,
    EvalReport,
    FittedModel,
    LabeledDataset,
    REFERENCE_LABEL,
    SplitError,
    EvalSplit,
    TrainSplit,
    build_dataset,
    cross_validate,
    default_grid,
    drop_oov,
    evaluate,
    reference_table,
    split_dataset,
    synthetic_sound_source,
    train_model,
)
from senscommon.mining import CandidatePhrase, SoundSourcePair
from senscommon.models import ModelConfig


def tiny_dataset(n=20, relation="soundSource"):
    examples = []
    for i in range(n):
        payload = {
            "sound": f"snd{i:02d}ing",
            "source": f"src{i:02d}",
            "origin": [f"src{i:02d}", f"snd{i:02d}ing"],
            "surface_order": "noun-verb",
        }
        examples.append((payload, BINARY_CLASSES[i % 2]))
    return LabeledDataset(relation=relation, examples=tuple(examples),
                          classes=tuple(BINARY_CLASSES))


class TestSplitting:
    @pytest.mark.parametrize("total,expected_train", [(634, 534), (584, 484), (600, 500)])
    def test_paper_scale_splits(self, total, expected_train):
        ds, _ = synthetic_sound_source(n=total, seed=1)
        train, test = split_dataset(ds, test_size=100, seed=42)
        assert len(train) == expected_train
        assert len(test) == 100
        train_keys = {str(p) for p, _ in train.examples}
        test_keys = {str(p) for p, _ in test.examples}
        assert not train_keys & test_keys
        assert len(train_keys | test_keys) == total

    def test_seed_reproducible(self):
        ds = tiny_dataset()
        a = split_dataset(ds, 5, seed=7)
        b = split_dataset(ds, 5, seed=7)
        c = split_dataset(ds, 5, seed=8)
        assert a == b
        assert a != c

    def test_too_large_test_size(self):
        ds = tiny_dataset(10)
        with pytest.raises(SplitError):
            split_dataset(ds, 10, seed=0)

    def test_duplicate_payloads_rejected(self):
        payload = {"sound": "ringing", "source": "bells",
                   "origin": ["bells", "ringing"], "surface_order": "noun-verb"}
        with pytest.raises(ValueError, match="duplicate"):
            LabeledDataset(relation="soundSource",
                           examples=((payload, "positive"), (dict(payload), "negative")),
                           classes=tuple(BINARY_CLASSES))


class TestEvaluate:
    def make_oracle_model(self, train):
        class Oracle(FittedModel):
            def __init__(self):
                self.relation = train.relation
                self.classes = list(train.classes)
                self.config = ModelConfig(family="logreg", feature_mode="concat", epochs=1)

            def predict_label(self, payload):
                return "positive" if payload["sound"] < "snd20ing" else "negative"

        return Oracle()

    def test_oracle_perfect_accuracy(self):
        ds, table = synthetic_sound_source(n=200, seed=3, n_sounds=40)
        train, test = split_dataset(ds, 50, seed=0)
        oracle = self.make_oracle_model(train)
        report = evaluate(oracle, test)
        assert report.accuracy == 1.0
        assert report.n_test == 50
        assert len(report.predictions) == 50

    def test_random_binary_predictor_near_half(self):
        ds, _ = synthetic_sound_source(n=1000, seed=5, n_sounds=50, n_sources=40)
        # class-balanced by construction: first half of sounds positive
        _, test = split_dataset(ds, 999, seed=0)

        rng = np.random.default_rng(99)

        class Coin(FittedModel):
            def __init__(self):
                self.relation = "soundSource"
                self.classes = list(BINARY_CLASSES)
                self.config = ModelConfig(family="logreg", feature_mode="concat", epochs=1)

            def predict_label(self, payload):
                return BINARY_CLASSES[int(rng.integers(2))]

        report = evaluate(Coin(), test)
        assert abs(report.accuracy - 0.5) <= 0.05

    def test_empty_test_rejected(self):
        with pytest.raises(ValueError):
            evaluate(None, EvalSplit(examples=(), classes=("a", "b"), relation="x"))

    def test_repeat_evaluation_identical(self):
        ds, table = synthetic_sound_source(n=120, seed=8)
        train, test = split_dataset(ds, 30, seed=1)
        config = ModelConfig(family="logreg", feature_mode="concat",
                             learning_rate=0.1, epochs=10, seed=0)
        model = train_model("soundSource", train.examples, train.classes, config, table)
        r1 = evaluate(model, test)
        r2 = evaluate(model, test)
        assert r1.accuracy == r2.accuracy
        assert r1.predictions == r2.predictions


class TestCrossValidation:
    def test_singleton_grid(self):
        ds, table = synthetic_sound_source(n=60, seed=2)
        train, _ = split_dataset(ds, 10, seed=0)
        grid = [ModelConfig(family="logreg", feature_mode="concat", epochs=5, learning_rate=0.1)]
        best, scored = cross_validate(train, grid, folds=3, table=table)
        assert best == grid[0]
        assert len(scored) == 1

    def test_planted_family_wins(self):
        # labels follow the sound-word cluster: the concat logreg can read it
        # off the embeddings, a 1-epoch barely-trained memnet cannot
        ds, table = synthetic_sound_source(n=80, seed=4)
        train, _ = split_dataset(ds, 20, seed=0)
        good = ModelConfig(family="logreg", feature_mode="concat",
                           learning_rate=0.5, epochs=30, seed=0)
        bad = ModelConfig(family="memnet", hops=1, embed_dim=4,
                          learning_rate=0.001, epochs=1, seed=0)
        best, scored = cross_validate(train, [bad, good], folds=3, table=table)
        assert best == good
        assert dict((id(c), a) for c, a in scored)  # smoke: all scored

    def test_tie_prefers_earlier_grid_entry(self):
        ds, table = synthetic_sound_source(n=40, seed=6)
        train, _ = split_dataset(ds, 10, seed=0)
        c1 = ModelConfig(family="logreg", feature_mode="concat", learning_rate=0.5,
                         epochs=25, seed=3)
        c2 = ModelConfig(family="logreg", feature_mode="concat", learning_rate=0.5,
                         epochs=25, seed=3)
        best, scored = cross_validate(train, [c1, c2], folds=3, table=table)
        assert scored[0][1] == scored[1][1]
        assert best is c1

    def test_test_split_cannot_enter_tuner(self):
        ds, table = synthetic_sound_source(n=40, seed=6)
        _, test = split_dataset(ds, 10, seed=0)
        with pytest.raises(TypeError):
            cross_validate(test, default_grid("logreg", "concat", epochs=1), folds=2, table=table)

    def test_fold_validation(self):
        ds, table = synthetic_sound_source(n=10, seed=6)
        train, _ = split_dataset(ds, 2, seed=0)
        grid = [ModelConfig(family="logreg", feature_mode="concat", epochs=1)]
        with pytest.raises(ValueError):
            cross_validate(train, grid, folds=20, table=table)
        with pytest.raises(ValueError):
            cross_validate(train, [], folds=2, table=table)


class TestDatasetAssembly:
    def make_questions(self, n=8):
        questions = []
        for i in range(n):
            origin = CandidatePhrase(text=(f"src{i:02d}", f"snd{i:02d}ing"), kind="sound",
                                     frequency=1, provenance=(("d", i),))
            pair = SoundSourcePair(sound=f"snd{i:02d}ing", source=f"src{i:02d}",
                                   origin=origin, surface_order="noun-verb")
            questions.append(generate_question(pair, "soundSource"))
        return questions

    def test_label_mapping_and_exclusions(self):
        questions = self.make_questions()
        labels = {}
        for i, q in enumerate(questions):
            labels[q.id] = ["yes", "no", "notsure", "unresolved"][i % 4]
        ds, stats = build_dataset(questions, labels, "soundSource")
        assert stats["questions"] == 8
        assert stats["excluded"] == 4  # notsure + unresolved carry no class
        assert len(ds) == 4
        assert {l for _, l in ds.examples} == {"positive", "negative"}

    def test_oov_dropping(self):
        questions = self.make_questions(4)
        labels = {q.id: "yes" for q in questions}
        entries = {}
        for q in questions[:2]:
            entries[q.payload["sound"]] = np.ones(4, dtype=np.float32)
            entries[q.payload["source"]] = np.ones(4, dtype=np.float32)
        table = EmbeddingTable(dim=4, entries=entries)
        ds, stats = build_dataset(questions, labels, "soundSource", table)
        assert stats["oov_dropped"] == 2
        assert len(ds) == 2
        kept, dropped = drop_oov("soundSource", [(q.payload, "positive") for q in questions], table)
        assert dropped == 2 and len(kept) == 2


class TestSyntheticAnalogue:
    def test_generator_ground_truth(self):
        ds, table = synthetic_sound_source(n=634, seed=11)
        assert len(ds) == 634
        pos = sum(1 for _, l in ds.examples if l == "positive")
        assert 200 < pos < 434  # both classes well represented
        keys = {str(p) for p, _ in ds.examples}
        assert len(keys) == 634  # payloads distinct
        for payload, label in ds.examples[:50]:
            idx = int(payload["sound"][3:5])
            assert (label == "positive") == (idx < 20)
            assert payload["sound"] in table and payload["source"] in table

    def test_quick_models_learn_it(self):
        ds, table = synthetic_sound_source(n=200, seed=12)
        train, test = split_dataset(ds, 50, seed=0)
        config = ModelConfig(family="logreg", feature_mode="concat",
                             learning_rate=0.5, epochs=40, seed=0)
        model = train_model("soundSource", train.examples, train.classes, config, table)
        report = evaluate(model, test, n_train=len(train))
        assert report.accuracy >= 0.9
        assert report.n_train == len(train)


def test_reference_table_rendering():
    run = EvalReport(relation="soundSource", model_name="LM: LSTM encoder",
                     accuracy=0.93, n_train=534, n_test=100,
                     config={}, seed=0)
    lines = reference_table("soundSource", [run])
    text = "\n".join(lines)
    assert "0.93 | this run" in text
    assert f"0.90 | {REFERENCE_LABEL}" in text
    assert "MM: 1 hop | 0.87" in text.replace("| 0.87 |", "| 0.87 |")
    assert text.count(REFERENCE_LABEL) == 6
