"""Acceptance gate: one test per criterion, each at its stated tolerance.

The terminal summary hook in conftest.py prints one PASS/FAIL line per
test in this module at the end of the run.
"""

import random
import re
import time

import numpy as np
import pytest

from senscommon.annotation import fleiss_kappa
from senscommon.cli import main as cli_main
from senscommon.depgraph import shortest_path
from senscommon.experiments import (
    evaluate,
    split_dataset,
    synthetic_sound_source,
    train_model,
)
from senscommon.mining import PatternSpec, extract_pattern_phrases
from senscommon.models import MemoryNetwork, ModelConfig, random_instance_check

from test_depgraph import floyd_warshall, random_tree


def test_gradient_checks_all_families_under_60s():
    """logreg, LSTM, memnet k=1..3: max relative error < 1e-4, 20 instances each."""
    start = time.monotonic()
    failures = []
    for family in ("logreg", "lstm_encoder", "memnet:1", "memnet:2", "memnet:3"):
        for seed in range(20):
            err = random_instance_check(family, seed=seed, eps=1e-4)
            if err >= 1e-4:
                failures.append((family, seed, err))
    elapsed = time.monotonic() - start
    assert not failures, failures
    assert elapsed < 60.0, f"gradient checks took {elapsed:.1f}s"


def test_oracle_shortest_path_matches_floyd_warshall():
    """Exact distance equality on 200 random dependency trees of <= 12 nodes."""
    rng = random.Random(20160601)
    for _ in range(200):
        n = rng.randrange(2, 13)
        g = random_tree(rng, n)
        dist = floyd_warshall(g)
        a, b = rng.sample(range(1, n + 1), 2) if n > 1 else (1, 1)
        sig = shortest_path(g, (a, a), (b, b))
        assert len(sig.steps) == dist[a][b]


def test_oracle_fleiss_kappa_hand_matrix():
    """Hand-worked 4x3 matrix to 1e-9; unanimity returns exactly 1.0."""
    hand = [[3, 0, 0], [2, 1, 0], [1, 1, 1], [0, 2, 1]]
    assert fleiss_kappa(hand) == pytest.approx(1 / 22, abs=1e-9)
    unanimous = [[3, 0, 0], [0, 3, 0], [0, 0, 3], [3, 0, 0], [0, 0, 3]]
    assert fleiss_kappa(unanimous) == 1.0
    assert fleiss_kappa([[3, 0], [3, 0]]) == 1.0  # single-category limit


def test_oracle_pattern_miner_recovers_planted_137():
    """Exactly the 137 planted "sound of rain" occurrences on a synthetic corpus."""
    rng = random.Random(137)
    planted = set(rng.sample(range(1000), 137))
    docs = []
    for i in range(1000):
        if i in planted:
            docs.append((f"doc{i}", "we heard the sound of rain."))
        elif i % 4 == 0:
            docs.append((f"doc{i}", "the sound of thunder, loud and strong."))
        else:
            docs.append((f"doc{i}", "a quiet evening in the city."))
    blob = "\n".join(t for _, t in docs)
    assert len(re.findall(r"\bsound of rain\b", blob)) == 137  # independent oracle
    phrases = extract_pattern_phrases(docs, PatternSpec("sound"))
    by_text = {p.phrase: p.frequency for p in phrases}
    assert by_text["rain"] == 137


def test_memnet_normalization_invariants_1000_forwards():
    """Attention per hop and output distributions sum to 1 +/- 1e-6."""
    master = np.random.default_rng(424242)
    n_forwards = 0
    for _ in range(10):
        vocab_size = int(master.integers(5, 40))
        hops = int(master.integers(1, 4))
        model = MemoryNetwork(
            vocab_size=vocab_size,
            embed_dim=int(master.integers(2, 16)),
            n_classes=int(master.integers(2, 4)),
            hops=hops,
            rng=master,
        )
        for _ in range(100):
            q = master.integers(0, vocab_size, size=int(master.integers(1, 5))).tolist()
            m = master.integers(0, vocab_size, size=int(master.integers(1, 20))).tolist()
            probs, attns = model.forward(q, m)
            assert abs(probs.sum() - 1.0) <= 1e-6
            assert len(attns) == hops
            for p in attns:
                assert abs(p.sum() - 1.0) <= 1e-6
            n_forwards += 1
    assert n_forwards == 1000


def test_synthetic_analogue_accuracy_floors():
    """On the 634-example separable synthetic set (534/100 split): LSTM-encoder
    linear model >= 0.90, 1-hop memory network >= 0.85, under 5 minutes."""
    start = time.monotonic()
    ds, table = synthetic_sound_source(n=634, seed=2016)
    assert len(ds) == 634
    train, test = split_dataset(ds, test_size=100, seed=2024)
    assert (len(train), len(test)) == (534, 100)

    lstm_cfg = ModelConfig(family="lstm_encoder", hidden_size=16,
                           learning_rate=0.1, epochs=60, seed=11)
    lstm = train_model("soundSource", train.examples, train.classes, lstm_cfg, table)
    lstm_acc = evaluate(lstm, test, n_train=len(train)).accuracy

    mm_cfg = ModelConfig(family="memnet", hops=1, embed_dim=16,
                         learning_rate=0.1, epochs=60, seed=11)
    memnet = train_model("soundSource", train.examples, train.classes, mm_cfg, table)
    mm_acc = evaluate(memnet, test, n_train=len(train)).accuracy

    elapsed = time.monotonic() - start
    print(f"synthetic-analogue: lstm={lstm_acc:.3f} memnet-1hop={mm_acc:.3f} ({elapsed:.1f}s)")
    assert lstm_acc >= 0.90
    assert mm_acc >= 0.85
    assert elapsed < 300.0


def test_demo_end_to_end_determinism(tmp_path, capsys):
    """demo --seed S twice: byte-identical outputs; live kappa == offline kappa."""
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli_main(["demo", "--seed", "13", "--out", str(out1)]) == 0
    assert cli_main(["demo", "--seed", "13", "--out", str(out2)]) == 0
    capsys.readouterr()

    files1 = sorted(p.relative_to(out1) for p in out1.rglob("*") if p.is_file())
    files2 = sorted(p.relative_to(out2) for p in out2.rglob("*") if p.is_file())
    assert files1 == files2 and files1
    for rel in files1:
        assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes(), rel

    # the demo hard-fails on live/offline kappa mismatch; cross-check the
    # exported matrix against the report rendering independently
    report = (out1 / "report.md").read_text(encoding="utf-8")
    for relation in ("soundSource", "soundScene", "smellSentiment"):
        rows = []
        lines = (out1 / f"matrix_{relation}.csv").read_text().strip().splitlines()
        for line in lines[1:]:
            rows.append([int(x) for x in line.split(",")[1:]])
        if len(rows) >= 2:
            offline = fleiss_kappa(rows)
            assert f"kappa {offline:.4f} (live == offline" in report, relation


def test_split_contract_exact_sizes():
    """634 -> 534/100, 584 -> 484/100, 600 -> 500/100; disjoint, reproducible."""
    for total, expect_train in ((634, 534), (584, 484), (600, 500)):
        ds, _ = synthetic_sound_source(n=total, seed=total)
        train1, test1 = split_dataset(ds, test_size=100, seed=99)
        train2, test2 = split_dataset(ds, test_size=100, seed=99)
        assert (len(train1), len(test1)) == (expect_train, 100)
        assert train1 == train2 and test1 == test2
        train_keys = {str(p) for p, _ in train1.examples}
        test_keys = {str(p) for p, _ in test1.examples}
        assert not train_keys & test_keys
        assert len(train_keys) + len(test_keys) == total
