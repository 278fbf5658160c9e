import random
import re
import string

import pytest

from senscommon.mining import (
    CandidatePhrase,
    CorpusReadError,
    PatternSpec,
    SoundSourcePair,
    bigram_fraction,
    extract_pattern_phrases,
    filter_bigram_pairs,
    is_gerund,
    iter_corpus,
    normalize_phrase,
)

SOUND = PatternSpec(head_noun="sound")
SMELL = PatternSpec(head_noun="smell")


def phrases_of(corpus, spec=SOUND, **kw):
    return extract_pattern_phrases(corpus, spec, **kw)


class TestNormalize:
    def test_case_and_punctuation(self):
        assert normalize_phrase("Singing  Children,") == ["singing", "children"]

    def test_empty(self):
        assert normalize_phrase("") == []

    def test_idempotent_on_random_strings(self):
        rng = random.Random(4242)
        pool = string.ascii_letters + string.punctuation + "  \t“”’"
        for _ in range(1000):
            raw = "".join(rng.choice(pool) for _ in range(rng.randrange(0, 40)))
            once = normalize_phrase(raw)
            assert normalize_phrase(" ".join(once)) == once


class TestPatternExtraction:
    def test_singing_children(self):
        spec = PatternSpec(head_noun="sound", capture_max_tokens=2)
        corpus = [("d1", "the sound of singing children filled the hall")]
        out = phrases_of(corpus, spec)
        assert [p.phrase for p in out] == ["singing children"]
        assert out[0].kind == "sound"
        assert out[0].frequency == 1
        assert out[0].provenance == (("d1", 0),)

    def test_no_match(self):
        assert phrases_of([("d1", "there is no matching text here")]) == []

    def test_empty_corpus(self):
        assert phrases_of([]) == []

    def test_capture_stops_at_punctuation(self):
        out = phrases_of([("d1", "the sound of rain, soft and cold, woke us.")])
        assert [p.phrase for p in out] == ["rain"]

    def test_capture_stops_at_token_cap(self):
        out = phrases_of([("d1", "the sound of one two three four five six seven")])
        assert [p.phrase for p in out] == ["one two three four five"]

    def test_capture_stops_at_head_noun(self):
        out = phrases_of([("d1", "the sound of wind and sound of rain.")])
        texts = {p.phrase for p in out}
        assert texts == {"wind and", "rain"}

    def test_head_noun_never_inside_phrase(self):
        out = phrases_of([("d1", "a sound of a sound of thunder.")])
        for p in out:
            assert "sound" not in p.text

    def test_planted_137_occurrences(self):
        rng = random.Random(137)
        planted = set(rng.sample(range(1000), 137))
        docs = []
        for i in range(1000):
            if i in planted:
                docs.append((f"doc{i}", "that evening we heard the sound of rain."))
            elif i % 3 == 0:
                docs.append((f"doc{i}", "the sound of thunder, loud and cold."))
            else:
                docs.append((f"doc{i}", "the city was quiet at night."))
        # independent substring-count oracle over the same corpus
        blob = "\n".join(text for _, text in docs)
        oracle = len(re.findall(r"\bsound of rain\b", blob))
        assert oracle == 137

        out = phrases_of(docs)
        by_text = {p.phrase: p for p in out}
        assert by_text["rain"].frequency == oracle == 137
        assert len(by_text["rain"].provenance) == 137

    def test_soundness_against_rescan(self, corpus_fixture):
        out = phrases_of(iter_corpus(corpus_fixture))
        blob = corpus_fixture.read_text(encoding="utf-8").lower()
        for p in out:
            prefix = re.escape(p.text[0])
            found = len(re.findall(rf"\bsound of {prefix}", blob))
            assert found >= p.frequency, p.phrase

    def test_sorted_by_frequency_then_text(self, corpus_fixture):
        out = phrases_of(iter_corpus(corpus_fixture))
        keys = [(-p.frequency, p.text) for p in out]
        assert keys == sorted(keys)

    def test_deterministic_across_runs_and_threads(self, corpus_fixture):
        one = phrases_of(iter_corpus(corpus_fixture))
        two = phrases_of(iter_corpus(corpus_fixture))
        four = phrases_of(iter_corpus(corpus_fixture), threads=4)
        assert one == two == four

    def test_frequency_merges_case_variants(self):
        corpus = [("d1", "The Sound of Rain. the sound of rain!")]
        out = phrases_of(corpus)
        assert [(p.phrase, p.frequency) for p in out] == [("rain", 2)]

    def test_unreadable_document(self, tmp_path):
        missing = tmp_path / "nope.txt"
        with pytest.raises(CorpusReadError) as err:
            list(iter_corpus(missing))
        assert "nope.txt" in str(err.value)

    def test_tagged_corpus_autodetect(self, tmp_path):
        f = tmp_path / "tagged.txt"
        rows = [
            ("the", "DT"), ("sound", "NN"), ("of", "IN"),
            ("ringing", "VBG"), ("bells", "NNS"), (".", "."),
        ]
        f.write_text("\n".join(f"{w}\t{t}" for w, t in rows) + "\n", encoding="utf-8")
        out = phrases_of(iter_corpus(f))
        assert [p.phrase for p in out] == ["ringing bells"]
        assert out[0].pos == ("VBG", "NNS")


class TestBigramPairs:
    def make(self, *tokens, pos=None):
        return CandidatePhrase(
            text=tuple(tokens), kind="sound", frequency=1,
            provenance=(("d", 0),), pos=pos,
        )

    def test_noun_verb_order(self):
        pairs = filter_bigram_pairs([self.make("birds", "chirping")])
        assert len(pairs) == 1
        assert (pairs[0].sound, pairs[0].source) == ("chirping", "birds")
        assert pairs[0].surface_order == "noun-verb"

    def test_verb_noun_order(self):
        pairs = filter_bigram_pairs([self.make("squealing", "brakes")])
        assert (pairs[0].sound, pairs[0].source) == ("squealing", "brakes")
        assert pairs[0].surface_order == "verb-noun"

    def test_negative_candidates_still_emitted(self):
        # implausible pairs are for the annotators to reject, not the miner
        pairs = filter_bigram_pairs([self.make("surrounding", "nature")])
        assert (pairs[0].sound, pairs[0].source) == ("surrounding", "nature")

    def test_no_ing_token(self):
        assert filter_bigram_pairs([self.make("loud", "noise")]) == []

    def test_double_gerund_dropped(self):
        assert filter_bigram_pairs([self.make("singing", "dancing")]) == []

    def test_excluded_ing_nouns(self):
        assert filter_bigram_pairs([self.make("morning", "birds")]) == []
        assert filter_bigram_pairs([self.make("the", "ringing")]) == []

    def test_function_word_partner_rejected(self):
        assert filter_bigram_pairs([self.make("ringing", "the")]) == []

    def test_non_bigram_dropped(self):
        assert filter_bigram_pairs([self.make("rain",)]) == []
        assert filter_bigram_pairs([self.make("a", "b", "c")]) == []

    def test_pos_tags_override_heuristic(self):
        # "ring" is on the heuristic exclusion list, but a VBG tag wins
        # (the literal -ing suffix is still there, so the pair is well formed)
        tagged = self.make("ring", "bells", pos=("VBG", "NNS"))
        [pair] = filter_bigram_pairs([tagged])
        assert (pair.sound, pair.source) == ("ring", "bells")
        # NN tag vetoes an -ing token the heuristic would accept
        nn = self.make("evening", "bells", pos=("NN", "NNS"))
        assert filter_bigram_pairs([nn]) == []
        hums = self.make("humming", "bees", pos=("NN", "NNS"))
        assert filter_bigram_pairs([hums]) == []

    def test_orientation_on_synthetic_reversed_bigrams(self):
        rng = random.Random(99)
        nouns = ["birds", "cars", "dogs", "bells", "waves", "engines"]
        gerunds = ["chirping", "honking", "barking", "ringing", "crashing", "roaring"]
        for _ in range(200):
            n, g = rng.choice(nouns), rng.choice(gerunds)
            order = rng.random() < 0.5
            toks = (n, g) if order else (g, n)
            [pair] = filter_bigram_pairs([self.make(*toks)])
            assert pair.sound == g and pair.source == n
            assert pair.surface_order == ("noun-verb" if order else "verb-noun")

    def test_bigram_fraction_reported(self, corpus_fixture):
        out = phrases_of(iter_corpus(corpus_fixture))
        frac = bigram_fraction(out)
        assert 0.0 <= frac <= 1.0
        print(f"bigram fraction on fixture corpus: {frac:.3f} ({len(out)} phrases)")


class TestSerialization:
    def test_phrase_roundtrip(self):
        p = CandidatePhrase(
            text=("singing", "children"), kind="sound", frequency=2,
            provenance=(("a", 0), ("b", 3)), pos=("VBG", "NNS"),
        )
        assert CandidatePhrase.from_dict(p.to_dict()) == p
        assert p.to_dict()["v"] == 1

    def test_pair_roundtrip(self):
        p = CandidatePhrase(text=("birds", "chirping"), kind="sound",
                            frequency=1, provenance=(("a", 0),))
        pair = SoundSourcePair(sound="chirping", source="birds",
                               origin=p, surface_order="noun-verb")
        assert SoundSourcePair.from_dict(pair.to_dict()) == pair


def test_gerund_heuristic_shortlist():
    assert is_gerund("chirping")
    assert is_gerund("squealing")
    assert not is_gerund("thing")
    assert not is_gerund("sing")
    assert not is_gerund("morning")
    assert is_gerund("ring", pos="VBG")
