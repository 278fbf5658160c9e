"""Corpus mining for perception phrases.

Streams a text corpus, extracts candidate phrases occurring after a
"<head> of" lexical pattern ("sound of <y>", "smell of <y>") and derives
plausible sound-source pairs from gerund bi-grams such as "birds chirping"
or "squealing brakes".
"""

from __future__ import annotations

import itertools
import logging
import re
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

logger = logging.getLogger(__name__)

_STRIP_CHARS = string.punctuation + "…“”‘’«»–—"
# punctuation that closes a capture window when it trails a token
_BOUNDARY_TRAIL = set(".,;:!?)…”’\"']}")
_SENT_SPLIT = re.compile(r"(?<=[.!?])\s+")

# -ing tokens that are (almost) never gerunds in running text
GERUND_EXCLUSIONS = frozenset({
    "thing", "something", "nothing", "anything", "everything",
    "during", "morning", "evening", "king", "ring", "spring",
    "string", "wing", "sibling", "ceiling", "darling", "being",
})

# tokens that cannot stand in as the noun of a sound-source pair
FUNCTION_WORDS = frozenset({
    "the", "a", "an", "of", "in", "on", "at", "to", "for", "with", "from",
    "by", "as", "and", "or", "but", "not", "no", "is", "are", "was", "were",
    "be", "been", "it", "its", "this", "that", "these", "those", "there",
    "i", "we", "you", "he", "she", "they", "them", "his", "her", "their",
    "our", "my", "your", "very", "so", "such", "some", "all", "any", "each",
    "into", "over", "under", "about", "after", "before", "while", "than",
})

_NOUN_TAGS = ("NN", "NOUN", "PROPN")
_GERUND_TAGS = ("VBG",)


class CorpusReadError(OSError):
    """Raised when a corpus document cannot be read."""


@dataclass(frozen=True)
class PatternSpec:
    """A "<head_noun> <connective> <y>" extraction pattern."""

    head_noun: str
    connective: str = "of"
    capture_max_tokens: int = 5

    def __post_init__(self) -> None:
        if self.capture_max_tokens < 1:
            raise ValueError("capture_max_tokens must be >= 1")
        if not self.head_noun or not self.head_noun.isalpha() or not self.head_noun.islower():
            raise ValueError("head_noun must be lowercase alphabetic")


@dataclass(frozen=True)
class CandidatePhrase:
    """A phrase captured by a perception pattern.

    ``text`` is the normalized token sequence, ``provenance`` one
    (doc id, sentence index) entry per occurrence; ``frequency`` always
    equals ``len(provenance)``.
    """

    text: tuple[str, ...]
    kind: str  # "sound" | "smell"
    frequency: int
    provenance: tuple[tuple[str, int], ...]
    pos: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("phrase text must be non-empty")
        if self.frequency != len(self.provenance):
            raise ValueError("frequency must equal the number of provenance entries")

    @property
    def phrase(self) -> str:
        return " ".join(self.text)

    def to_dict(self) -> dict:
        rec = {
            "v": 1,
            "type": "candidate_phrase",
            "text": list(self.text),
            "kind": self.kind,
            "frequency": self.frequency,
            "provenance": [list(p) for p in self.provenance],
        }
        if self.pos is not None:
            rec["pos"] = list(self.pos)
        return rec

    @classmethod
    def from_dict(cls, rec: dict) -> "CandidatePhrase":
        return cls(
            text=tuple(rec["text"]),
            kind=rec["kind"],
            frequency=rec["frequency"],
            provenance=tuple((p[0], p[1]) for p in rec["provenance"]),
            pos=tuple(rec["pos"]) if rec.get("pos") else None,
        )


@dataclass(frozen=True)
class SoundSourcePair:
    """A plausible (sound, source) pair derived from a gerund bi-gram."""

    sound: str
    source: str
    origin: CandidatePhrase
    surface_order: str  # "verb-noun" | "noun-verb"

    def __post_init__(self) -> None:
        if not self.sound.endswith("ing"):
            raise ValueError("sound token must end in -ing")
        if self.sound == self.source:
            raise ValueError("sound and source must differ")
        if len(self.origin.text) != 2:
            raise ValueError("origin phrase must be a bi-gram")

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "type": "sound_source_pair",
            "sound": self.sound,
            "source": self.source,
            "surface_order": self.surface_order,
            "origin": self.origin.to_dict(),
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "SoundSourcePair":
        return cls(
            sound=rec["sound"],
            source=rec["source"],
            origin=CandidatePhrase.from_dict(rec["origin"]),
            surface_order=rec["surface_order"],
        )


def normalize_phrase(raw: str) -> list[str]:
    """Lowercase, whitespace-split and strip per-token edge punctuation.

    Idempotent: normalize(normalize(x)) == normalize(x).
    """
    out = []
    for tok in raw.lower().split():
        core = tok.strip(_STRIP_CHARS)
        if core:
            out.append(core)
    return out


@dataclass(frozen=True)
class _Tok:
    core: str            # normalized token text, "" if pure punctuation
    boundary_after: bool  # trailing punctuation closes a capture window
    pos: str | None = None


def _tokenize(sentence: str) -> list[_Tok]:
    toks = []
    for raw in sentence.lower().split():
        core = raw.strip(_STRIP_CHARS)
        boundary = bool(raw) and raw[-1] in _BOUNDARY_TRAIL
        toks.append(_Tok(core=core, boundary_after=boundary))
    return toks


def split_sentences(text: str) -> list[str]:
    """Split on ., ! or ? followed by whitespace."""
    return [s for s in _SENT_SPLIT.split(text) if s.strip()]


# ---------------------------------------------------------------------------
# corpus readers

def _looks_tagged(first_line: str) -> bool:
    parts = first_line.rstrip("\n").split("\t")
    return len(parts) == 2 and bool(parts[0]) and bool(parts[1])


def _read_tagged(path: Path) -> list[list[_Tok]]:
    """token<TAB>POS file: blank lines separate sentences."""
    sentences: list[list[_Tok]] = []
    current: list[_Tok] = []
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                if current:
                    sentences.append(current)
                    current = []
                continue
            parts = line.split("\t")
            form = parts[0].lower()
            pos = parts[1] if len(parts) > 1 and parts[1] else None
            core = form.strip(_STRIP_CHARS)
            boundary = bool(form) and form[-1] in _BOUNDARY_TRAIL
            if not core and pos is None:
                boundary = True
            current.append(_Tok(core=core, boundary_after=boundary, pos=pos))
    if current:
        sentences.append(current)
    return sentences


def iter_corpus(path: str | Path) -> Iterator[tuple[str, list[list[_Tok]]]]:
    """Yield (doc id, tokenized sentences) units from a file or directory.

    Plain text files: every non-empty line is one document. Files whose
    first line is token<TAB>POS are read as one tagged document with
    blank-line sentence breaks.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.rglob("*") if p.is_file())
    else:
        files = [path]
    for fp in files:
        try:
            with fp.open("r", encoding="utf-8") as fh:
                first = fh.readline()
        except OSError as exc:
            raise CorpusReadError(f"cannot read corpus document {fp}: {exc}") from exc
        if first and _looks_tagged(first):
            yield str(fp.name), _read_tagged(fp)
            continue
        try:
            with fp.open("r", encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.strip()
                    if line:
                        yield f"{fp.name}#{lineno}", [_tokenize(s) for s in split_sentences(line)]
        except OSError as exc:
            raise CorpusReadError(f"cannot read corpus document {fp}: {exc}") from exc


def _as_units(corpus: Iterable) -> Iterator[tuple[str, list[list[_Tok]]]]:
    """Accept (doc id, raw text) or (doc id, tokenized sentences) streams."""
    for doc_id, payload in corpus:
        if isinstance(payload, str):
            yield doc_id, [_tokenize(s) for s in split_sentences(payload)]
        else:
            yield doc_id, payload


# ---------------------------------------------------------------------------
# pattern extraction

def _match_sentence(toks: Sequence[_Tok], spec: PatternSpec) -> list[tuple[tuple[str, ...], tuple[str, ...] | None]]:
    """All pattern captures in one sentence.

    A capture starts after "head connective", ends at the first punctuation
    boundary, a re-occurrence of the head noun, the sentence end or the token
    cap, whichever comes first.
    """
    found = []
    for i in range(len(toks) - 2):
        head, conn = toks[i], toks[i + 1]
        if head.core != spec.head_noun or conn.core != spec.connective:
            continue
        if head.boundary_after or conn.boundary_after:
            continue
        words: list[str] = []
        tags: list[str] = []
        tagged = True
        for tok in toks[i + 2:]:
            if not tok.core:
                break
            if tok.core == spec.head_noun:
                break
            words.append(tok.core)
            if tok.pos is None:
                tagged = False
            else:
                tags.append(tok.pos)
            if tok.boundary_after or len(words) >= spec.capture_max_tokens:
                break
        if words:
            found.append((tuple(words), tuple(tags) if tagged else None))
    return found


def _mine_unit(unit: tuple[str, list[list[_Tok]]], spec: PatternSpec):
    doc_id, sentences = unit
    hits = []
    for sent_idx, toks in enumerate(sentences):
        for words, tags in _match_sentence(toks, spec):
            hits.append((words, tags, (doc_id, sent_idx)))
    return hits


def extract_pattern_phrases(
    corpus: Iterable,
    spec: PatternSpec,
    threads: int = 1,
) -> list[CandidatePhrase]:
    """Mine every phrase occurring after ``head_noun connective``.

    ``corpus`` is a stream of (doc id, text) or (doc id, tokenized
    sentences). Occurrence counts are exact; output is sorted by
    (frequency desc, text asc) and stable across thread counts.
    """
    kind = spec.head_noun if spec.head_noun in ("sound", "smell") else "sound"
    merged: dict[tuple[str, ...], list[tuple[str, int]]] = {}
    pos_sample: dict[tuple[str, ...], tuple[str, ...] | None] = {}

    units = _as_units(corpus)
    if threads <= 1:
        for unit in units:
            _merge_hits(merged, pos_sample, _mine_unit(unit, spec))
    else:
        def mine_shard(shard: list) -> list:
            return [h for u in shard for h in _mine_unit(u, spec)]

        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = []
            while True:
                shard = list(itertools.islice(units, 64))
                if not shard:
                    break
                futures.append(pool.submit(mine_shard, shard))
            for fut in futures:  # merge order = shard submission order
                _merge_hits(merged, pos_sample, fut.result())

    phrases = [
        CandidatePhrase(
            text=text,
            kind=kind,
            frequency=len(prov),
            provenance=tuple(prov),
            pos=pos_sample.get(text),
        )
        for text, prov in merged.items()
    ]
    phrases.sort(key=lambda p: (-p.frequency, p.text))
    return phrases


def _merge_hits(merged, pos_sample, hits) -> None:
    for words, tags, prov in hits:
        bucket = merged.setdefault(words, [])
        bucket.append(prov)
        if words not in pos_sample:
            pos_sample[words] = tags


# ---------------------------------------------------------------------------
# gerund bi-gram pairs

def load_noun_lexicon() -> frozenset[str]:
    text = resources.files("senscommon.data").joinpath("nouns.txt").read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip() and not w.startswith("#"))


def is_gerund(token: str, pos: str | None = None) -> bool:
    """-ing suffix heuristic; an explicit POS tag overrides it.

    The -ing suffix itself is always required (pair orientation depends on it),
    a tag only settles whether the token is verbal.
    """
    if not token.endswith("ing"):
        return False
    if pos is not None:
        return pos in _GERUND_TAGS or pos.startswith("VB") or pos == "VERB"
    return len(token) >= 5 and token not in GERUND_EXCLUSIONS


def is_plausible_noun(token: str, pos: str | None = None, lexicon: frozenset[str] | None = None) -> bool:
    """Known nouns pass, function words fail, unknown tokens default to plausible."""
    if pos is not None:
        if pos.startswith(_NOUN_TAGS):
            return True
        if pos.startswith(("VB", "JJ", "RB", "DT", "IN", "PRP", "CC", "TO", "MD")):
            return False
    if lexicon and token in lexicon:
        return True
    return token not in FUNCTION_WORDS


def filter_bigram_pairs(
    phrases: Iterable[CandidatePhrase],
    lexicon: frozenset[str] | None = None,
) -> list[SoundSourcePair]:
    """Keep 2-token phrases pairing a gerund with a plausible noun.

    The -ing token becomes the sound and the partner the source for both
    surface orders. Non-qualifying phrases are dropped; the drop count is
    logged.
    """
    if lexicon is None:
        lexicon = load_noun_lexicon()
    pairs = []
    dropped = 0
    for ph in phrases:
        pair = _pair_from_phrase(ph, lexicon)
        if pair is None:
            dropped += 1
        else:
            pairs.append(pair)
    logger.info("filter_bigram_pairs: kept %d pairs, dropped %d phrases", len(pairs), dropped)
    return pairs


def _pair_from_phrase(ph: CandidatePhrase, lexicon: frozenset[str]) -> SoundSourcePair | None:
    if len(ph.text) != 2:
        return None
    t0, t1 = ph.text
    p0, p1 = (ph.pos if ph.pos and len(ph.pos) == 2 else (None, None))
    g0, g1 = is_gerund(t0, p0), is_gerund(t1, p1)
    if g0 == g1:
        return None
    if g0:
        sound, source, src_pos, order = t0, t1, p1, "verb-noun"
    else:
        sound, source, src_pos, order = t1, t0, p0, "noun-verb"
    if not is_plausible_noun(source, src_pos, lexicon):
        return None
    if sound == source:
        return None
    return SoundSourcePair(sound=sound, source=source, origin=ph, surface_order=order)


def bigram_fraction(phrases: Sequence[CandidatePhrase]) -> float:
    """Fraction of mined phrases that are gerund bi-grams (reported, not asserted)."""
    if not phrases:
        return 0.0
    lexicon = load_noun_lexicon()
    n_bigram = sum(1 for p in phrases if _pair_from_phrase(p, lexicon) is not None)
    return n_bigram / len(phrases)
