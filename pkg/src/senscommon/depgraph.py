"""Dependency-graph side of the pipeline.

Reads pre-parsed sentences (CoNLL-U), finds scene + sound co-mentions,
computes direction-annotated shortest paths between mention heads and
ranks path signatures by how many distinct argument pairs they occur with.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from . import mining

logger = logging.getLogger(__name__)

SCENE_PLACEHOLDER = "scene"
SOUND_PLACEHOLDER = "sound"

Span = tuple[int, int]  # inclusive 1-based token range


class ParseError(ValueError):
    pass


class EmptyParseError(ParseError):
    """A parse stream with zero valid sentences."""


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    lemma: str
    upos: str
    xpos: str = "_"


@dataclass(frozen=True)
class DepGraph:
    """One parsed sentence: 1-based tokens, (head, dependent, label) edges.

    Exactly one token hangs off the virtual root (head 0); that attachment
    is kept in ``root`` rather than in ``edges``.
    """

    tokens: tuple[Token, ...]
    edges: tuple[tuple[int, int, str], ...]
    root: int
    sentence_id: tuple[str, int]

    def __post_init__(self) -> None:
        ids = [t.index for t in self.tokens]
        if ids != list(range(1, len(ids) + 1)):
            raise ParseError(f"{self.sentence_id}: token indices must be 1..n and unique")
        valid = set(ids)
        for head, dep, label in self.edges:
            if head not in valid or dep not in valid:
                raise ParseError(f"{self.sentence_id}: edge ({head},{dep},{label}) references a missing token")
        if self.root not in valid:
            raise ParseError(f"{self.sentence_id}: root index {self.root} missing")
        if len(self.edges) != len(self.tokens) - 1:
            raise ParseError(f"{self.sentence_id}: expected {len(self.tokens) - 1} edges, got {len(self.edges)}")

    def token(self, index: int) -> Token:
        return self.tokens[index - 1]

    @property
    def forms(self) -> tuple[str, ...]:
        return tuple(t.form for t in self.tokens)

    def head_of(self, index: int) -> int:
        if index == self.root:
            return 0
        for head, dep, _ in self.edges:
            if dep == index:
                return head
        raise PathError(f"token {index} has no head")

    def span_head(self, span: Span) -> int:
        """The span token whose head lies outside the span."""
        lo, hi = span
        inside = set(range(lo, hi + 1))
        heads = [i for i in inside if self.head_of(i) not in inside]
        if not heads:
            raise PathError(f"span {span} has no external head")
        return min(heads)


@dataclass(frozen=True)
class PathSignature:
    """Direction-annotated shortest path between two mention heads.

    Steps are (relation label, up|down, lemma of the node stepped onto);
    endpoint lemmas are replaced by role placeholders so signatures
    aggregate across argument pairs.
    """

    steps: tuple[tuple[str, str, str], ...]
    endpoint_roles: tuple[str, str] = (SCENE_PLACEHOLDER, SOUND_PLACEHOLDER)

    @property
    def text(self) -> str:
        inner = " ".join(f"{d}:{l}:{n}" for l, d, n in self.steps)
        return f"{self.endpoint_roles[0]} {inner}".strip()

    def to_tokens(self) -> list[str]:
        """Flat token rendering used by sequence encoders."""
        toks = [self.endpoint_roles[0]]
        for label, direction, node in self.steps:
            toks.extend((direction, label, node))
        return toks

    def to_dict(self) -> dict:
        return {"steps": [list(s) for s in self.steps], "endpoint_roles": list(self.endpoint_roles)}

    @classmethod
    def from_dict(cls, rec: dict) -> "PathSignature":
        return cls(
            steps=tuple(tuple(s) for s in rec["steps"]),
            endpoint_roles=tuple(rec["endpoint_roles"]),
        )


@dataclass(frozen=True)
class SoundScenePair:
    scene: str
    sound_phrase: str
    sentence: tuple[str, int]
    path: PathSignature
    sentence_text: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "type": "sound_scene_pair",
            "scene": self.scene,
            "sound_phrase": self.sound_phrase,
            "sentence": list(self.sentence),
            "path": self.path.to_dict(),
            "sentence_text": list(self.sentence_text),
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "SoundScenePair":
        return cls(
            scene=rec["scene"],
            sound_phrase=rec["sound_phrase"],
            sentence=tuple(rec["sentence"]),
            path=PathSignature.from_dict(rec["path"]),
            sentence_text=tuple(rec["sentence_text"]),
        )


# ---------------------------------------------------------------------------
# CoNLL-U reading

@dataclass
class ConlluParse:
    graphs: list[DepGraph]
    skipped: int


def parse_conllu(source: str | Path, doc_id: str | None = None) -> ConlluParse:
    """Read 10-column CoNLL-U; blank lines separate sentences.

    Multiword ranges (1-2) and empty nodes (1.1) are ignored; a sentence
    that fails validation is skipped and counted.
    """
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read parse file {path}: {exc}") from exc
    doc = doc_id if doc_id is not None else path.name

    graphs: list[DepGraph] = []
    skipped = 0
    sent_idx = 0
    for block in text.split("\n\n"):
        rows = [ln for ln in block.splitlines() if ln.strip() and not ln.startswith("#")]
        if not rows:
            continue
        graph = _graph_from_rows(rows, (doc, sent_idx))
        if graph is None:
            skipped += 1
            logger.warning("parse_conllu: skipped malformed sentence %d in %s", sent_idx, doc)
        else:
            graphs.append(graph)
        sent_idx += 1
    if not graphs:
        raise EmptyParseError(f"{doc}: empty parse, no valid sentences")
    return ConlluParse(graphs=graphs, skipped=skipped)


def _graph_from_rows(rows: Sequence[str], sentence_id: tuple[str, int]) -> DepGraph | None:
    tokens: list[Token] = []
    attach: list[tuple[int, int, str]] = []
    roots: list[int] = []
    for row in rows:
        cols = row.split("\t")
        if len(cols) != 10:
            return None
        tid = cols[0]
        if "-" in tid or "." in tid:  # multiword token ranges / empty nodes
            continue
        try:
            idx = int(tid)
            head = int(cols[6])
        except ValueError:
            return None
        tokens.append(Token(index=idx, form=cols[1].lower(), lemma=cols[2].lower(),
                            upos=cols[3], xpos=cols[4]))
        if head == 0:
            roots.append(idx)
        else:
            attach.append((head, idx, cols[7]))
    if not tokens or len(roots) != 1:
        return None
    try:
        return DepGraph(
            tokens=tuple(tokens),
            edges=tuple(attach),
            root=roots[0],
            sentence_id=sentence_id,
        )
    except ParseError:
        return None


def load_scene_lexicon(path: str | Path | None = None) -> list[tuple[str, ...]]:
    """Scene entries as lemma tuples, longest first (greedy matching)."""
    if path is None:
        text = resources.files("senscommon.data").joinpath("scenes.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    entries = []
    for line in text.splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            entries.append(tuple(line.split()))
    entries.sort(key=lambda e: (-len(e), e))
    return entries


# ---------------------------------------------------------------------------
# co-mention detection

def find_comentions(
    graph: DepGraph,
    scenes: Sequence[tuple[str, ...] | str],
    sound_phrases: Iterable[Sequence[str]],
) -> list[tuple[Span, Span]]:
    """(scene span, sound span) pairs mentioned in one sentence.

    Scenes match on exact lemma sequences; sounds match the mined phrase
    set on surface forms plus the adjacent gerund bi-gram rule. Overlapping
    span pairs are excluded.
    """
    scene_entries = [tuple(s.split()) if isinstance(s, str) else tuple(s) for s in scenes]
    scene_spans = _match_lexicon(graph, scene_entries, use_lemma=True)
    sound_spans = set(_match_lexicon(graph, [tuple(p) for p in sound_phrases], use_lemma=False))
    # known phrases beat the heuristic: bigram spans clashing with one are noise
    for span in _gerund_bigram_spans(graph):
        if not any(_overlap(span, known) for known in sound_spans):
            sound_spans.add(span)

    out = []
    for sc in scene_spans:
        for sd in sorted(sound_spans):
            if _overlap(sc, sd):
                continue
            out.append((sc, sd))
    out.sort()
    return out


def _match_lexicon(graph: DepGraph, entries: Sequence[tuple[str, ...]], use_lemma: bool) -> list[Span]:
    words = [(t.lemma if use_lemma else t.form) for t in graph.tokens]
    spans: list[Span] = []
    for entry in entries:
        if not entry:
            continue
        n = len(entry)
        for i in range(len(words) - n + 1):
            if tuple(words[i:i + n]) == entry:
                spans.append((i + 1, i + n))
    return sorted(set(spans))


def _gerund_bigram_spans(graph: DepGraph) -> list[Span]:
    spans = []
    toks = graph.tokens
    for i in range(len(toks) - 1):
        a, b = toks[i], toks[i + 1]
        pa = a.xpos if a.xpos != "_" else a.upos
        pb = b.xpos if b.xpos != "_" else b.upos
        ga = mining.is_gerund(a.form, pa)
        gb = mining.is_gerund(b.form, pb)
        if ga == gb:
            continue
        noun = b if ga else a
        npos = pb if ga else pa
        if mining.is_plausible_noun(noun.form, npos):
            spans.append((a.index, b.index))
    return spans


def _overlap(a: Span, b: Span) -> bool:
    return not (a[1] < b[0] or b[1] < a[0])


# ---------------------------------------------------------------------------
# shortest paths

def shortest_path(
    graph: DepGraph,
    a: Span,
    b: Span,
    roles: tuple[str, str] = (SCENE_PLACEHOLDER, SOUND_PLACEHOLDER),
) -> PathSignature:
    """Shortest path between the head tokens of spans a and b.

    Edges are traversable both ways; each step carries the dependency
    label, up (dependent to head) or down, and the lemma of the node
    reached (role placeholders at the endpoints). Length ties break on the
    lexicographically smallest step sequence.
    """
    if tuple(a) == tuple(b):
        raise PathError("identical endpoints")
    if _overlap(a, b):
        raise PathError(f"spans {a} and {b} overlap")
    start = graph.span_head(a)
    goal = graph.span_head(b)
    if start == goal:
        raise PathError("identical endpoints")

    adj: dict[int, list[tuple[int, str, str]]] = {t.index: [] for t in graph.tokens}
    for head, dep, label in graph.edges:
        adj[head].append((dep, label, "down"))
        adj[dep].append((head, label, "up"))
    for nbrs in adj.values():
        nbrs.sort(key=lambda x: (x[1], x[2], x[0]))

    # BFS by level, keeping the lexicographically smallest label sequence per node
    best: dict[int, tuple[tuple, list[tuple[str, str, int]]]] = {
        start: ((), [])
    }
    frontier = [start]
    while frontier and goal not in best:
        level: dict[int, tuple[tuple, list[tuple[str, str, int]]]] = {}
        for node in frontier:
            key, steps = best[node]
            for nxt, label, direction in adj[node]:
                if nxt in best:
                    continue
                cand_key = key + ((label, direction),)
                cand = (cand_key, steps + [(label, direction, nxt)])
                cur = level.get(nxt)
                if cur is None or cand_key < cur[0]:
                    level[nxt] = cand
        best.update(level)
        frontier = sorted(level)
    if goal not in best:
        raise PathError(f"no path between {a} and {b}")

    raw_steps = best[goal][1]
    steps = []
    for label, direction, node in raw_steps:
        if node == goal:
            name = roles[1]
        else:
            name = graph.token(node).lemma
        steps.append((label, direction, name))
    return PathSignature(steps=tuple(steps), endpoint_roles=roles)


def path_length(sig: PathSignature) -> int:
    return len(sig.steps)


# ---------------------------------------------------------------------------
# ranking

def extract_scene_pairs(
    graphs: Iterable[DepGraph],
    scenes: Sequence[tuple[str, ...] | str],
    sound_phrases: Iterable[Sequence[str]],
) -> list[SoundScenePair]:
    """Run co-mention detection + shortest paths over a parsed corpus."""
    phrase_list = [tuple(p) for p in sound_phrases]
    pairs = []
    for graph in graphs:
        for scene_span, sound_span in find_comentions(graph, scenes, phrase_list):
            try:
                sig = shortest_path(graph, scene_span, sound_span)
            except PathError:
                continue
            scene_text = " ".join(graph.token(i).lemma for i in range(scene_span[0], scene_span[1] + 1))
            sound_text = " ".join(graph.token(i).form for i in range(sound_span[0], sound_span[1] + 1))
            pairs.append(SoundScenePair(
                scene=scene_text,
                sound_phrase=sound_text,
                sentence=graph.sentence_id,
                path=sig,
                sentence_text=graph.forms,
            ))
    return pairs


def rank_paths_by_frequency(
    pairs: Sequence[SoundScenePair],
    min_freq: int = 2,
) -> tuple[list[tuple[str, int]], list[SoundScenePair]]:
    """Signatures ranked by how many distinct (scene, sound) pairs use them.

    Returns (ranked (signature text, frequency) list, pairs whose signature
    frequency >= min_freq). Invariant under permutation of the input.
    """
    args_by_sig: dict[str, set[tuple[str, str]]] = {}
    for p in pairs:
        args_by_sig.setdefault(p.path.text, set()).add((p.scene, p.sound_phrase))
    ranked = sorted(
        ((sig, len(args)) for sig, args in args_by_sig.items()),
        key=lambda kv: (-kv[1], kv[0]),
    )
    keep = {sig for sig, freq in ranked if freq >= min_freq}
    plausible = sorted(
        (p for p in pairs if p.path.text in keep),
        key=lambda p: (p.scene, p.sound_phrase, p.sentence, p.path.text),
    )
    return ranked, plausible
