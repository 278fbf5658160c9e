"""Question generation, majority-vote aggregation and Fleiss kappa.

Candidates become fixed-template multiple-choice questions; worker
responses aggregate by strict majority; panel agreement is measured with
Fleiss' kappa over all offered answer options.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .mining import CandidatePhrase, SoundSourcePair

BINARY_OPTIONS = ("yes", "no", "notsure")
SENTIMENT_OPTIONS = ("pleasant", "unpleasant", "neutral", "notsure", "notasmell")
UNRESOLVED = "unresolved"

RELATIONS = (
    "soundSource",
    "soundScene",
    "smellSentiment",
    "soundPhraseCheck",
    "smellPhraseCheck",
)

_TEMPLATES = {
    "soundSource": "Is {sound} a sound produced by {source}?",
    "soundScene": "Is {sound} a sound you would hear at a {scene}?",
    "smellSentiment": "Does “{phrase}” refer to a smell that is pleasant, unpleasant or neutral?",
    "soundPhraseCheck": "Does the phrase “{phrase}” refer to a sound?",
    "smellPhraseCheck": "Does the phrase “{phrase}” refer to a smell?",
}

# majority label -> training class (None = excluded from datasets)
LABEL_MAP = {
    "yes": "positive",
    "no": "negative",
    "pleasant": "pleasant",
    "unpleasant": "unpleasant",
    "neutral": "neutral",
    "notsure": None,
    "notasmell": None,
    UNRESOLVED: None,
}

DEFAULT_RATERS = 3


class UnknownRelationError(ValueError):
    pass


def options_for(relation: str) -> tuple[str, ...]:
    if relation == "smellSentiment":
        return SENTIMENT_OPTIONS
    if relation in RELATIONS:
        return BINARY_OPTIONS
    raise UnknownRelationError(f"unknown relation {relation!r}")


@dataclass(frozen=True)
class AnnotationQuestion:
    id: str
    relation: str
    prompt: str
    options: tuple[str, ...]
    payload: dict
    context: str | None = None

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "id": self.id,
            "relation": self.relation,
            "prompt": self.prompt,
            "options": list(self.options),
            "payload": self.payload,
            "context": self.context,
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "AnnotationQuestion":
        return cls(
            id=rec["id"],
            relation=rec["relation"],
            prompt=rec["prompt"],
            options=tuple(rec["options"]),
            payload=rec["payload"],
            context=rec.get("context"),
        )


@dataclass(frozen=True)
class AnnotationResponse:
    question_id: str
    worker_id: str
    choice: str
    timestamp: float

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "question_id": self.question_id,
            "worker_id": self.worker_id,
            "choice": self.choice,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "AnnotationResponse":
        return cls(rec["question_id"], rec["worker_id"], rec["choice"], rec["timestamp"])


@dataclass(frozen=True)
class AgreementReport:
    relation: str
    n_items: int
    n_raters_per_item: int
    kappa: float | None
    category_proportions: dict[str, float]


def question_id(relation: str, payload: Mapping) -> str:
    blob = relation + "\x00" + json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def generate_question(candidate, relation: str, context: str | None = None) -> AnnotationQuestion:
    """Instantiate the fixed per-relation template for one candidate.

    ``candidate`` is a SoundSourcePair, a CandidatePhrase, or an already
    shaped payload mapping (as produced by the path-mining stage).
    """
    if relation not in RELATIONS:
        raise UnknownRelationError(f"unknown relation {relation!r}")
    payload = _payload_of(candidate, relation)
    prompt = _TEMPLATES[relation].format(**payload)
    qid = question_id(relation, payload)
    return AnnotationQuestion(
        id=qid,
        relation=relation,
        prompt=prompt,
        options=options_for(relation),
        payload=payload,
        context=context,
    )


def _payload_of(candidate, relation: str) -> dict:
    if isinstance(candidate, SoundSourcePair):
        return {
            "sound": candidate.sound,
            "source": candidate.source,
            "origin": list(candidate.origin.text),
            "surface_order": candidate.surface_order,
        }
    if isinstance(candidate, CandidatePhrase):
        return {"phrase": candidate.phrase, "tokens": list(candidate.text), "kind": candidate.kind}
    if isinstance(candidate, Mapping):
        payload = dict(candidate)
        for key in _template_fields(relation):
            if key not in payload:
                raise ValueError(f"payload for {relation} is missing {key!r}")
        return payload
    raise TypeError(f"cannot build a question from {type(candidate).__name__}")


def _template_fields(relation: str) -> tuple[str, ...]:
    if relation == "soundSource":
        return ("sound", "source")
    if relation == "soundScene":
        return ("sound", "scene")
    return ("phrase",)


def effective_responses(responses: Iterable[AnnotationResponse]) -> list[AnnotationResponse]:
    """Deduplicate by (question, worker): the latest submission wins."""
    best: dict[tuple[str, str], AnnotationResponse] = {}
    for r in responses:
        key = (r.question_id, r.worker_id)
        cur = best.get(key)
        if cur is None or (r.timestamp, r.choice) >= (cur.timestamp, cur.choice):
            best[key] = r
    return sorted(best.values(), key=lambda r: (r.question_id, r.timestamp, r.worker_id))


def aggregate_majority(responses: Sequence[AnnotationResponse]) -> str:
    """Strict-majority choice for one question's responses, else "unresolved"."""
    if not responses:
        raise ValueError("no responses to aggregate")
    qids = {r.question_id for r in responses}
    if len(qids) != 1:
        raise ValueError(f"responses span {len(qids)} questions")
    counts: dict[str, int] = {}
    for r in effective_responses(responses):
        counts[r.choice] = counts.get(r.choice, 0) + 1
    total = sum(counts.values())
    top = max(counts.values())
    if top * 2 > total:  # strict majority; at most one option can clear it
        return max(counts, key=lambda k: counts[k])
    return UNRESOLVED


def fleiss_kappa(matrix, n_raters: int | None = None) -> float:
    """Fleiss' kappa for an item x category count matrix.

    Every row must sum to the same rater count n >= 2 and there must be at
    least 2 items. All ratings in a single category (chance agreement 1) is
    the perfect-agreement limit, kappa = 1.
    """
    table = np.asarray(matrix, dtype=np.float64)
    if table.ndim != 2 or table.shape[0] < 2:
        raise ValueError("need a 2-D matrix with at least 2 items")
    if np.any(table < 0):
        raise ValueError("negative rating counts")
    row_sums = table.sum(axis=1)
    n = row_sums[0]
    if not np.all(row_sums == n):
        raise ValueError("ragged rating matrix: unequal row sums")
    if n_raters is not None and n != n_raters:
        raise ValueError(f"rows sum to {n}, expected {n_raters} raters")
    if n < 2:
        raise ValueError("need at least 2 raters per item")

    n_items = table.shape[0]
    p_cat = table.sum(axis=0) / (n_items * n)
    p_item = ((table * table).sum(axis=1) - n) / (n * (n - 1))
    p_bar = p_item.mean()
    p_exp = float(np.dot(p_cat, p_cat))
    if p_exp >= 1.0:
        return 1.0
    return float((p_bar - p_exp) / (1.0 - p_exp))


def category_proportions(matrix, options: Sequence[str]) -> dict[str, float]:
    table = np.asarray(matrix, dtype=np.float64)
    totals = table.sum()
    if totals == 0:
        return {opt: 0.0 for opt in options}
    props = table.sum(axis=0) / totals
    return {opt: float(p) for opt, p in zip(options, props)}


def build_rating_matrix(
    questions: Mapping[str, AnnotationQuestion],
    responses: Iterable[AnnotationResponse],
    relation: str,
    n_raters: int = DEFAULT_RATERS,
) -> tuple[list[str], np.ndarray]:
    """(item ids, item x category counts) over fully-answered questions.

    An item is fully answered once it has >= n_raters effective responses;
    the earliest n_raters by timestamp form its panel, so the matrix is stable
    as extra raters trickle in.
    """
    by_q: dict[str, list[AnnotationResponse]] = {}
    for r in effective_responses(responses):
        q = questions.get(r.question_id)
        if q is not None and q.relation == relation:
            by_q.setdefault(r.question_id, []).append(r)
    options = options_for(relation)
    col = {opt: i for i, opt in enumerate(options)}
    ids = []
    rows = []
    for qid in sorted(by_q):
        panel = sorted(by_q[qid], key=lambda r: (r.timestamp, r.worker_id))[:n_raters]
        if len(panel) < n_raters:
            continue
        row = [0] * len(options)
        for r in panel:
            row[col[r.choice]] += 1
        ids.append(qid)
        rows.append(row)
    matrix = np.asarray(rows, dtype=np.int64) if rows else np.zeros((0, len(options)), dtype=np.int64)
    return ids, matrix


def agreement_report(
    questions: Mapping[str, AnnotationQuestion],
    responses: Iterable[AnnotationResponse],
    relation: str,
    n_raters: int = DEFAULT_RATERS,
) -> AgreementReport:
    ids, matrix = build_rating_matrix(questions, responses, relation, n_raters)
    kappa = fleiss_kappa(matrix) if matrix.shape[0] >= 2 else None
    return AgreementReport(
        relation=relation,
        n_items=len(ids),
        n_raters_per_item=n_raters,
        kappa=kappa,
        category_proportions=category_proportions(matrix, options_for(relation)),
    )


def simulate_responses(
    questions: Sequence[AnnotationQuestion],
    n_workers: int = DEFAULT_RATERS,
    seed: int = 0,
    agree_prob: float = 0.8,
) -> list[AnnotationResponse]:
    """Deterministic stand-in for a worker pool.

    Each question gets a hidden "true" option from a hash of (seed, id);
    every simulated worker answers it with probability ``agree_prob`` and
    otherwise picks another option. Timestamps are logical counters so
    downstream artifacts are byte-stable.
    """
    responses = []
    tick = 0
    for q in questions:
        digest = hashlib.sha256(f"{seed}:{q.id}".encode()).digest()
        # hidden truth stays within the class-bearing options
        truth_idx = digest[0] % (3 if q.relation == "smellSentiment" else 2)
        for w in range(n_workers):
            r = np.random.default_rng([seed, w, int.from_bytes(digest[1:5], "big")])
            if r.random() < agree_prob:
                choice = q.options[truth_idx]
            else:
                others = [o for o in q.options if o != q.options[truth_idx]]
                choice = others[int(r.integers(len(others)))]
            responses.append(
                AnnotationResponse(
                    question_id=q.id,
                    worker_id=f"sim-{w}",
                    choice=choice,
                    timestamp=float(tick),
                )
            )
            tick += 1
    return responses
