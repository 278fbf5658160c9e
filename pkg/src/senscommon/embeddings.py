"""Pretrained word-vector loading and feature composition.

Vectors are read from the standard text format (optional "count dim"
header, then one "word v1 .. vd" line each) and combined into classifier
features by concatenation, difference or addition.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

COMPOSE_MODES = ("concat", "diff_src_snd", "diff_snd_src", "add")


class EmbeddingFormatError(ValueError):
    """Malformed embedding file."""


@dataclass(frozen=True)
class EmbeddingTable:
    """Immutable word -> float32 vector map with a fixed dimension."""

    dim: int
    entries: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def lookup(self, word: str) -> np.ndarray | None:
        """Exact-match lookup; None for out-of-vocabulary, never a zero vector."""
        return self.entries.get(word)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        with path.open("w", encoding="utf-8") as fh:
            fh.write(f"{len(self.entries)} {self.dim}\n")
            for word, vec in self.entries.items():
                fh.write(word + " " + " ".join(repr(float(x)) for x in vec) + "\n")


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    mode: str
    provenance: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.mode not in COMPOSE_MODES + ("lstm",):
            raise ValueError(f"unknown feature mode {self.mode!r}")


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Load a text-format embedding table.

    The header line, when present, pins the expected dimension. Duplicate
    words keep the last occurrence (counted and logged). Raises
    EmbeddingFormatError with the offending line number on ragged rows.
    """
    path = Path(path)
    entries: dict[str, np.ndarray] = {}
    dim: int | None = None
    duplicates = 0
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and parts[0].isdigit() and parts[1].isdigit():
                dim = int(parts[1])
                continue
            word, values = parts[0], parts[1:]
            if dim is not None and len(values) != dim:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {dim} values for {word!r}, got {len(values)}"
                )
            if dim is None:
                if not values:
                    raise EmbeddingFormatError(f"{path}:{lineno}: no vector values")
                dim = len(values)
            try:
                vec = np.asarray([float(v) for v in values], dtype=np.float32)
            except ValueError as exc:
                raise EmbeddingFormatError(f"{path}:{lineno}: {exc}") from exc
            if word in entries:
                duplicates += 1
            entries[word] = vec
    if not entries:
        raise EmbeddingFormatError(f"{path}: no vectors found")
    if duplicates:
        logger.warning("load_embeddings: %d duplicate words, last occurrence kept", duplicates)
    return EmbeddingTable(dim=dim, entries=entries)


def lookup(table: EmbeddingTable, word: str) -> np.ndarray | None:
    return table.lookup(word)


def compose(v_src: np.ndarray, v_snd: np.ndarray, mode: str) -> FeatureVector:
    """Combine a source and a sound vector into one feature vector.

    concat -> [v_src ; v_snd]; diff_src_snd -> v_src - v_snd;
    diff_snd_src -> v_snd - v_src; add -> v_src + v_snd.
    """
    if mode not in COMPOSE_MODES:
        raise ValueError(f"unknown compose mode {mode!r}")
    v_src = np.asarray(v_src, dtype=np.float32)
    v_snd = np.asarray(v_snd, dtype=np.float32)
    if v_src.shape != v_snd.shape or v_src.ndim != 1:
        raise ValueError(f"dimension mismatch: {v_src.shape} vs {v_snd.shape}")
    if mode == "concat":
        values = np.concatenate([v_src, v_snd])
    elif mode == "diff_src_snd":
        values = v_src - v_snd
    elif mode == "diff_snd_src":
        values = v_snd - v_src
    else:
        values = v_src + v_snd
    return FeatureVector(values=values, mode=mode, provenance=())


def phrase_vector(table: EmbeddingTable, tokens: list[str] | tuple[str, ...]) -> np.ndarray | None:
    """Elementwise sum over in-vocabulary tokens; None if any token is OOV."""
    vecs = []
    for tok in tokens:
        v = table.lookup(tok)
        if v is None:
            return None
        vecs.append(v)
    if not vecs:
        return None
    return np.sum(vecs, axis=0, dtype=np.float32)
