"""Word-vector table: text-format loading and unit-normalized lookup."""

from __future__ import annotations

import warnings

import numpy as np

from weblearn.errors import DataError
from weblearn.stemming import stem


class EmbeddingTable:
    """Maps words to unit-normalized vectors of a fixed dimension.

    ``lookup`` falls back to the Porter stem of a missing token so that
    inflected metadata still matches ("walking" hits a table that only
    carries "walk").
    """

    def __init__(self, vectors: dict[str, np.ndarray], dim: int):
        self.dim = dim
        self._vectors = vectors

    def __len__(self):
        return len(self._vectors)

    def __contains__(self, word: str) -> bool:
        return word in self._vectors

    def lookup(self, word: str) -> np.ndarray | None:
        vec = self._vectors.get(word)
        if vec is None and word:
            vec = self._vectors.get(stem(word))
        return vec

    def cosine(self, a: str, b: str) -> float | None:
        va, vb = self.lookup(a), self.lookup(b)
        if va is None or vb is None:
            return None
        return float(va @ vb)

    @classmethod
    def from_pairs(cls, pairs: dict[str, list[float]]) -> "EmbeddingTable":
        """Build a table from raw (word, vector) pairs; vectors are unit
        normalized, zero-norm vectors rejected."""
        dim = None
        vectors: dict[str, np.ndarray] = {}
        for word, raw in pairs.items():
            vec = np.asarray(raw, dtype=np.float64)
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise DataError(f"embedding for {word!r} has dim {vec.shape[0]}, expected {dim}")
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise DataError(f"embedding for {word!r} has zero norm")
            vectors[word] = vec / norm
        return cls(vectors, int(dim or 0))


def load_embeddings(path: str) -> EmbeddingTable:
    """Load a text-format word-vector file.

    Format: optional ``count dim`` header line, then one
    ``word f1 f2 ... fdim`` per line, space separated.  Duplicate words
    warn and keep the last entry.
    """
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if line_no == 1 and len(parts) == 2:
                try:
                    _count, dim = int(parts[0]), int(parts[1])
                    continue
                except ValueError:
                    pass  # not a header; fall through and parse as a vector line
            word, fields = parts[0], parts[1:]
            if dim is None:
                dim = len(fields)
            if len(fields) != dim:
                raise DataError(f"{path}: line {line_no}: expected {dim} values, got {len(fields)}")
            try:
                vec = np.array([float(f) for f in fields], dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"{path}: line {line_no}: non-numeric value ({exc})") from exc
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise DataError(f"{path}: line {line_no}: vector for {word!r} has zero norm")
            if word in vectors:
                warnings.warn(f"{path}: duplicate word {word!r} on line {line_no}; keeping the last")
            vectors[word] = vec / norm
    if dim is None:
        raise DataError(f"{path}: empty embedding file")
    return EmbeddingTable(vectors, dim)
