"""Pre-trained word vectors: loading, averaging, feature substitution, 2-D projection."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .features import FeatureBundle

__all__ = [
    "EmbeddingTable",
    "load_embeddings",
    "embed_tokens",
    "lexical_words",
    "substitute_embedding",
    "project_2d",
]


SUBSTITUTABLE = {"predicate": "predicate", "head_word": "head_word", "headword": "head_word"}


@dataclass
class EmbeddingTable:
    dimension: int = 50
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension <= 0:
            raise ValueError("dimension must be positive")
        for word, vec in self.entries.items():
            if np.shape(vec) != (self.dimension,):
                raise ValueError(f"vector for {word!r} does not have dimension {self.dimension}")

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, word: str):
        return self.entries.get(word.lower())

    def __getitem__(self, word: str) -> np.ndarray:
        vec = self.get(word)
        if vec is None:
            raise KeyError(word)
        return vec


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Read a word2vec/GloVe style text file.

    An optional first line ``V D`` declares vocabulary size and dimension;
    every other line is ``word v1 ... vD``. Words are lower-cased.
    """
    entries: dict[str, np.ndarray] = {}
    dim = None
    declared = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                declared, dim = int(parts[0]), int(parts[1])
                continue
            word, fields = parts[0].lower(), parts[1:]
            if dim is None:
                dim = len(fields)
            if len(fields) != dim:
                raise ValueError(f"{path}:{lineno}: expected {dim} values, found {len(fields)}")
            try:
                vec = np.array([float(f) for f in fields])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric vector component") from None
            if word in entries:
                warnings.warn(f"{path}:{lineno}: duplicate word {word!r}, keeping last")
            entries[word] = vec
    if dim is None or dim == 0:
        raise ValueError(f"{path}: no vectors found")
    if declared is not None and declared != len(entries):
        warnings.warn(f"{path}: header declares {declared} words but {len(entries)} were read")
    return EmbeddingTable(dim, entries)


def embed_tokens(words: Sequence[str], table: EmbeddingTable) -> np.ndarray:
    """Mean vector of ``words``; unknown words count as zero vectors."""
    total = np.zeros(table.dimension)
    if not words:
        return total
    for word in words:
        vec = table.get(word)
        if vec is not None:
            total = total + vec
    return total / len(words)


def lexical_words(token: str, table: EmbeddingTable) -> list[str]:
    """Split a multiword token unless the table knows it as a whole."""
    if token in table:
        return [token]
    return token.replace("_", " ").split()


def substitute_embedding(bundle: FeatureBundle, which: str, table: EmbeddingTable) -> FeatureBundle:
    """Replace a lexical template by the averaged vector of its words."""
    template = SUBSTITUTABLE.get(which.replace("-", "_").lower())
    if template is None:
        raise ValueError(f"cannot substitute embeddings for {which!r}")
    if template not in bundle.values:
        raise ValueError(f"template {template!r} is not part of this feature bundle")
    values = {k: v for k, v in bundle.values.items() if k != template}
    dense = dict(bundle.dense)
    dense[template] = embed_tokens(lexical_words(str(bundle.values[template]), table), table)
    return FeatureBundle(values, dense)


def project_2d(table: EmbeddingTable, words: Sequence[str]) -> list[tuple[str, float, float]]:
    """Coordinates of ``words`` on the first two principal components.

    Each axis is oriented so that its largest-magnitude loading is positive,
    which makes the output independent of the SVD's sign convention.
    """
    words = list(words)
    if len(words) < 3:
        raise ValueError("need at least 3 words to project")
    X = np.vstack([table[w] for w in words])
    Xc = X - X.mean(axis=0)
    if not np.any(np.abs(Xc) > 0):
        raise ValueError("selected vectors have zero variance")
    _, _, vt = np.linalg.svd(Xc, full_matrices=False)
    axes = []
    for v in vt[:2]:
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        axes.append(v)
    if len(axes) < 2:
        axes.append(np.zeros(table.dimension))
    coords = Xc @ np.column_stack(axes)
    return [(w, float(x), float(y)) for w, (x, y) in zip(words, coords)]
