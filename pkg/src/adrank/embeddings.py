"""Word-embedding table: loading, lookup, aggregation, cosine distance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, FormatError, ParseError
from .tokens import normalize_token

SemVector = np.ndarray


@dataclass
class EmbeddingTable:
    """Vocabulary-to-vector map, immutable after load."""

    dim: int
    entries: dict[str, np.ndarray] = field(default_factory=dict)

    def __contains__(self, token: str) -> bool:
        return normalize_token(token) in self.entries


def load_embeddings(path) -> EmbeddingTable:
    """Read a text embedding file: optional "V D" header, then "token c1 .. cD" lines.

    Later duplicate tokens overwrite earlier ones. Tokens are lowercased.
    """
    dim = None
    entries: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    start = 0
    if lines:
        head = lines[0].split()
        if len(head) == 2:
            try:
                int(head[0]), int(head[1])
                dim = int(head[1])
                start = 1
            except ValueError:
                pass

    for lineno in range(start, len(lines)):
        line = lines[lineno]
        if not line.strip():
            continue
        parts = line.split()
        token = parts[0].lower()
        if not token:
            raise ParseError(f"line {lineno + 1}: empty token")
        try:
            vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"line {lineno + 1}: non-numeric component") from exc
        if dim is None:
            if vec.size == 0:
                raise ParseError(f"line {lineno + 1}: no components")
            dim = vec.size
        if vec.size != dim:
            raise ParseError(
                f"line {lineno + 1}: expected {dim} components, got {vec.size}"
            )
        if not np.all(np.isfinite(vec)):
            raise ParseError(f"line {lineno + 1}: non-finite component")
        entries[token] = vec

    if dim is None or not entries:
        raise FormatError(f"{path}: empty embedding file")
    return EmbeddingTable(dim=dim, entries=entries)


def save_embeddings(table: EmbeddingTable, path) -> None:
    """Write the table back in the text format (header included)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.entries)} {table.dim}\n")
        for token, vec in table.entries.items():
            comps = " ".join(repr(float(x)) for x in vec)
            fh.write(f"{token} {comps}\n")


def lookup(table: EmbeddingTable, token: str) -> SemVector | None:
    """Vector for a token after normalization, or None when out of vocabulary."""
    return table.entries.get(normalize_token(token))


def mean_embed(table: EmbeddingTable, tokens: list[str]) -> SemVector | None:
    """Arithmetic mean over in-vocabulary tokens (multiset semantics); None if all OOV."""
    vecs = [v for tok in tokens if (v := lookup(table, tok)) is not None]
    if not vecs:
        return None
    return np.mean(np.stack(vecs), axis=0)


def cosine_distance(a: SemVector, b: SemVector) -> float:
    """1 - cos(a, b) in [0, 2]; 1.0 when either vector has zero norm."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"vector lengths differ: {a.shape[0]} vs {b.shape[0]}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 1.0
    return float(1.0 - np.dot(a, b) / (na * nb))


def unit(v: SemVector) -> SemVector | None:
    """v / ||v||, or None for a zero vector."""
    n = np.linalg.norm(v)
    if n == 0.0:
        return None
    return v / n
