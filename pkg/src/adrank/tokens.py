"""Token normalization shared by the embedding, lexical and data layers.

Rule: lowercase, strip leading/trailing non-alphanumeric characters,
keep interior apostrophes and hyphens (brand tokens survive).
"""

import re

_BOUNDARY = re.compile(r"^[^0-9a-z]+|[^0-9a-z]+$")


def normalize_token(token: str) -> str:
    """Normalize a single token; may return an empty string."""
    return _BOUNDARY.sub("", token.lower())


def tokenize(text: str) -> list[str]:
    """Whitespace-split and normalize, dropping tokens that normalize away."""
    out = []
    for raw in text.split():
        tok = normalize_token(raw)
        if tok:
            out.append(tok)
    return out
