"""Shared tokenization over record text fields."""

from __future__ import annotations

import re

from .normalize import PaperRecord

_SPLIT = re.compile(r"[\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Casefold and split on any non-alphanumeric character.

    Digits are kept, so "5G networks" becomes ["5g", "networks"].
    """
    return [t for t in _SPLIT.split(text.casefold()) if t]


def record_tokens(record: PaperRecord) -> list[str]:
    """Token stream of title, keywords and abstract, in that order."""
    tokens = tokenize(record.title)
    for keyword in record.keywords:
        tokens.extend(tokenize(keyword))
    if record.abstract:
        tokens.extend(tokenize(record.abstract))
    return tokens
