import hashlib
import math
import re
import unicodedata
from collections.abc import Iterable
from pathlib import Path

import numpy as np

_PUNCTUATION = re.compile(r"[^\w\s]|_")
_WHITESPACE = re.compile(r"\s+")


def normalize(text: str) -> str:
    """
    Normalize text for phrase matching by:
    1. Applying Unicode compatibility folding (NFKC)
    2. Case folding
    3. Replacing punctuation with spaces
    4. Collapsing runs of whitespace to a single space
    """

    # Step 1: Full-width and ligature forms to their plain equivalents
    text = unicodedata.normalize("NFKC", text)

    # Step 2: Case folding (stronger than lower() for non-ASCII)
    text = text.casefold()

    # Step 3: Punctuation separates tokens, it never joins them
    text = _PUNCTUATION.sub(" ", text)

    # Step 4: Whitespace collapse
    return _WHITESPACE.sub(" ", text).strip()


def tokenize(text: str) -> list[str]:
    """Split normalized text into whitespace/punctuation-delimited tokens."""
    normalized = normalize(text)
    return normalized.split(" ") if normalized else []


def fsum(values: Iterable[float]) -> float:
    """Order-independent compensated sum."""
    return math.fsum(float(v) for v in values)


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Return the random stream of replicate ``index`` under master ``seed``.

    Streams are counter-based, so replicate ``index`` can be reproduced in
    isolation and results never depend on scheduling order.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def file_digest(path: Path) -> str:
    """SHA-256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
