"""Promotion-intensity (talk) scores from firm documents and a keyword lexicon."""

import math
import re
from collections import defaultdict
from collections.abc import Iterable, Sequence
from importlib import resources
from pathlib import Path
from typing import Callable, NamedTuple

import pandas as pd

from .exceptions import DuplicateFirm, EmptyCorpus
from .models import DocumentTermStats, Lexicon, TalkScore
from .parsers.lexicon_parser import LexiconParser
from .utils import tokenize

Tokenizer = Callable[[str], list[str]]

_DOCUMENT_NAME = re.compile(r"^(?P<firm>.+)_(?P<year>\d{4})\.txt$")


class Document(NamedTuple):
    firm_id: str
    year: int
    text: str


def load_lexicon(path: str | Path) -> Lexicon:
    """Read a lexicon file (``phrase[TAB]weight`` per line, ``#`` comments).

    Raises:
        EmptyLexicon: the file has no entries
        InvalidWeight: a weight is non-positive or not a number
        DuplicatePhrase: two lines normalize to the same phrase
    """
    path = Path(path)
    parser = LexiconParser(source=str(path))
    with path.open(encoding="utf-8") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), ""):
            parser.feed(chunk)
    return parser.close()


def default_lexicon() -> Lexicon:
    """Return the packaged 50-phrase AI lexicon."""
    text = resources.files("aiwashing").joinpath("data/lexicon.txt").read_text("utf-8")
    return LexiconParser(source="aiwashing:data/lexicon.txt").feed_and_get_result(text)


def _phrase_index(
    lexicon: Lexicon, tokenizer: Tokenizer
) -> dict[str, list[tuple[tuple[str, ...], str]]]:
    """Map first token → candidate phrases, longest first."""
    index: dict[str, list[tuple[tuple[str, ...], str]]] = defaultdict(list)
    for phrase in lexicon.phrases:
        tokens = tuple(tokenizer(phrase))
        if tokens:
            index[tokens[0]].append((tokens, phrase))
    for candidates in index.values():
        candidates.sort(key=lambda item: (-len(item[0]), item[1]))
    return index


def scan_document(
    text: str,
    lexicon: Lexicon,
    *,
    firm_id: str = "",
    year: int = 0,
    tokenizer: Tokenizer = tokenize,
) -> DocumentTermStats:
    """Count non-overlapping, longest-match-first lexicon phrases in ``text``.

    The tokenizer is pluggable; the default splits normalized text on
    whitespace and punctuation. ``doc_token_count`` is the number of tokens,
    with a minimum of 1 so empty documents stay well defined.

    Example:
        >>> lex = Lexicon((LexiconEntry("machine learning"),))
        >>> scan_document("machine learning beats machine learning", lex).term_counts
        {'machine learning': 2}
    """
    tokens = tokenizer(text)
    index = _phrase_index(lexicon, tokenizer)
    counts = {phrase: 0 for phrase in lexicon.phrases}

    i = 0
    n = len(tokens)
    while i < n:
        matched = 0
        for phrase_tokens, phrase in index.get(tokens[i], ()):
            width = len(phrase_tokens)
            if i + width <= n and tuple(tokens[i : i + width]) == phrase_tokens:
                counts[phrase] += 1
                matched = width
                break
        i += matched or 1

    return DocumentTermStats(
        firm_id=firm_id,
        year=year,
        term_counts=counts,
        doc_token_count=max(1, n),
    )


def idf_table(corpus: Sequence[DocumentTermStats], lexicon: Lexicon) -> dict[str, float]:
    """Smoothed inverse document frequency ln(N / (1 + df)) + 1, floored at 0."""
    if not corpus:
        raise EmptyCorpus()
    n_docs = len(corpus)
    table: dict[str, float] = {}
    for phrase in lexicon.phrases:
        df = sum(1 for doc in corpus if doc.term_counts.get(phrase, 0) > 0)
        table[phrase] = max(0.0, math.log(n_docs / (1 + df)) + 1.0)
    return table


def tfidf_scores(
    corpus: Sequence[DocumentTermStats], lexicon: Lexicon
) -> list[TalkScore]:
    """Score every document of one pool against the lexicon.

    tf is the phrase count over the document token count; the score is the
    weight-tf-idf sum over lexicon phrases. Output is ordered by
    (year, firm_id), so shuffling the corpus changes nothing.

    Raises:
        EmptyCorpus: the pool is empty
        DuplicateFirm: a firm has two documents in the same year
    """
    idf = idf_table(corpus, lexicon)
    seen: set[tuple[str, int]] = set()
    scores: list[TalkScore] = []
    for doc in corpus:
        key = (doc.firm_id, doc.year)
        if key in seen:
            raise DuplicateFirm(doc.firm_id, doc.year)
        seen.add(key)

        terms = [
            entry.weight * (doc.term_counts.get(entry.phrase, 0) / doc.doc_token_count) * idf[entry.phrase]
            for entry in lexicon.entries
        ]
        scores.append(TalkScore(doc.firm_id, doc.year, math.fsum(terms)))

    scores.sort(key=lambda s: (s.year, s.firm_id))
    return scores


def score_documents(
    documents: Iterable[Document],
    lexicon: Lexicon,
    *,
    tokenizer: Tokenizer = tokenize,
) -> list[TalkScore]:
    """Scan documents and score each calendar year as its own idf pool."""
    pools: dict[int, list[DocumentTermStats]] = defaultdict(list)
    for doc in documents:
        pools[doc.year].append(
            scan_document(doc.text, lexicon, firm_id=doc.firm_id, year=doc.year, tokenizer=tokenizer)
        )
    if not pools:
        raise EmptyCorpus()

    scores: list[TalkScore] = []
    for year in sorted(pools):
        scores.extend(tfidf_scores(pools[year], lexicon))
    return scores


def read_corpus_dir(directory: str | Path) -> list[Document]:
    """Read ``<firm_id>_<year>.txt`` files; other files are ignored."""
    documents: list[Document] = []
    for path in sorted(Path(directory).iterdir()):
        match = _DOCUMENT_NAME.match(path.name)
        if not match or not path.is_file():
            continue
        documents.append(
            Document(match["firm"], int(match["year"]), path.read_text(encoding="utf-8"))
        )
    return documents


def talk_frame(scores: Sequence[TalkScore]) -> pd.DataFrame:
    """Render scores as the ``firm_id,year,talk_score`` table."""
    return pd.DataFrame(
        {
            "firm_id": [s.firm_id for s in scores],
            "year": [s.year for s in scores],
            "talk_score": [s.score for s in scores],
        }
    )


__all__ = [
    "Document",
    "Tokenizer",
    "default_lexicon",
    "idf_table",
    "load_lexicon",
    "read_corpus_dir",
    "scan_document",
    "score_documents",
    "talk_frame",
    "tfidf_scores",
]
