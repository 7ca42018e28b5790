import math
from typing import Callable, Optional

from ..exceptions import DuplicatePhrase, EmptyLexicon, InvalidWeight
from ..models import Lexicon, LexiconEntry
from ..utils import normalize


class LexiconParser:
    """Line-oriented parser for keyword lexicon files.

    Each non-blank line holds one phrase, optionally followed by a TAB and a
    positive weight. Lines starting with ``#`` are comments. Phrases are
    normalized before uniqueness is checked, so "Machine  Learning" and
    "machine learning" collide.

    Example:
        parser = LexiconParser(source="lexicon.txt")
        lexicon = parser.feed_and_get_result(text)
    """

    def __init__(
        self,
        *,
        source: str = "<memory>",
        normalizer: Callable[[str], str] = normalize,
    ):
        self._source = source
        self._normalizer = normalizer
        self._entries: dict[str, LexiconEntry] = {}
        self._line_no = 0
        self._pending = ""

    def feed(self, chunk: str) -> None:
        """Consume a chunk of text; incomplete trailing lines are buffered."""
        data = self._pending + chunk
        lines = data.split("\n")
        self._pending = lines.pop()
        for line in lines:
            self._feed_line(line)

    def close(self) -> Lexicon:
        """Flush the buffer and return the parsed lexicon."""
        if self._pending:
            self._feed_line(self._pending)
            self._pending = ""
        if not self._entries:
            raise EmptyLexicon(self._source)
        return Lexicon(tuple(self._entries.values()))

    def feed_and_get_result(self, text: str) -> Lexicon:
        self.feed(text)
        return self.close()

    def _feed_line(self, raw: str) -> None:
        self._line_no += 1
        line = raw.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            return

        phrase_part, sep, weight_part = line.partition("\t")
        weight = self._parse_weight(weight_part.strip()) if sep else 1.0

        phrase = self._normalizer(phrase_part)
        if not phrase:
            return
        if phrase in self._entries:
            raise DuplicatePhrase(phrase, self._line_no)
        self._entries[phrase] = LexiconEntry(phrase, weight)

    def _parse_weight(self, text: str) -> float:
        if not text:
            return 1.0
        try:
            weight = float(text)
        except ValueError:
            raise InvalidWeight(self._line_no, text) from None
        if not math.isfinite(weight) or weight <= 0.0:
            raise InvalidWeight(self._line_no, text)
        return weight


def parse_lexicon(text: str, *, source: Optional[str] = None) -> Lexicon:
    """Parse lexicon text held in memory."""
    return LexiconParser(source=source or "<memory>").feed_and_get_result(text)
