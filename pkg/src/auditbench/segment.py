"""Deterministic rule-based sentence segmentation.

Splits on terminal punctuation followed by whitespace, with an abbreviation
guard list shipped as a data file.  Runs of two or more newlines always
break, so headings and list items without terminal punctuation become their
own sentences.  Spans cover every non-whitespace character: joining the
slices in order, plus the inter-span whitespace, reconstructs the input.
"""

from __future__ import annotations

from importlib import resources

_TERMINALS = ".!?"


def _load_abbreviations() -> frozenset[str]:
    text = resources.files("auditbench.data").joinpath("abbreviations.txt").read_text("utf-8")
    entries = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line.lower())
    return frozenset(entries)


ABBREVIATIONS = _load_abbreviations()


def _token_before(body: str, end: int) -> str:
    """The whitespace-delimited token ending at index ``end`` (exclusive)."""
    start = end
    while start > 0 and not body[start - 1].isspace():
        start -= 1
    return body[start:end]


def _boundaries(body: str) -> list[int]:
    """Indices that end a sentence chunk (exclusive cut points)."""
    cuts: list[int] = []
    n = len(body)
    i = 0
    while i < n:
        ch = body[i]
        if ch in _TERMINALS:
            j = i
            while j + 1 < n and body[j + 1] in _TERMINALS:
                j += 1
            after = j + 1
            if after >= n or body[after].isspace():
                token = _token_before(body, after).lower()
                if token not in ABBREVIATIONS:
                    cuts.append(after)
            i = after
            continue
        if ch == "\n":
            # paragraph break: a whitespace run containing a second newline
            j = i + 1
            newlines = 1
            while j < n and body[j].isspace():
                if body[j] == "\n":
                    newlines += 1
                j += 1
            if newlines >= 2 and (not cuts or cuts[-1] < i) and body[:i].strip():
                cuts.append(i)
            i = j
            continue
        i += 1
    if not cuts or cuts[-1] < n:
        cuts.append(n)
    return cuts


def segment_sentences(body: str) -> list[tuple[int, int]]:
    """Return (start, end) spans of the sentences of ``body``.

    Spans are non-overlapping, sorted, trimmed of surrounding whitespace,
    and jointly cover all non-whitespace text.  Deterministic for identical
    input.
    """
    spans: list[tuple[int, int]] = []
    prev = 0
    for cut in _boundaries(body):
        chunk = body[prev:cut]
        stripped = chunk.strip()
        if stripped:
            start = prev + (len(chunk) - len(chunk.lstrip()))
            end = start + len(stripped)
            spans.append((start, end))
        prev = cut
    return spans
