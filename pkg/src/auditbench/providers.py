"""Provider contracts for the verification pipeline, plus script-driven
fixture implementations that make the pipeline fully deterministic offline.

A text-model call is (prompt, token limit) -> (completion text, token
counts); routing metadata (purpose, step, key) rides along so fixtures can
script responses per pipeline stage without parsing prompts.  A search call
is (query) -> ranked hits.  No provider identity leaks into the pipeline
logic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol, Sequence

from .errors import ProviderError

# Stable markers used when assembling prompts, so that prompt-driven
# providers (including fixtures) can locate the structured parts.
CLAIM_MARKER = "[claim]"
SECTION_MARKER = "[section]"
REPORT_MARKER = "[report]"
DOCUMENT_MARKER = "[document]"


@dataclass(frozen=True)
class Completion:
    text: str
    input_tokens: int
    output_tokens: int


class TextModel(Protocol):
    def complete(
        self, prompt: str, max_tokens: int, *, purpose: str, step: int, key: str
    ) -> Completion: ...


@dataclass(frozen=True)
class SearchHit:
    source_id: str
    url: str
    snippet: str
    text: str


class SearchProvider(Protocol):
    def search(self, query: str) -> Sequence[SearchHit]: ...


@dataclass
class Providers:
    """Provider bundle plus the model tags recorded in token ledgers.

    Summaries are billed to a designated auxiliary model tag so cost
    estimation can apply price-ratio conversion.
    """

    text_model: TextModel
    search: SearchProvider
    model: str = "primary"
    summary_model: str = "auxiliary"


def _approx_tokens(text: str) -> int:
    return max(1, math.ceil(len(text) / 4))


def _context_slice(prompt: str) -> str:
    """Claim-plus-section portion of a context prompt (identity behavior)."""
    start = prompt.find(CLAIM_MARKER)
    end = prompt.find(REPORT_MARKER)
    if start == -1 or end == -1 or end <= start:
        return prompt
    return prompt[start + len(CLAIM_MARKER) : end].strip()


class FixtureTextModel:
    """Text model scripted from a response table.

    Responses are looked up by ``purpose:step:key``, then ``purpose:key``,
    ``purpose:step``, and finally ``purpose``.  A response is either a plain
    string or ``{"text", "input_tokens", "output_tokens"}``.  Unscripted
    context calls fall back to identity behavior (claim sentence plus its
    enclosing section); other purposes fall back to safe defaults.
    """

    def __init__(self, responses: Mapping[str, object] | None = None):
        self.responses = dict(responses or {})
        self.calls: list[tuple[str, int, str]] = []

    def _lookup(self, purpose: str, step: int, key: str):
        for candidate in (
            f"{purpose}:{step}:{key}",
            f"{purpose}:{key}",
            f"{purpose}:{step}",
            purpose,
        ):
            if candidate in self.responses:
                return self.responses[candidate]
        return None

    @staticmethod
    def _default(purpose: str, prompt: str) -> str:
        if purpose == "context":
            return _context_slice(prompt)
        if purpose == "sufficiency":
            return "yes"
        if purpose == "verdict":
            return "Inconclusive\nrationale: available evidence does not settle the claim"
        if purpose == "summary":
            doc = prompt.find(DOCUMENT_MARKER)
            body = prompt[doc + len(DOCUMENT_MARKER) :].strip() if doc != -1 else prompt
            return body[:200] or "empty document"
        return ""  # queries/depth: nothing scripted means nothing produced

    def complete(
        self, prompt: str, max_tokens: int, *, purpose: str, step: int, key: str
    ) -> Completion:
        self.calls.append((purpose, step, key))
        scripted = self._lookup(purpose, step, key)
        if scripted is None:
            text = self._default(purpose, prompt)
            return Completion(text, _approx_tokens(prompt), _approx_tokens(text))
        if isinstance(scripted, str):
            return Completion(scripted, _approx_tokens(prompt), _approx_tokens(scripted))
        if isinstance(scripted, Mapping):
            text = str(scripted.get("text", ""))
            return Completion(
                text,
                int(scripted.get("input_tokens", _approx_tokens(prompt))),
                int(scripted.get("output_tokens", _approx_tokens(text))),
            )
        raise ProviderError(f"bad fixture response for {purpose}:{step}:{key}")


class FixtureSearch:
    """Search provider scripted from a query -> hits table."""

    def __init__(self, results: Mapping[str, Sequence[Mapping]] | None = None):
        self.results = {
            query: [
                SearchHit(
                    source_id=h["source_id"],
                    url=h.get("url", f"fixture://{h['source_id']}"),
                    snippet=h.get("snippet", ""),
                    text=h.get("text", h.get("snippet", "")),
                )
                for h in hits
            ]
            for query, hits in (results or {}).items()
        }
        self.calls: list[str] = []

    def search(self, query: str) -> list[SearchHit]:
        self.calls.append(query)
        return list(self.results.get(query, ()))


def load_fixture_providers(path: Path | str) -> Providers:
    """Build a provider bundle from a fixture script file."""
    obj = json.loads(Path(path).read_text("utf-8"))
    return providers_from_fixture(obj)


def providers_from_fixture(obj: Mapping) -> Providers:
    text_spec = obj.get("text_model", {})
    search_spec = obj.get("search", {})
    return Providers(
        text_model=FixtureTextModel(text_spec.get("responses", {})),
        search=FixtureSearch(search_spec.get("results", {})),
        model=text_spec.get("model", "primary"),
        summary_model=text_spec.get("summary_model", "auxiliary"),
    )
