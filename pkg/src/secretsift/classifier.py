"""Candidate classification through a pluggable inference backend.

Two backends ship: ``RemoteBackend`` speaks the chat-completions wire format,
``RuleMockBackend`` is a deterministic offline heuristic for tests and CI.
The rule mock is an engineering stand-in, not a model.
"""

from __future__ import annotations

import enum
import logging
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence, Union

import httpx

from secretsift.catalog import TaxonomyClass, builtin_catalog
from secretsift.errors import BackendUnavailable, InputTooLong, UnparseableAnswer
from secretsift.prompting import Label, Mode, PromptRequest, build_prompt
from secretsift.scanner import shannon_entropy

logger = logging.getLogger(__name__)

API_BASE_ENV = "SECRETSIFT_API_BASE"
API_KEY_ENV = "SECRETSIFT_API_KEY"

MOCK_MIN_LENGTH = 16
MOCK_MIN_ENTROPY = 3.5
PLACEHOLDER_MARKERS = ("example", "test", "dummy", "xxxx", "placeholder", "your_", "changeme")


class BackendKind(enum.Enum):
    REMOTE = "remote"
    MOCK = "mock"


@dataclass(frozen=True)
class ClassifierConfig:
    backend: BackendKind = BackendKind.MOCK
    model_id: str = "rule-mock"
    temperature: float = 0.0
    max_tokens: int = 16
    max_answer_chars: int = 256
    # fits a 300-char window plus an 8-shot prompt with room to spare
    max_input_chars: int = 12_000
    request_timeout_ms: int = 30_000
    max_retries: int = 3
    backoff_base_ms: int = 500
    concurrency_limit: int = 4

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.concurrency_limit < 1:
            raise ValueError("concurrency_limit must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class Verdict:
    candidate_id: str
    mode: Mode
    binary_label: Label | None
    type_label: TaxonomyClass | None
    raw_response: str
    model_id: str
    latency_ms: int = 0

    @property
    def is_secret(self) -> bool:
        return self.binary_label is Label.SECRET or self.type_label is not None


@dataclass(frozen=True)
class ClassificationFailure:
    """Per-item error record produced by ``batch_classify``."""

    candidate_id: str
    error: str
    message: str
    raw_response: str | None = None


Outcome = Union[Verdict, ClassificationFailure]


# -- answer parsing

_EDGE_JUNK = " \t\r\n.,;:!?\"'`*()[]{}<>"


def parse_binary_label(raw: str) -> Label:
    """Map a model answer onto Secret / Non-sensitive.

    Negative phrasings are checked before the bare word "secret", so
    "not sensitive, not a secret" reads as non-sensitive.
    """
    text = raw.lower().strip(_EDGE_JUNK)
    if "non-sensitive" in text or "non sensitive" in text or "not sensitive" in text:
        return Label.NON_SENSITIVE
    if "secret" in text:
        return Label.SECRET
    raise UnparseableAnswer(raw)


def _squash(s: str) -> str:
    return " ".join(re.sub(r"[^a-z0-9]+", " ", s.lower()).split())


_CLASS_KEYS = [(t, _squash(t.display_name)) for t in TaxonomyClass]


def parse_multiclass_label(raw: str) -> TaxonomyClass:
    """Longest category name contained in ``raw`` (case and punctuation ignored).

    Ties go to the name appearing first in the answer.
    """
    text = f" {_squash(raw)} "
    best: tuple[int, int, TaxonomyClass] | None = None
    for t, key in _CLASS_KEYS:
        pos = text.find(f" {key} ")
        if pos < 0:
            continue
        rank = (-len(key), pos)
        if best is None or rank < best[:2]:
            best = (rank[0], rank[1], t)
    if best is None:
        raise UnparseableAnswer(raw)
    return best[2]


def parse_answer(raw: str, mode: Mode) -> Label | TaxonomyClass:
    return parse_binary_label(raw) if mode is Mode.BINARY else parse_multiclass_label(raw)


# -- rule mock


def is_placeholder(candidate: str) -> bool:
    if len(set(candidate)) <= 2:
        return True
    lowered = candidate.lower()
    return any(marker in lowered for marker in PLACEHOLDER_MARKERS)


def rule_mock_classify(candidate: str, context: str = "") -> Label:
    """Offline stand-in: long, high-entropy, non-placeholder strings are secrets.

    ``context`` is accepted for interface parity and ignored.
    """
    if (
        len(candidate) >= MOCK_MIN_LENGTH
        and shannon_entropy(candidate) >= MOCK_MIN_ENTROPY
        and not is_placeholder(candidate)
    ):
        return Label.SECRET
    return Label.NON_SENSITIVE


def rule_mock_type(candidate: str) -> TaxonomyClass:
    """Type of the first builtin pattern that matches ``candidate``; GenericSecret otherwise."""
    for spec in builtin_catalog():
        if spec.compiled.search(candidate):
            return spec.secret_type
    return TaxonomyClass.GENERIC_SECRET


# -- backends


class TransientBackendError(Exception):
    """A failure worth retrying (timeout, connection drop, 429, 5xx)."""


class Backend(Protocol):
    def complete(self, prompt: str, req: PromptRequest, cfg: ClassifierConfig) -> str: ...


class RuleMockBackend:
    def complete(self, prompt: str, req: PromptRequest, cfg: ClassifierConfig) -> str:
        if req.mode is Mode.BINARY:
            return rule_mock_classify(req.candidate, req.context).value
        return rule_mock_type(req.candidate).display_name


class RemoteBackend:
    """Chat-completions client.  The API key is sent as a bearer token and never logged."""

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        base_url = base_url or os.environ.get(API_BASE_ENV)
        if not base_url:
            raise BackendUnavailable(f"no API base URL; set {API_BASE_ENV}")
        self.url = base_url.rstrip("/") + "/v1/chat/completions"
        api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(headers=headers, transport=transport)

    def close(self) -> None:
        self._client.close()

    def complete(self, prompt: str, req: PromptRequest, cfg: ClassifierConfig) -> str:
        body = {
            "model": cfg.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }
        try:
            resp = self._client.post(self.url, json=body, timeout=cfg.request_timeout_ms / 1000)
        except httpx.TransportError as exc:  # includes timeouts
            raise TransientBackendError(type(exc).__name__) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientBackendError(f"HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise BackendUnavailable(f"HTTP {resp.status_code} from inference endpoint")
        try:
            content = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise BackendUnavailable("response is not a chat completion") from None
        return content if isinstance(content, str) else str(content)


def make_backend(cfg: ClassifierConfig) -> Backend:
    if cfg.backend is BackendKind.MOCK:
        return RuleMockBackend()
    return RemoteBackend()


# -- classification


def _call_with_retries(
    backend: Backend,
    prompt: str,
    req: PromptRequest,
    cfg: ClassifierConfig,
    sleep: Callable[[float], None],
) -> str:
    attempt = 0
    while True:
        try:
            return backend.complete(prompt, req, cfg)
        except TransientBackendError as exc:
            if attempt >= cfg.max_retries:
                raise BackendUnavailable(f"gave up after {attempt + 1} attempts: {exc}") from None
            delay_ms = cfg.backoff_base_ms * (2**attempt)
            logger.info("transient backend failure (%s); retrying in %d ms", exc, delay_ms)
            sleep(delay_ms / 1000)
            attempt += 1


def classify_one(
    req: PromptRequest,
    cfg: ClassifierConfig,
    backend: Backend | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> Verdict:
    """Render, send and parse one request.

    Raises InputTooLong, BackendUnavailable (after retries) or
    UnparseableAnswer (which keeps the raw response).
    """
    prompt = build_prompt(req)
    if len(prompt) > cfg.max_input_chars:
        raise InputTooLong(len(prompt), cfg.max_input_chars)
    backend = backend or make_backend(cfg)
    started = time.monotonic()
    raw = _call_with_retries(backend, prompt, req, cfg, sleep)
    latency_ms = 0 if isinstance(backend, RuleMockBackend) else int((time.monotonic() - started) * 1000)
    raw = raw[: cfg.max_answer_chars]
    answer = parse_answer(raw, req.mode)
    return Verdict(
        candidate_id=req.candidate_id,
        mode=req.mode,
        binary_label=answer if isinstance(answer, Label) else None,
        type_label=answer if isinstance(answer, TaxonomyClass) else None,
        raw_response=raw,
        model_id=cfg.model_id,
        latency_ms=latency_ms,
    )


def batch_classify(
    reqs: Sequence[PromptRequest],
    cfg: ClassifierConfig,
    backend: Backend | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> list[Outcome]:
    """Classify ``reqs`` with at most ``cfg.concurrency_limit`` in flight.

    Results come back in input order; a failing item becomes a
    ClassificationFailure instead of aborting the batch.
    """
    backend = backend or make_backend(cfg)

    def run(req: PromptRequest) -> Outcome:
        try:
            return classify_one(req, cfg, backend, sleep)
        except UnparseableAnswer as exc:
            return ClassificationFailure(req.candidate_id, "UnparseableAnswer", str(exc), exc.raw_response)
        except (InputTooLong, BackendUnavailable) as exc:
            return ClassificationFailure(req.candidate_id, type(exc).__name__, str(exc))

    if cfg.concurrency_limit == 1 or len(reqs) <= 1:
        return [run(r) for r in reqs]
    with ThreadPoolExecutor(max_workers=cfg.concurrency_limit) as pool:
        return list(pool.map(run, reqs))


def baseline_regex_only(candidates: Sequence[object]) -> list[Verdict]:
    """Label every candidate Secret, as a pattern-only tool would."""
    verdicts = []
    for c in candidates:
        cid = getattr(c, "candidate_id", None) or getattr(c, "id", "")
        verdicts.append(Verdict(cid, Mode.BINARY, Label.SECRET, None, "", "regex-only"))
    return verdicts
