"""Character windows of surrounding code for a candidate."""

from __future__ import annotations

from dataclasses import dataclass

from secretsift.errors import SpanOutOfRange

DEFAULT_WINDOW_CHARS = 200


@dataclass(frozen=True)
class ContextWindow:
    text: str
    window_chars: int
    candidate_span_in_window: tuple[int, int]
    # offset of ``text`` within the source file
    file_start: int = 0

    @property
    def candidate(self) -> str:
        start, end = self.candidate_span_in_window
        return self.text[start:end]

    @property
    def file_span(self) -> tuple[int, int]:
        return self.file_start, self.file_start + len(self.text)


def extract_window(text: str, span: tuple[int, int], window_chars: int = DEFAULT_WINDOW_CHARS) -> ContextWindow:
    """Cut ``window_chars`` of context around ``text[span[0]:span[1]]``.

    The budget excludes the candidate itself: ``window_chars // 2`` characters
    go before it and the rest after it.  Each side is clamped at the file
    boundary; budget lost to clamping is not moved to the other side.
    """
    start, end = span
    if window_chars < 0:
        raise ValueError(f"window_chars must be >= 0, got {window_chars}")
    if not (0 <= start <= end <= len(text)):
        raise SpanOutOfRange(f"span {span} outside text of length {len(text)}")
    before = window_chars // 2
    after = window_chars - before
    lo = max(0, start - before)
    hi = min(len(text), end + after)
    return ContextWindow(
        text=text[lo:hi],
        window_chars=window_chars,
        candidate_span_in_window=(start - lo, end - lo),
        file_start=lo,
    )
