"""Scan reports: finding records, redaction and JSON / table rendering."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

from secretsift.scanner import Candidate

REDACTED_SHORT = "********"
ELLIPSIS = "…"


def redact(secret: str) -> str:
    """Mask a secret, keeping at most a short prefix and suffix.

    Under 8 chars everything is hidden; 8 to 11 keep two chars per side;
    12 and up keep four.
    """
    n = len(secret)
    if n < 8:
        return REDACTED_SHORT
    keep = 2 if n < 12 else 4
    return secret[:keep] + ELLIPSIS + secret[-keep:]


@dataclass
class Finding:
    candidate: str
    file_path: str
    line: int
    column: int
    pattern_id: str
    entropy_bits: float
    verdict: str | None = None
    secret_type: str | None = None
    error: str | None = None
    # not serialized
    source: Candidate | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("source")
        if d["error"] is None:
            d.pop("error")
        d["entropy_bits"] = round(self.entropy_bits, 4)
        return d


@dataclass
class ScanReport:
    tool_version: str
    catalog_source: str
    window_chars: int
    findings: list[Finding]
    summary: dict[str, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool_version": self.tool_version,
            "catalog_source": self.catalog_source,
            "window_chars": self.window_chars,
            "findings": [f.to_dict() for f in self.findings],
            "summary": dict(self.summary),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_table(self) -> str:
        header = ("LOCATION", "PATTERN", "ENTROPY", "VERDICT", "TYPE", "CANDIDATE")
        rows = [
            (
                f"{f.file_path}:{f.line}:{f.column}",
                f.pattern_id,
                f"{f.entropy_bits:.2f}",
                f.verdict or (f"error:{f.error}" if f.error else "-"),
                f.secret_type or "-",
                f.candidate.replace("\n", "\\n"),
            )
            for f in self.findings
        ]
        widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header) - 1)]
        lines = []
        for r in [header, *rows]:
            cells = [c.ljust(w) for c, w in zip(r, widths)] + [r[-1]]
            lines.append("  ".join(cells).rstrip())
        s = self.summary
        lines.append("")
        lines.append(
            f"files scanned: {s['files_scanned']}  skipped: {s.get('files_skipped', 0)}  "
            f"candidates: {s['candidates']}  classified secret: {s['classified_secret']}  errors: {s['errors']}"
        )
        return "\n".join(lines) + "\n"


def dedupe_candidates(candidates: Sequence[Candidate], pattern_order: Sequence[str] = ()) -> list[Candidate]:
    """One candidate per (file, span).

    When several patterns report the same span, the one listed first in
    ``pattern_order`` (catalog order) wins; unknown ids fall back to id order.
    Output keeps the scanner's (file, start, end) ordering.
    """
    rank = {pid: i for i, pid in enumerate(pattern_order)}
    best: dict[tuple[str, int, int], Candidate] = {}
    for c in candidates:
        key = (c.file_path, c.start_offset, c.end_offset)
        cur = best.get(key)
        if cur is None or (rank.get(c.pattern_id, len(rank)), c.pattern_id) < (
            rank.get(cur.pattern_id, len(rank)),
            cur.pattern_id,
        ):
            best[key] = c
    return sorted(best.values(), key=lambda c: c.sort_key)


def finding_from_candidate(c: Candidate, redact_text: bool, secret_type: str | None = None) -> Finding:
    return Finding(
        candidate=redact(c.matched_text) if redact_text else c.matched_text,
        file_path=c.file_path,
        line=c.line,
        column=c.column,
        pattern_id=c.pattern_id,
        entropy_bits=c.entropy_bits,
        secret_type=secret_type,
        source=c,
    )
