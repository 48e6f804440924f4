"""Candidate extraction: file normalization, entropy scoring and catalog scanning."""

from __future__ import annotations

import bisect
import fnmatch
import hashlib
import logging
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from secretsift.catalog import Catalog
from secretsift.errors import RootMissing

logger = logging.getLogger(__name__)

BINARY_SNIFF_BYTES = 8192
DEFAULT_MAX_FILE_BYTES = 1024 * 1024
DEFAULT_EXCLUDES = (".git/*", "*/.git/*")


@dataclass(frozen=True)
class Candidate:
    candidate_id: str
    file_path: str
    pattern_id: str
    matched_text: str
    start_offset: int
    end_offset: int
    line: int
    column: int
    entropy_bits: float

    @property
    def sort_key(self) -> tuple[str, int, int, str]:
        return (self.file_path, self.start_offset, self.end_offset, self.pattern_id)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ScanOptions:
    max_file_bytes: int = DEFAULT_MAX_FILE_BYTES
    include_globs: Sequence[str] = ("*",)
    exclude_globs: Sequence[str] = DEFAULT_EXCLUDES
    workers: int = 1


@dataclass
class ScanResult:
    candidates: list[Candidate]
    files_scanned: int
    files_skipped: int
    catalog_source: str
    errors: list[tuple[str, str]] = field(default_factory=list)


def normalize_content(data: bytes) -> str:
    """Decode UTF-8, dropping invalid byte sequences, and map CRLF to LF."""
    return data.decode("utf-8", errors="ignore").replace("\r\n", "\n")


def shannon_entropy(s: str) -> float:
    """Shannon entropy of ``s`` in bits per character (0.0 for the empty string)."""
    if not s:
        return 0.0
    n = len(s)
    h = 0.0
    for count in Counter(s).values():
        p = count / n
        h -= p * math.log2(p)
    # -0.0 for single-symbol strings
    return h + 0.0


def candidate_id(file_path: str, start: int, end: int, pattern_id: str) -> str:
    key = f"{file_path}\x00{start}\x00{end}\x00{pattern_id}".encode("utf-8")
    return hashlib.sha256(key).hexdigest()[:16]


class _LineIndex:
    def __init__(self, text: str) -> None:
        self._starts = [0]
        pos = text.find("\n")
        while pos != -1:
            self._starts.append(pos + 1)
            pos = text.find("\n", pos + 1)

    def locate(self, offset: int) -> tuple[int, int]:
        i = bisect.bisect_right(self._starts, offset) - 1
        return i + 1, offset - self._starts[i] + 1


def scan_text(text: str, catalog: Catalog, file_path: str = "") -> list[Candidate]:
    """Apply every enabled pattern to ``text``.

    Each pattern reports its leftmost non-overlapping matches; matches from
    different patterns may overlap.  When a pattern defines a ``secret``
    group, only that group's span is reported.
    """
    lines: _LineIndex | None = None
    out: dict[tuple[int, int, str], Candidate] = {}
    for spec in catalog.enabled():
        group = spec.secret_group
        for m in spec.compiled.finditer(text):
            start, end = m.span(group) if group else m.span()
            if start < 0 or start >= end:
                continue
            matched = text[start:end]
            entropy = shannon_entropy(matched)
            if spec.entropy_min is not None and entropy < spec.entropy_min:
                continue
            if lines is None:
                lines = _LineIndex(text)
            line, col = lines.locate(start)
            out[(start, end, spec.id)] = Candidate(
                candidate_id=candidate_id(file_path, start, end, spec.id),
                file_path=file_path,
                pattern_id=spec.id,
                matched_text=matched,
                start_offset=start,
                end_offset=end,
                line=line,
                column=col,
                entropy_bits=entropy,
            )
    return sorted(out.values(), key=lambda c: c.sort_key)


def looks_binary(data: bytes) -> bool:
    return b"\x00" in data[:BINARY_SNIFF_BYTES]


def _matches_any(rel: str, globs: Sequence[str]) -> bool:
    name = rel.rsplit("/", 1)[-1]
    return any(fnmatch.fnmatchcase(rel, g) or fnmatch.fnmatchcase(name, g) for g in globs)


def iter_files(root: Path, options: ScanOptions) -> list[tuple[str, Path]]:
    """Regular files under ``root`` selected by the include/exclude globs.

    Symlinks are not followed.  Paths are returned as POSIX-style relative
    strings, sorted.
    """
    selected: list[tuple[str, Path]] = []
    if root.is_file():
        return [(root.name, root)]
    for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
        dirnames.sort()
        for fname in filenames:
            full = Path(dirpath, fname)
            if full.is_symlink() or not full.is_file():
                continue
            rel = full.relative_to(root).as_posix()
            if not _matches_any(rel, options.include_globs):
                continue
            if _matches_any(rel, options.exclude_globs):
                continue
            selected.append((rel, full))
    selected.sort(key=lambda item: item[0])
    return selected


@dataclass
class _FileOutcome:
    rel: str
    candidates: list[Candidate] = field(default_factory=list)
    scanned: bool = False
    skipped: bool = False
    error: str | None = None


def _scan_file(rel: str, path: Path, catalog: Catalog, options: ScanOptions) -> _FileOutcome:
    outcome = _FileOutcome(rel)
    try:
        if path.stat().st_size > options.max_file_bytes:
            logger.debug("skipping %s: larger than %d bytes", rel, options.max_file_bytes)
            outcome.skipped = True
            return outcome
        data = path.read_bytes()
    except OSError as exc:
        outcome.error = f"{type(exc).__name__}: {exc.strerror or exc}"
        return outcome
    if looks_binary(data):
        logger.debug("skipping %s: binary", rel)
        outcome.skipped = True
        return outcome
    outcome.scanned = True
    outcome.candidates = scan_text(normalize_content(data), catalog, rel)
    return outcome


def scan_tree(root: str | Path, catalog: Catalog, options: ScanOptions | None = None) -> ScanResult:
    """Scan every selected file under ``root``.

    Output is sorted, so it does not depend on walk order or on
    ``options.workers``.  Unreadable files are recorded in ``errors``.
    """
    options = options or ScanOptions()
    root = Path(root)
    if not root.exists():
        raise RootMissing(f"scan root does not exist: {root}")
    files = iter_files(root, options)

    if options.workers > 1 and len(files) > 1:
        with ThreadPoolExecutor(max_workers=options.workers) as pool:
            outcomes = list(pool.map(lambda f: _scan_file(f[0], f[1], catalog, options), files))
    else:
        outcomes = [_scan_file(rel, path, catalog, options) for rel, path in files]

    candidates: list[Candidate] = []
    errors: list[tuple[str, str]] = []
    scanned = skipped = 0
    for o in outcomes:
        candidates.extend(o.candidates)
        scanned += o.scanned
        skipped += o.skipped
        if o.error:
            logger.warning("could not read %s: %s", o.rel, o.error)
            errors.append((o.rel, o.error))
    candidates.sort(key=lambda c: c.sort_key)
    errors.sort()
    return ScanResult(candidates, scanned, skipped, catalog.source, errors)
