"""Regex pattern catalog: secret taxonomy, pattern rules and catalog loading.

A catalog file is a UTF-8 JSON document::

    {"patterns": [
        {"id": "aws_access_key_id", "name": "AWS access key id",
         "regex": "AKIA[0-9A-Z]{16}", "secret_type": "api_key_and_secret",
         "entropy_min": 3.0, "enabled": true}
    ]}

``entropy_min`` and ``enabled`` are optional (defaults: no gate, enabled).
``example`` may carry a string the pattern is documented to match.

Regexes are restricted to a dialect without backreferences, lookaround,
conditionals, atomic groups or possessive quantifiers, so every rule is
expressible in an automaton-based engine.  A named group ``secret`` narrows
the reported candidate to that group's span (e.g. the value side of an
assignment).
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterator

from secretsift.errors import DuplicateId, InvalidPattern, MalformedCatalog, UnknownType

try:  # Python >= 3.11
    import re._parser as _sre_parse  # type: ignore[import-not-found]
except ImportError:  # pragma: no cover - depends on interpreter
    import sre_parse as _sre_parse  # type: ignore[no-redef]

_ID_RE = re.compile(r"[a-z0-9_-]+")
ENTROPY_MAX_BITS = 8.0


class TaxonomyClass(enum.Enum):
    """The eight secret categories, in descending frequency order."""

    PRIVATE_KEY = "private_key"
    API_KEY_AND_SECRET = "api_key_and_secret"
    AUTHENTICATION_KEY_AND_TOKEN = "authentication_key_and_token"
    OTHER = "other"
    GENERIC_SECRET = "generic_secret"
    DATABASE_AND_SERVER_URL = "database_and_server_url"
    PASSWORD = "password"
    USERNAME = "username"

    @property
    def slug(self) -> str:
        return self.value

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @classmethod
    def from_slug(cls, slug: str) -> TaxonomyClass:
        try:
            return cls(slug)
        except ValueError:
            raise UnknownType(slug) from None

    @classmethod
    def from_display_name(cls, name: str) -> TaxonomyClass:
        for member, display in _DISPLAY_NAMES.items():
            if display == name:
                return member
        raise UnknownType(name)


_DISPLAY_NAMES: dict[TaxonomyClass, str] = {
    TaxonomyClass.PRIVATE_KEY: "Private Key",
    TaxonomyClass.API_KEY_AND_SECRET: "API Key and Secret",
    TaxonomyClass.AUTHENTICATION_KEY_AND_TOKEN: "Authentication Key and Token",
    TaxonomyClass.OTHER: "Other",
    TaxonomyClass.GENERIC_SECRET: "Generic Secret",
    TaxonomyClass.DATABASE_AND_SERVER_URL: "Database and Server URL",
    TaxonomyClass.PASSWORD: "Password",
    TaxonomyClass.USERNAME: "Username",
}


@dataclass(frozen=True)
class PatternSpec:
    id: str
    name: str
    regex: str
    secret_type: TaxonomyClass
    entropy_min: float | None = None
    enabled: bool = True
    example: str | None = field(default=None, compare=False)

    @cached_property
    def compiled(self) -> re.Pattern[str]:
        return re.compile(self.regex)

    @property
    def secret_group(self) -> str | None:
        return "secret" if "secret" in self.compiled.groupindex else None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "id": self.id,
            "name": self.name,
            "regex": self.regex,
            "secret_type": self.secret_type.slug,
        }
        if self.entropy_min is not None:
            d["entropy_min"] = self.entropy_min
        d["enabled"] = self.enabled
        if self.example is not None:
            d["example"] = self.example
        return d


@dataclass(frozen=True)
class Catalog:
    patterns: tuple[PatternSpec, ...]
    source: str = "builtin"

    def __iter__(self) -> Iterator[PatternSpec]:
        return iter(self.patterns)

    def __len__(self) -> int:
        return len(self.patterns)

    def enabled(self) -> list[PatternSpec]:
        return [p for p in self.patterns if p.enabled]

    def get(self, pattern_id: str) -> PatternSpec:
        for p in self.patterns:
            if p.id == pattern_id:
                return p
        raise KeyError(pattern_id)

    def without(self, pattern_id: str) -> Catalog:
        return Catalog(tuple(p for p in self.patterns if p.id != pattern_id), self.source)

    def to_json(self) -> str:
        doc = {"patterns": [p.to_dict() for p in self.patterns]}
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


_FORBIDDEN_OPS = {
    "GROUPREF": "backreference",
    "GROUPREF_EXISTS": "conditional group",
    "ASSERT": "lookaround",
    "ASSERT_NOT": "lookaround",
    "ATOMIC_GROUP": "atomic group",
    "POSSESSIVE_REPEAT": "possessive quantifier",
}


def _dialect_violation(parsed: Any) -> str | None:
    for op, av in parsed:
        name = str(op)
        if name in _FORBIDDEN_OPS:
            return _FORBIDDEN_OPS[name]
        stack = [av]
        while stack:
            item = stack.pop()
            if isinstance(item, _sre_parse.SubPattern):
                found = _dialect_violation(item)
                if found:
                    return found
            elif isinstance(item, (list, tuple)):
                stack.extend(item)
    return None


def validate_pattern(spec: PatternSpec) -> None:
    """Check every PatternSpec invariant; raise InvalidPattern on the first failure."""
    if not isinstance(spec.id, str) or not _ID_RE.fullmatch(spec.id):
        raise InvalidPattern(str(spec.id), "id", "must match [a-z0-9_-]+")
    if not isinstance(spec.secret_type, TaxonomyClass):
        raise InvalidPattern(spec.id, "secret_type", repr(spec.secret_type))
    try:
        parsed = _sre_parse.parse(spec.regex)
        compiled = re.compile(spec.regex)
    except (re.error, TypeError, OverflowError, RecursionError) as exc:
        raise InvalidPattern(spec.id, "regex", str(exc)) from None
    problem = _dialect_violation(parsed)
    if problem:
        raise InvalidPattern(spec.id, "dialect", f"{problem} not allowed")
    if compiled.match("") is not None:
        raise InvalidPattern(spec.id, "regex", "pattern matches the empty string")
    if spec.entropy_min is not None:
        e = spec.entropy_min
        if isinstance(e, bool) or not isinstance(e, (int, float)) or not 0.0 <= e <= ENTROPY_MAX_BITS:
            raise InvalidPattern(spec.id, "entropy_range", f"{e!r} outside [0, 8]")


_REQUIRED = ("id", "name", "regex", "secret_type")
_OPTIONAL = ("entropy_min", "enabled", "example")


def _pattern_from_obj(obj: Any, index: int) -> PatternSpec:
    if not isinstance(obj, dict):
        raise MalformedCatalog(f"patterns[{index}] is not an object")
    for key in _REQUIRED:
        if not isinstance(obj.get(key), str):
            raise MalformedCatalog(f"patterns[{index}].{key} missing or not a string")
    unknown = set(obj) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise MalformedCatalog(f"patterns[{index}] has unknown keys {sorted(unknown)}")
    enabled = obj.get("enabled", True)
    if not isinstance(enabled, bool):
        raise MalformedCatalog(f"patterns[{index}].enabled must be a boolean")
    entropy_min = obj.get("entropy_min")
    if entropy_min is not None and (isinstance(entropy_min, bool) or not isinstance(entropy_min, (int, float))):
        raise MalformedCatalog(f"patterns[{index}].entropy_min must be a number")
    example = obj.get("example")
    if example is not None and not isinstance(example, str):
        raise MalformedCatalog(f"patterns[{index}].example must be a string")
    try:
        secret_type = TaxonomyClass.from_slug(obj["secret_type"])
    except UnknownType:
        raise InvalidPattern(obj["id"], "secret_type", obj["secret_type"]) from None
    return PatternSpec(
        id=obj["id"],
        name=obj["name"],
        regex=obj["regex"],
        secret_type=secret_type,
        entropy_min=float(entropy_min) if entropy_min is not None else None,
        enabled=enabled,
        example=example,
    )


def parse_catalog(text: str, source: str = "<string>") -> Catalog:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedCatalog(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("patterns"), list):
        raise MalformedCatalog('top level must be an object with a "patterns" list')
    patterns: list[PatternSpec] = []
    seen: set[str] = set()
    for i, obj in enumerate(doc["patterns"]):
        spec = _pattern_from_obj(obj, i)
        validate_pattern(spec)
        if spec.id in seen:
            raise DuplicateId(spec.id)
        seen.add(spec.id)
        patterns.append(spec)
    return Catalog(tuple(patterns), source)


def load_catalog(path: str | Path) -> Catalog:
    """Load and validate a catalog file.  Disabled patterns are kept."""
    path = Path(path)
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw[: exc.start].count(b"\n") + 1
        raise MalformedCatalog("file is not valid UTF-8", line=line) from None
    return parse_catalog(text, source=str(path))


def builtin_catalog() -> Catalog:
    from secretsift.builtin_patterns import BUILTIN_PATTERNS

    return Catalog(BUILTIN_PATTERNS, "builtin")
