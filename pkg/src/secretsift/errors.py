"""Exception types raised across secretsift."""

from __future__ import annotations


class SecretSiftError(Exception):
    """Base class for every error raised by this package."""


# catalog


class CatalogError(SecretSiftError, ValueError):
    pass


class MalformedCatalog(CatalogError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"malformed catalog{where}: {message}")


class InvalidPattern(CatalogError):
    """A pattern violates one of the PatternSpec invariants.

    ``reason`` is one of ``"id"``, ``"regex"``, ``"dialect"``,
    ``"entropy_range"``, ``"secret_type"``.
    """

    def __init__(self, pattern_id: str, reason: str, detail: str = "") -> None:
        self.pattern_id = pattern_id
        self.reason = reason
        msg = f"invalid pattern {pattern_id!r} ({reason})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class DuplicateId(CatalogError):
    def __init__(self, pattern_id: str) -> None:
        self.pattern_id = pattern_id
        super().__init__(f"duplicate pattern id {pattern_id!r}")


class UnknownType(SecretSiftError, ValueError):
    def __init__(self, value: str, row: int | None = None) -> None:
        self.value = value
        self.row = row
        where = f"row {row}: " if row is not None else ""
        super().__init__(f"{where}unknown secret type {value!r}")


# scanning / context


class RootMissing(SecretSiftError, FileNotFoundError):
    pass


class SpanOutOfRange(SecretSiftError, IndexError):
    pass


# prompting / classification


class ExemplarMismatch(SecretSiftError, ValueError):
    pass


class KOutOfRange(SecretSiftError, ValueError):
    pass


class InputTooLong(SecretSiftError, ValueError):
    def __init__(self, length: int, limit: int) -> None:
        self.length = length
        self.limit = limit
        super().__init__(f"prompt is {length} chars, limit is {limit}")


class BackendUnavailable(SecretSiftError):
    pass


class UnparseableAnswer(SecretSiftError, ValueError):
    def __init__(self, raw_response: str) -> None:
        self.raw_response = raw_response
        super().__init__(f"cannot map model answer to a label: {raw_response[:80]!r}")


class EmptyModelId(SecretSiftError, ValueError):
    pass


# datasets


class MalformedRow(SecretSiftError, ValueError):
    def __init__(self, row: int, reason: str) -> None:
        self.row = row
        self.reason = reason
        super().__init__(f"row {row}: {reason}")


class UnknownLabel(SecretSiftError, ValueError):
    def __init__(self, value: str, row: int | None = None) -> None:
        self.value = value
        self.row = row
        where = f"row {row}: " if row is not None else ""
        super().__init__(f"{where}unknown label {value!r}")


class InsufficientPool(SecretSiftError, ValueError):
    def __init__(self, which: str, have: int, need: int) -> None:
        self.which = which
        self.have = have
        self.need = need
        super().__init__(f"not enough {which}: have {have}, need {need}")


class MissingTypeLabel(SecretSiftError, ValueError):
    pass


# metrics


class LengthMismatch(SecretSiftError, ValueError):
    pass


class UnknownCategory(SecretSiftError, ValueError):
    pass


class DomainError(SecretSiftError, ValueError):
    pass


class EmptyMatrix(SecretSiftError, ValueError):
    pass
