from __future__ import annotations


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


class ResourceLimitError(RuntimeError):
    """A configured memory, time or candidate budget was exceeded."""

    def __init__(self, message: str, excluded_size: int | None = None) -> None:
        super().__init__(message)
        # Largest subset size proven to contain no witness before the budget ran out.
        self.excluded_size = excluded_size


class CertificateError(AssertionError):
    """A constructed row-dependence certificate failed exact verification."""

    def __init__(self, r: int, target: int, message: str = "") -> None:
        super().__init__(message or f"certificate for row {target} of A_{r} does not verify")
        self.r = r
        self.target = target
