"""Byte-size units and the sentinel for limits a platform does not impose."""

from __future__ import annotations

from typing import Union

MB = 2**20
GB = 2**30


class Unlimited:
    """Singleton standing in for an absent platform limit.

    Deliberately not a number: "no limit" must never be confused with a
    limit of zero, and comparisons against it are a bug rather than a
    silent pass.
    """

    _instance: "Unlimited | None" = None

    def __new__(cls) -> "Unlimited":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNLIMITED"

    def __copy__(self) -> "Unlimited":
        return self

    def __deepcopy__(self, memo) -> "Unlimited":
        return self

    def __reduce__(self):
        return (Unlimited, ())


UNLIMITED = Unlimited()

# A byte or millisecond budget that a platform may simply not restrict.
Limit = Union[int, Unlimited]


def mb(n: float) -> int:
    """Megabytes to bytes (1 MB = 2**20 bytes)."""
    return round(n * MB)


def gb(n: float) -> int:
    """Gigabytes to bytes (1 GB = 2**30 bytes)."""
    return round(n * GB)
