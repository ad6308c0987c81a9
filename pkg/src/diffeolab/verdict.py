"""Three-valued answers for smoothness and membership questions."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any


class Status(enum.Enum):
    SMOOTH = "smooth"
    NOT_SMOOTH = "not_smooth"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Any = None
    reason: str = ""
    detail: Any = field(default=None, compare=False)

    @classmethod
    def smooth(cls, reason: str = "", detail: Any = None) -> "Verdict":
        return cls(Status.SMOOTH, None, reason, detail)

    @classmethod
    def not_smooth(cls, witness: Any, reason: str = "") -> "Verdict":
        return cls(Status.NOT_SMOOTH, witness, reason)

    @classmethod
    def unknown(cls, reason: str) -> "Verdict":
        return cls(Status.UNKNOWN, None, reason)

    @property
    def is_smooth(self) -> bool:
        return self.status is Status.SMOOTH

    @property
    def is_not_smooth(self) -> bool:
        return self.status is Status.NOT_SMOOTH

    @property
    def is_unknown(self) -> bool:
        return self.status is Status.UNKNOWN

    def __bool__(self):
        raise TypeError("a Verdict is three-valued; test .is_smooth explicitly")


def all_of(verdicts) -> Verdict:
    """Conjunction: first refutation wins, then any unknown, else smooth."""
    verdicts = list(verdicts)
    for v in verdicts:
        if v.is_not_smooth:
            return v
    for v in verdicts:
        if v.is_unknown:
            return v
    return Verdict.smooth()
