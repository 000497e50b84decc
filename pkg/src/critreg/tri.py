"""Three-valued logic used by sampled predicates."""
from __future__ import annotations

from enum import Enum


class Tri(str, Enum):
    YES = "YES"
    NO = "NO"
    INCONCLUSIVE = "INCONCLUSIVE"

    @classmethod
    def of(cls, flag: bool | None) -> "Tri":
        if flag is None:
            return cls.INCONCLUSIVE
        return cls.YES if flag else cls.NO

    def __bool__(self) -> bool:  # only YES is truthy
        return self is Tri.YES


def tri_and(*vals: Tri) -> Tri:
    if any(v is Tri.NO for v in vals):
        return Tri.NO
    if all(v is Tri.YES for v in vals):
        return Tri.YES
    return Tri.INCONCLUSIVE
