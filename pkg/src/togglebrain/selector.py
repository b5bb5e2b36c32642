"""Magnitude comparison in the toggle fabric and highest-priority selection."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

from .fabric import Instruction, Program, ToggleFabric, flip, run_program
from .memory import AttributeVector, Origin, STMRow, stm_load
from .priority import RegisterBank, ripple_add


class Verdict(enum.Enum):
    A_GREATER = "A_GREATER"
    B_GREATER = "B_GREATER"
    EQUAL = "EQUAL"


class RoutingError(LookupError):
    pass


@dataclass(frozen=True)
class PriorityValue:
    value: int
    image_id: int
    width: int

    def __post_init__(self):
        if self.width < 1 or not 0 <= self.value < 1 << self.width:
            raise ValueError(f"priority {self.value} does not fit {self.width} bits")


@dataclass(frozen=True)
class SelectionResult:
    winner: int | None
    priority: int | None
    contenders: int

    @property
    def has_winner(self) -> bool:
        return self.winner is not None


NO_CONTENDERS = SelectionResult(None, None, 0)


@dataclass(frozen=True)
class ComparatorLayout:
    """Difference register D (width+1, top bit is the borrow), subtrahend B,
    carries, and a zero flag."""

    width: int

    @property
    def diff(self) -> range:
        return range(0, self.width + 1)

    @property
    def sub(self) -> range:
        return range(self.width + 1, 2 * self.width + 1)

    @property
    def carry(self) -> range:
        return range(2 * self.width + 1, 3 * self.width + 1)

    @property
    def zero_flag(self) -> int:
        return 3 * self.width + 1

    @property
    def size(self) -> int:
        return 3 * self.width + 2


@lru_cache(maxsize=None)
def comparator_program(width: int) -> Program:
    """D <- a - b via ~(~a + b), then raise the zero flag iff D == 0."""
    lay = ComparatorLayout(width)
    d = list(lay.diff)
    prog = Program()
    prog.block("subtract", [flip(*d), *ripple_add(d, list(lay.sub), list(lay.carry)), flip(*d)])
    prog.block(
        "zero-test",
        [flip(*d), Instruction(frozenset(d), frozenset({lay.zero_flag})), flip(*d)],
    )
    return prog


def compare(a: PriorityValue, b: PriorityValue) -> Verdict:
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")
    lay = ComparatorLayout(a.width)
    fab = ToggleFabric(lay.size)
    fab.write(lay.diff, a.value)
    fab.write(lay.sub, b.value)
    run_program(fab, comparator_program(a.width))
    if fab[lay.zero_flag]:
        return Verdict.EQUAL
    if fab[lay.diff[-1]]:
        return Verdict.B_GREATER
    return Verdict.A_GREATER


def select_max(priorities: Sequence[PriorityValue]) -> SelectionResult:
    """Highest value wins; ties go to the lowest image id."""
    if not priorities:
        return NO_CONTENDERS
    best = priorities[0]
    for p in priorities[1:]:
        v = compare(p, best)
        if v is Verdict.A_GREATER or (v is Verdict.EQUAL and p.image_id < best.image_id):
            best = p
    return SelectionResult(best.image_id, best.value, len(priorities))


def route_winner(
    result: SelectionResult,
    source: RegisterBank | Mapping[int, AttributeVector],
    stm: STMRow,
) -> AttributeVector | None:
    """Load the winner's attribute vector into STM as a recall."""
    if not result.has_winner:
        return None
    if isinstance(source, RegisterBank):
        bits = source.bits_of(result.winner)
    else:
        bits = source.get(result.winner)
    if bits is None:
        raise RoutingError(f"no attribute vector for winner {result.winner}")
    stm_load(stm, bits, Origin.RECALL)
    return bits
