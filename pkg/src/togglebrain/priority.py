"""Toggle registers and microcoded priority addition.

Each recalled image gets its own register: kappa subpriority fields of N1
bits, an accumulator A of width W = N1 + ceil(log2 kappa), and a carry
scratchpad C of width W. The same program runs on every register; it adds
the fields into A two at a time, one adder block per addition.

The adder is a carry-compute / sum / carry-uncompute ripple built only from
1- and 2-source instructions, so C is all FALSE again when a block ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .fabric import (
    Instruction,
    Program,
    PulseTiming,
    ToggleFabric,
    cnot,
    run_program,
    toffoli,
)
from .kernel import EventQueue
from .memory import AttributeVector


class EncodingError(ValueError):
    pass


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class ImportanceEntry:
    attribute: int
    weight: int
    name: str = ""


@dataclass(frozen=True)
class ImportanceMap:
    """kappa importance attributes in descending importance order."""

    entries: tuple[ImportanceEntry, ...]
    n1: int

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if self.n1 < 1:
            raise EncodingError("N1 must be >= 1")
        if len(self.entries) < 2:
            raise EncodingError("need at least 2 importance attributes")
        attrs = [e.attribute for e in self.entries]
        if len(set(attrs)) != len(attrs):
            raise EncodingError(f"duplicate importance attributes {attrs}")
        for e in self.entries:
            if not 0 <= e.weight < 1 << self.n1:
                raise EncodingError(f"weight {e.weight} of {e.name or e.attribute} needs more than {self.n1} bits")
        weights = [e.weight for e in self.entries]
        if any(a < b for a, b in zip(weights, weights[1:])):
            raise EncodingError(f"importance weights must be non-increasing, got {weights}")

    @property
    def kappa(self) -> int:
        return len(self.entries)

    def validate_for(self, k: int) -> None:
        for e in self.entries:
            if not 0 <= e.attribute < k:
                raise EncodingError(f"importance attribute {e.attribute} outside K={k}")

    @classmethod
    def default(cls, kappa: int, n1: int, attributes: Sequence[int] | None = None) -> ImportanceMap:
        """Evenly spaced weights from 2**n1 - 1 down to 0."""
        top = (1 << n1) - 1
        attributes = list(range(kappa)) if attributes is None else list(attributes)
        entries = tuple(
            ImportanceEntry(a, round(top * (kappa - 1 - i) / (kappa - 1)))
            for i, a in enumerate(attributes)
        )
        return cls(entries, n1)


def accumulator_width(kappa: int, n1: int) -> int:
    return n1 + math.ceil(math.log2(kappa))


@dataclass(frozen=True)
class RegisterLayout:
    kappa: int
    n1: int

    def __post_init__(self):
        if self.kappa < 2:
            raise GenerationError("kappa must be >= 2")
        if self.n1 < 1:
            raise GenerationError("N1 must be >= 1")

    @property
    def width(self) -> int:
        return accumulator_width(self.kappa, self.n1)

    @property
    def size(self) -> int:
        return self.kappa * self.n1 + 2 * self.width

    def field(self, i: int) -> range:
        """Toggles of subpriority X_i, 1-based as in X_1..X_kappa."""
        if not 1 <= i <= self.kappa:
            raise IndexError(i)
        start = (i - 1) * self.n1
        return range(start, start + self.n1)

    @property
    def acc(self) -> range:
        start = self.kappa * self.n1
        return range(start, start + self.width)

    @property
    def carry(self) -> range:
        start = self.kappa * self.n1 + self.width
        return range(start, start + self.width)


def encode_subpriorities(image: AttributeVector, imap: ImportanceMap) -> list[int]:
    imap.validate_for(len(image))
    return [e.weight if image[e.attribute] else 0 for e in imap.entries]


def load_register(codes: Sequence[int], layout: RegisterLayout) -> ToggleFabric:
    if len(codes) != layout.kappa:
        raise EncodingError(f"expected {layout.kappa} codes, got {len(codes)}")
    fab = ToggleFabric(layout.size)
    for i, code in enumerate(codes, 1):
        if not 0 <= code < 1 << layout.n1:
            raise EncodingError(f"code {code} for X_{i} exceeds {layout.n1} bits")
        fab.write(layout.field(i), code)
    return fab


def read_fields(fab: ToggleFabric, layout: RegisterLayout) -> list[int]:
    return [fab.read(layout.field(i)) for i in range(1, layout.kappa + 1)]


def ripple_add(acc: Sequence[int], addend: Sequence[int], carry: Sequence[int]) -> list[Instruction]:
    """In-place ``acc += addend`` (mod 2**len(acc)) with a clean carry line.

    ``addend`` may be narrower than ``acc``; missing high bits count as 0.
    ``carry`` needs ``len(acc) - 1`` toggles, all FALSE on entry; they are
    FALSE again on exit and ``addend`` is untouched.
    """
    w = len(acc)
    if len(addend) > w:
        raise GenerationError("addend wider than accumulator")
    if len(carry) < w - 1:
        raise GenerationError(f"need {w - 1} carry toggles, have {len(carry)}")
    b = list(addend) + [None] * (w - len(addend))
    # carry_in(i) lives in carry[i - 1]; bit 0 has no carry in.
    cin = [None] + list(carry[: w - 1])

    def compute(i: int) -> list[Instruction]:
        # c_{i+1} = a.b XOR (a^b).c ; leaves acc[i] = a ^ b
        out = []
        if b[i] is not None:
            out.append(toffoli(acc[i], b[i], cin[i + 1]))
            out.append(cnot(b[i], acc[i]))
        if cin[i] is not None:
            out.append(toffoli(acc[i], cin[i], cin[i + 1]))
        return out

    prog: list[Instruction] = []
    for i in range(w - 1):
        prog.extend(compute(i))
    # top bit: no carry out is kept
    if b[w - 1] is not None:
        prog.append(cnot(b[w - 1], acc[w - 1]))
    if cin[w - 1] is not None:
        prog.append(cnot(cin[w - 1], acc[w - 1]))
    for i in range(w - 2, -1, -1):
        prog.extend(reversed(compute(i)))
        if b[i] is not None:
            prog.append(cnot(b[i], acc[i]))
        if cin[i] is not None:
            prog.append(cnot(cin[i], acc[i]))
    return prog


def gen_adder_microcode(kappa: int, n1: int, layout: RegisterLayout | None = None) -> Program:
    """kappa - 1 adder blocks: A <- X_1 + X_2, then A <- A + X_{i+1}."""
    if kappa < 2:
        raise GenerationError("kappa must be >= 2")
    if layout is None:
        layout = RegisterLayout(kappa, n1)
    if (layout.kappa, layout.n1) != (kappa, n1):
        raise GenerationError(
            f"layout is for kappa={layout.kappa}, N1={layout.n1}; asked for kappa={kappa}, N1={n1}"
        )
    acc, carry = list(layout.acc), list(layout.carry)
    prog = Program()
    first = [cnot(x, a) for x, a in zip(layout.field(1), acc)]
    first += ripple_add(acc, list(layout.field(2)), carry)
    prog.block("1: A <- X1 + X2", first)
    for i in range(2, kappa):
        prog.block(f"{i}: A <- A + X{i + 1}", ripple_add(acc, list(layout.field(i + 1)), carry))
    return prog


def compute_priority(
    register: ToggleFabric,
    prog: Program,
    layout: RegisterLayout,
    kernel: EventQueue | None = None,
    timing: PulseTiming = PulseTiming(),
) -> int:
    """Run the adder microcode on a loaded register and decode A."""
    if register.size != layout.size:
        raise GenerationError(f"register has {register.size} toggles, layout needs {layout.size}")
    run_program(register, prog, kernel, timing)
    return register.read(layout.acc)


@dataclass
class RegisterEntry:
    image_id: int
    fabric: ToggleFabric
    bits: AttributeVector | None = None


@dataclass
class RegisterBank:
    layout: RegisterLayout
    entries: list[RegisterEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, image_id: int, codes: Sequence[int], bits: AttributeVector | None = None) -> RegisterEntry:
        entry = RegisterEntry(image_id, load_register(codes, self.layout), bits)
        self.entries.append(entry)
        return entry

    def bits_of(self, image_id: int) -> AttributeVector | None:
        for e in self.entries:
            if e.image_id == image_id:
                return e.bits
        return None


def compute_all(
    bank: RegisterBank,
    prog: Program,
    pulse: bool = False,
    timing: PulseTiming = PulseTiming(),
) -> list[tuple[int, int]]:
    """Priorities for every register, in bank order.

    Registers share no toggles, so each runs on its own; in pulse mode each
    gets a private kernel.
    """
    out = []
    for e in bank.entries:
        kernel = EventQueue() if pulse else None
        out.append((e.image_id, compute_priority(e.fabric, prog, bank.layout, kernel, timing)))
    return out
