"""Controlled toggles, the shared bus, and the source/target instruction set.

A toggle flips when its Target line is active and the bus is at rest. Each
Source toggle that is FALSE pulses the bus, so an instruction flips its
targets iff every source is TRUE. That makes every instruction a
multi-controlled NOT and therefore its own inverse.

Fabric state is kept as an int bitmask (bit i is toggle i) so that large
exhaustive sweeps stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .kernel import EventQueue, LineId


class MalformedInstruction(ValueError):
    pass


class ProgramFormatError(ValueError):
    pass


class ToggleFabric:
    """A fixed-size row of controlled toggles."""

    __slots__ = ("size", "state")

    def __init__(self, size: int, state: int = 0):
        if size < 0:
            raise ValueError("fabric size must be non-negative")
        if state < 0 or state >> size:
            raise ValueError(f"state {state:#x} does not fit {size} toggles")
        self.size = size
        self.state = state

    @classmethod
    def from_bits(cls, bits: Iterable[bool]) -> ToggleFabric:
        bits = list(bits)
        state = 0
        for i, b in enumerate(bits):
            if b:
                state |= 1 << i
        return cls(len(bits), state)

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> bool:
        if not 0 <= i < self.size:
            raise IndexError(i)
        return bool(self.state >> i & 1)

    def bits(self) -> list[bool]:
        return [bool(self.state >> i & 1) for i in range(self.size)]

    def read(self, indices: Sequence[int]) -> int:
        """Decode toggles at ``indices`` as an unsigned integer, LSB first."""
        v = 0
        for k, i in enumerate(indices):
            v |= (self.state >> i & 1) << k
        return v

    def write(self, indices: Sequence[int], value: int) -> None:
        if value >> len(indices):
            raise ValueError(f"value {value} does not fit {len(indices)} toggles")
        for k, i in enumerate(indices):
            if value >> k & 1:
                self.state |= 1 << i
            else:
                self.state &= ~(1 << i)

    def copy(self) -> ToggleFabric:
        return ToggleFabric(self.size, self.state)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ToggleFabric):
            return NotImplemented
        return self.size == other.size and self.state == other.state

    def __hash__(self) -> int:
        return hash((self.size, self.state))

    def __repr__(self) -> str:
        return f"ToggleFabric({''.join('1' if b else '0' for b in self.bits())})"


@dataclass(frozen=True)
class Instruction:
    sources: frozenset[int]
    targets: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "sources", frozenset(self.sources))
        object.__setattr__(self, "targets", frozenset(self.targets))
        if not self.targets:
            raise MalformedInstruction("instruction has no targets")
        if self.sources & self.targets:
            raise MalformedInstruction(
                f"toggles {sorted(self.sources & self.targets)} are both source and target"
            )
        if any(i < 0 for i in self.sources | self.targets):
            raise MalformedInstruction("negative toggle id")

    @cached_property
    def source_mask(self) -> int:
        return sum(1 << i for i in self.sources)

    @cached_property
    def target_mask(self) -> int:
        return sum(1 << i for i in self.targets)

    @cached_property
    def max_id(self) -> int:
        return max(self.sources | self.targets)

    def __str__(self) -> str:
        src = " ".join(str(i) for i in sorted(self.sources))
        tgt = " ".join(str(i) for i in sorted(self.targets))
        return f"SRC {src} ; TGT {tgt}".replace("SRC  ;", "SRC ;")


def flip(*targets: int) -> Instruction:
    return Instruction(frozenset(), frozenset(targets))


def cnot(source: int, target: int) -> Instruction:
    return Instruction(frozenset({source}), frozenset({target}))


def toffoli(a: int, b: int, target: int) -> Instruction:
    return Instruction(frozenset({a, b}), frozenset({target}))


@dataclass
class Program:
    """Ordered instructions with optional named block boundaries.

    ``blocks`` holds ``(label, start, stop)`` slices into ``instructions``.
    """

    instructions: list[Instruction] = field(default_factory=list)
    blocks: list[tuple[str, int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def block(self, label: str, instrs: Iterable[Instruction]) -> None:
        start = len(self.instructions)
        self.instructions.extend(instrs)
        self.blocks.append((label, start, len(self.instructions)))

    def inverse(self) -> Program:
        """Reversed order; each instruction is self-inverse."""
        return Program(self.instructions[::-1])

    def max_id(self) -> int:
        return max((ins.max_id for ins in self.instructions), default=-1)

    def dumps(self) -> str:
        markers: dict[int, list[str]] = {}
        for label, start, _ in self.blocks:
            markers.setdefault(start, []).append(label)
        lines = []
        for k in range(len(self.instructions) + 1):
            lines.extend(f"# block {label}" for label in markers.get(k, ()))
            if k < len(self.instructions):
                lines.append(str(self.instructions[k]))
        return "".join(line + "\n" for line in lines)

    @classmethod
    def loads(cls, text: str) -> Program:
        prog = cls()
        open_label: str | None = None
        open_start = 0

        def close():
            if open_label is not None:
                prog.blocks.append((open_label, open_start, len(prog.instructions)))

        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("block "):
                    close()
                    open_label = body[len("block "):]
                    open_start = len(prog.instructions)
                continue
            prog.instructions.append(parse_instruction(line, lineno))
        close()
        return prog


def parse_instruction(line: str, lineno: int = 0) -> Instruction:
    if ";" not in line:
        raise ProgramFormatError(f"line {lineno}: missing ';' in {line!r}")
    left, right = (part.split() for part in line.split(";", 1))
    if not left or left[0] != "SRC" or not right or right[0] != "TGT":
        raise ProgramFormatError(f"line {lineno}: expected 'SRC ... ; TGT ...', got {line!r}")
    try:
        sources = [int(tok) for tok in left[1:]]
        targets = [int(tok) for tok in right[1:]]
    except ValueError as exc:
        raise ProgramFormatError(f"line {lineno}: {exc}") from None
    try:
        return Instruction(frozenset(sources), frozenset(targets))
    except MalformedInstruction as exc:
        raise ProgramFormatError(f"line {lineno}: {exc}") from None


def _check(fabric: ToggleFabric, instr: Instruction) -> None:
    if instr.max_id >= fabric.size:
        raise MalformedInstruction(
            f"toggle {instr.max_id} out of range for fabric of {fabric.size}"
        )


def exec_logical(fabric: ToggleFabric, instr: Instruction) -> ToggleFabric:
    """Apply ``instr`` in place: targets flip iff all sources are TRUE."""
    _check(fabric, instr)
    sm = instr.source_mask
    if fabric.state & sm == sm:
        fabric.state ^= instr.target_mask
    return fabric


@dataclass(frozen=True)
class PulseTiming:
    """Offsets (ticks) of the pulse protocol relative to instruction issue."""

    window_open: int = 0
    bus_delay: int = 1
    sample_delay: int = 2

    def __post_init__(self):
        if min(self.window_open, self.bus_delay, self.sample_delay) < 0:
            raise ValueError("pulse delays must be non-negative")
        if self.sample_delay <= self.bus_delay:
            raise ValueError("targets must sample after bus pulses arrive")


BUS_LINE = "bus"


def exec_pulse(
    fabric: ToggleFabric,
    instr: Instruction,
    kernel: EventQueue,
    timing: PulseTiming = PulseTiming(),
) -> ToggleFabric:
    """Apply ``instr`` by simulating bus pulses on ``kernel``.

    At window open each FALSE source emits a pulse that reaches the bus
    ``bus_delay`` ticks later. Each target samples the bus at
    ``sample_delay``; it flips only if no pulse arrived in its window.
    Runs the kernel up to the end of the window.
    """
    _check(fabric, instr)
    bus = kernel.line(BUS_LINE)
    sample_lines: dict[LineId, int] = {}
    for t in sorted(instr.targets):
        sample_lines[kernel.line(f"sample:{t}")] = t

    for s in sorted(instr.sources):
        if not fabric.state >> s & 1:
            kernel.schedule(timing.window_open + timing.bus_delay, bus)
    for lid in sample_lines:
        kernel.schedule(timing.window_open + timing.sample_delay, lid)
    end = kernel.now + timing.window_open + timing.sample_delay
    bus_active = False

    def sink(_time: int, line: LineId) -> None:
        nonlocal bus_active
        if line == bus:
            bus_active = True
        elif line in sample_lines and not bus_active:
            fabric.state ^= 1 << sample_lines[line]

    kernel.run_until(end, sink)
    return fabric


def run_program(
    fabric: ToggleFabric,
    prog: Program | Iterable[Instruction],
    kernel: EventQueue | None = None,
    timing: PulseTiming = PulseTiming(),
) -> ToggleFabric:
    """Run instructions in order, logically or (given a kernel) via pulses."""
    instrs = prog.instructions if isinstance(prog, Program) else list(prog)
    if kernel is not None:
        for ins in instrs:
            exec_pulse(fabric, ins, kernel, timing)
        return fabric
    for ins in instrs:
        _check(fabric, ins)
    state = fabric.state
    for ins in instrs:
        sm = ins.source_mask
        if state & sm == sm:
            state ^= ins.target_mask
    fabric.state = state
    return fabric
