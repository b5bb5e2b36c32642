"""The autonomous sense / recall loop.

An oscillator alternates SENSE and RECALL phases every ``D`` ticks. In a
SENSE phase the multiplexer puts the current sensory frame into STM; in a
RECALL phase it puts the pending highest-priority recall there. Every STM
load triggers an LTM search, and every HIT is prioritized in the toggle
registers to produce the next recall candidate.

Run log lines are tab separated, first field the cycle number:

    LOAD_STM  tick origin bits
    SEARCH    cues                      (comma list, '-' if empty)
    HIT       count ids
    NO_HIT
    SELECT    winner priority contenders ('-' when nobody contends)
    MEMORIZE  id tick bits status       (status OK, or FULL with id '-')
    CUE_EDIT  removed remaining         ('-' '-' once the editor is exhausted)
    ACTION    tick origin bits priority danger
"""

from __future__ import annotations

import enum
import logging
import random
from collections import deque
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable

from .config import Config, StimulusTrace
from .kernel import EventQueue, LineId, RunAborted
from .memory import (
    AttributeVector,
    CapacityExhausted,
    CueSet,
    ImageRecord,
    LTMStore,
    NoveltyState,
    Origin,
    SearchResult,
    STMRow,
    cue_editor_step,
    derive_cues,
    memorize,
    novelty_gate,
    search,
    stm_load,
)
from .priority import RegisterBank, RegisterLayout, compute_all, encode_subpriorities, gen_adder_microcode
from .selector import PriorityValue, SelectionResult, route_winner, select_max

log = logging.getLogger(__name__)


class Phase(enum.Enum):
    SENSE = "SENSE"
    RECALL = "RECALL"


@dataclass
class Oscillator:
    half_period: int
    phase: Phase = Phase.SENSE

    def __post_init__(self):
        if self.half_period < 1:
            raise ValueError("oscillator half-period must be >= 1 tick")

    def flip(self) -> None:
        self.phase = Phase.RECALL if self.phase is Phase.SENSE else Phase.SENSE


@dataclass(frozen=True)
class ActionEvent:
    time: int
    bits: AttributeVector
    origin: Origin
    priority: int | None
    danger: bool


@dataclass(frozen=True)
class Candidate:
    record: ImageRecord
    priority: int
    produced_in: int


def _join(ids: Iterable[int]) -> str:
    s = ",".join(str(i) for i in ids)
    return s or "-"


@dataclass
class RunLog:
    lines: list[str] = field(default_factory=list)

    def add(self, cycle: int, kind: str, *fields) -> None:
        self.lines.append("\t".join([str(cycle), kind, *map(str, fields)]))

    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines)

    def kinds(self) -> list[str]:
        return [line.split("\t")[1] for line in self.lines]

    def entries(self, kind: str) -> list[list[str]]:
        return [parts for parts in (line.split("\t") for line in self.lines) if parts[1] == kind]

    def __len__(self) -> int:
        return len(self.lines)


class Brain:
    """Mutable brain state plus the cycle/run drivers."""

    def __init__(self, config: Config, ltm: LTMStore | None = None, seed: int | None = None):
        seed = config.seed if seed is None else seed
        if seed is None:
            raise ValueError("a seed is required")
        if ltm is None:
            ltm = LTMStore(config.K, config.M)
        elif ltm.k != config.K:
            raise ValueError(f"LTM width K={ltm.k} does not match config K={config.K}")
        self.config = config
        self.oscillator = Oscillator(config.D)
        self.stm = STMRow.empty(config.K)
        self.ltm = ltm
        self.novelty = NoveltyState(config.R, config.significance_mask)
        self.candidate: Candidate | None = None
        self.editor_cues: CueSet | None = None
        self.rng = random.Random(seed)
        self.log = RunLog()
        self.events: list[tuple[int, str]] = []  # kernel deliveries, (tick, line)
        self.layout = RegisterLayout(config.kappa, config.N1)
        self.program = gen_adder_microcode(config.kappa, config.N1, self.layout)
        self.importance = config.importance_map()
        self.cycle_no = 0
        self._searched = False

    @property
    def now(self) -> int:
        return self.cycle_no * self.config.D

    @property
    def phase(self) -> Phase:
        return self.oscillator.phase

    # -- one half-period ---------------------------------------------------

    def cycle(self, sensory: AttributeVector | None = None) -> list[ActionEvent]:
        if sensory is not None and len(sensory) != self.config.K:
            raise ValueError(f"sensory width {len(sensory)} != K={self.config.K}")
        actions: list[ActionEvent] = []
        if self.phase is Phase.SENSE:
            if sensory is not None:
                self._load(sensory, Origin.SENSORY, None, actions)
                self._sense_search(sensory)
            elif not self._searched:
                # resting STM content is searched once at boot
                self._recall_search(self.stm.bits, exclude=None)
        else:
            if sensory is not None:
                raise ValueError("sensory frames are only accepted in SENSE phase")
            cand, self.candidate = self.candidate, None
            if cand is not None:
                chosen = SelectionResult(cand.record.id, cand.priority, 1)
                bits = route_winner(chosen, {cand.record.id: cand.record.bits}, self.stm)
                self._load(bits, Origin.RECALL, cand.priority, actions, stm_done=True)
                self._recall_search(bits, exclude=cand.record.id)
            if self.editor_cues is not None:
                self._edit_cues()
        self.oscillator.flip()
        self.cycle_no += 1
        return actions

    def _load(self, bits, origin, priority, actions, stm_done=False) -> None:
        if not stm_done:
            stm_load(self.stm, bits, origin)
        c, t = self.cycle_no, self.now
        self.log.add(c, "LOAD_STM", t, origin.value, bits)
        ev = ActionEvent(t, bits, origin, priority, bool(bits[self.config.danger_attribute]))
        self.log.add(c, "ACTION", t, origin.value, bits, "-" if priority is None else priority, int(ev.danger))
        actions.append(ev)

    def _search(self, cues: AbstractSet[int]) -> SearchResult:
        self._searched = True
        res = search(self.ltm, cues)
        self.log.add(self.cycle_no, "SEARCH", _join(sorted(cues)))
        if res.hit:
            self.log.add(self.cycle_no, "HIT", len(res.records), _join(res.ids()))
        else:
            self.log.add(self.cycle_no, "NO_HIT")
        return res

    def _sense_search(self, bits: AttributeVector) -> None:
        cfg = self.config
        cues = derive_cues(bits, cfg.major_mask)
        res = self._search(cues)
        self.candidate = None
        self._after_search(res, cues, exclude=None)
        if cfg.key_mask == cfg.major_mask:
            key_res = res
        else:
            key_res = search(self.ltm, derive_cues(bits, cfg.key_mask))
        enable, self.novelty = novelty_gate(self.novelty, bits, key_res)
        if enable:
            try:
                rec = memorize(self.ltm, bits, self.now)
            except CapacityExhausted as exc:
                log.warning("memorization skipped: %s", exc)
                self.log.add(self.cycle_no, "MEMORIZE", "-", self.now, bits, "FULL")
            else:
                if rec is not None:
                    self.log.add(self.cycle_no, "MEMORIZE", rec.id, rec.memorized_at, rec.bits, "OK")

    def _recall_search(self, bits: AttributeVector, exclude: int | None) -> None:
        cues = derive_cues(bits, self.config.major_mask)
        self._after_search(self._search(cues), cues, exclude)

    def _after_search(self, res: SearchResult, cues: CueSet, exclude: int | None) -> None:
        if res.hit:
            self.editor_cues = None
            self._prioritize([r for r in res.records if r.id != exclude])
        else:
            self.editor_cues = cues

    def _prioritize(self, records: list[ImageRecord]) -> None:
        bank = RegisterBank(self.layout)
        by_id = {}
        for r in records:
            bank.add(r.id, encode_subpriorities(r.bits, self.importance), r.bits)
            by_id[r.id] = r
        sums = compute_all(bank, self.program, pulse=self.config.pulse_mode, timing=self.config.timing())
        result = select_max([PriorityValue(p, i, self.layout.width) for i, p in sums])
        if result.has_winner:
            self.log.add(self.cycle_no, "SELECT", result.winner, result.priority, result.contenders)
            self.candidate = Candidate(by_id[result.winner], result.priority, self.cycle_no)
        else:
            self.log.add(self.cycle_no, "SELECT", "-", "-", 0)

    def _edit_cues(self) -> None:
        step = cue_editor_step(self.editor_cues, self.rng)
        if step is None:
            self.log.add(self.cycle_no, "CUE_EDIT", "-", "-")
            self.editor_cues = None
            return
        cues, removed = step
        self.log.add(self.cycle_no, "CUE_EDIT", removed, _join(sorted(cues)))
        res = self._search(cues)
        if res.hit:
            self.editor_cues = None
            self._prioritize(list(res.records))
        else:
            self.editor_cues = cues

    # -- kernel-driven run -------------------------------------------------

    def run(self, trace: StimulusTrace, cycles: int) -> RunLog:
        """Advance ``cycles`` half-periods, feeding trace frames by time.

        A SENSE boundary at tick t takes the latest not-yet-presented frame
        with time <= t; older frames in the same window are superseded.
        """
        trace.validate(self.config.K)
        if cycles < 0:
            raise ValueError("cycles must be >= 0")
        if cycles == 0:
            return self.log
        start = self.now
        end = start + (cycles - 1) * self.config.D
        kernel = EventQueue(horizon=self.config.horizon, record=True)
        kernel.now = start
        if end > kernel.horizon:
            raise RunAborted(f"run would reach tick {end}, past horizon {kernel.horizon}")
        sensor, osc = kernel.line("sensor"), kernel.line("oscillator")
        pending = deque()
        for t, bits in trace:
            if t > end:
                break
            kernel.schedule(max(0, t - start), sensor)
            pending.append(bits)
        latest: AttributeVector | None = None
        remaining = cycles

        def sink(_time: int, line: LineId) -> None:
            nonlocal latest, remaining
            if line == sensor:
                latest = pending.popleft()
                return
            frame = None
            if self.phase is Phase.SENSE:
                frame, latest = latest, None
            self.cycle(frame)
            remaining -= 1
            if remaining:
                kernel.schedule(self.config.D, osc)

        kernel.schedule(0, osc)
        kernel.run_until(end, sink)
        self.events.extend(kernel.log)
        return self.log


def default_cycles(trace: StimulusTrace, half_period: int) -> int:
    """Enough half-periods to present every frame and recall once after."""
    if not trace.frames:
        return 2
    n = -(-trace.frames[-1][0] // half_period)
    n += n % 2  # SENSE boundaries sit at even cycle numbers
    return n + 2
