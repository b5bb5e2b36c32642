"""Run configuration and stimulus traces.

Config files are ``key = value`` lines; ``#`` starts a comment. Lists are
comma separated. Importance entries are ``name:attribute:weight`` (the name
is optional) listed from most to least important, e.g.::

    K = 8
    N1 = 3
    importance = danger:0:7, emotion:1:5, loud:2:3
    major_mask = 3, 4
    significance_mask = 2
    seed = 1
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from .fabric import PulseTiming
from .kernel import DEFAULT_HORIZON
from .memory import AttributeVector
from .priority import EncodingError, ImportanceEntry, ImportanceMap


class ConfigError(ValueError):
    def __init__(self, fieldname: str, message: str):
        super().__init__(f"{fieldname}: {message}")
        self.field = fieldname


class StimulusError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    K: int = 8
    kappa: int = 3
    N1: int = 3
    M: int = 64
    R: int = 3
    D: int = 20_000
    importance: tuple[ImportanceEntry, ...] = ()
    major_mask: frozenset[int] | None = None
    key_mask: frozenset[int] | None = None
    significance_mask: frozenset[int] = frozenset()
    danger_attribute: int | None = None
    window_open: int = 0
    bus_delay: int = 1
    sample_delay: int = 2
    pulse_mode: bool = False
    seed: int | None = None
    horizon: int = DEFAULT_HORIZON

    def __post_init__(self):
        if not self.importance:
            if self.kappa < 2:
                raise ConfigError("kappa", f"must be >= 2, got {self.kappa}")
            if self.kappa > self.K:
                raise ConfigError("kappa", f"kappa={self.kappa} exceeds K={self.K}")
            try:
                imap = ImportanceMap.default(self.kappa, self.N1)
            except EncodingError as exc:
                raise ConfigError("importance", str(exc)) from None
            object.__setattr__(self, "importance", imap.entries)
        if self.major_mask is None:
            object.__setattr__(self, "major_mask", frozenset(range(self.K)))
        if self.key_mask is None:
            object.__setattr__(self, "key_mask", self.major_mask)
        if self.danger_attribute is None:
            object.__setattr__(self, "danger_attribute", self.importance[0].attribute)
        self.validate()

    def validate(self) -> None:
        for name in ("K", "N1", "R", "D"):
            if getattr(self, name) < 1:
                raise ConfigError(name, f"must be >= 1, got {getattr(self, name)}")
        if self.M < 0:
            raise ConfigError("M", "must be >= 0")
        if self.kappa != len(self.importance):
            raise ConfigError("kappa", f"kappa={self.kappa} but {len(self.importance)} importance entries given")
        if self.kappa < 2:
            raise ConfigError("kappa", f"must be >= 2, got {self.kappa}")
        if self.kappa > self.K:
            raise ConfigError("kappa", f"kappa={self.kappa} exceeds K={self.K}")
        try:
            self.importance_map().validate_for(self.K)
        except EncodingError as exc:
            raise ConfigError("importance", str(exc)) from None
        for name in ("major_mask", "key_mask", "significance_mask"):
            bad = sorted(i for i in getattr(self, name) if not 0 <= i < self.K)
            if bad:
                raise ConfigError(name, f"indices {bad} outside K={self.K}")
        if not 0 <= self.danger_attribute < self.K:
            raise ConfigError("danger_attribute", f"{self.danger_attribute} outside K={self.K}")
        try:
            self.timing()
        except ValueError as exc:
            raise ConfigError("sample_delay", str(exc)) from None
        if self.horizon < 0:
            raise ConfigError("horizon", "must be >= 0")

    def importance_map(self) -> ImportanceMap:
        return ImportanceMap(self.importance, self.N1)

    def timing(self) -> PulseTiming:
        return PulseTiming(self.window_open, self.bus_delay, self.sample_delay)

    def with_seed(self, seed: int) -> Config:
        return replace(self, seed=seed)


_INT_KEYS = ("K", "kappa", "N1", "M", "R", "D", "danger_attribute", "window_open",
             "bus_delay", "sample_delay", "seed", "horizon")
_MASK_KEYS = ("major_mask", "key_mask", "significance_mask")


def _int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {raw!r}") from None


def _mask(key: str, raw: str) -> frozenset[int]:
    return frozenset(_int(key, tok.strip()) for tok in raw.split(",") if tok.strip())


def _importance(raw: str) -> tuple[ImportanceEntry, ...]:
    entries = []
    for tok in raw.split(","):
        tok = tok.strip()
        if not tok:
            continue
        parts = tok.split(":")
        if len(parts) == 2:
            name, attr, weight = "", parts[0], parts[1]
        elif len(parts) == 3:
            name, attr, weight = parts
        else:
            raise ConfigError("importance", f"bad entry {tok!r}; want name:attribute:weight")
        entries.append(ImportanceEntry(_int("importance", attr), _int("importance", weight), name.strip()))
    return tuple(entries)


def loads_config(text: str) -> Config:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(key, f"set twice (line {lineno})")
        if key in _INT_KEYS:
            values[key] = _int(key, val)
        elif key in _MASK_KEYS:
            values[key] = _mask(key, val)
        elif key == "importance":
            values[key] = _importance(val)
        elif key == "pulse_mode":
            if val.lower() not in ("true", "false", "1", "0"):
                raise ConfigError(key, f"expected true/false, got {val!r}")
            values[key] = val.lower() in ("true", "1")
        else:
            raise ConfigError(key, "unknown config key")
    if "importance" in values and "kappa" not in values:
        values["kappa"] = len(values["importance"])
    return Config(**values)


def load_config(path: str | Path) -> Config:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("path", str(exc)) from None
    return loads_config(text)


def dumps_config(cfg: Config) -> str:
    def mask(m: Iterable[int]) -> str:
        return ", ".join(str(i) for i in sorted(m))

    imp = ", ".join(
        f"{e.name}:{e.attribute}:{e.weight}" if e.name else f"{e.attribute}:{e.weight}"
        for e in cfg.importance
    )
    lines = [f"{k} = {getattr(cfg, k)}" for k in ("K", "kappa", "N1", "M", "R", "D")]
    lines.append(f"importance = {imp}")
    lines += [f"{k} = {mask(getattr(cfg, k))}" for k in _MASK_KEYS]
    lines += [f"{k} = {getattr(cfg, k)}" for k in ("danger_attribute", "window_open", "bus_delay", "sample_delay")]
    lines.append(f"pulse_mode = {str(cfg.pulse_mode).lower()}")
    if cfg.seed is not None:
        lines.append(f"seed = {cfg.seed}")
    lines.append(f"horizon = {cfg.horizon}")
    return "\n".join(lines) + "\n"


@dataclass
class StimulusTrace:
    frames: list[tuple[int, AttributeVector]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def validate(self, k: int) -> None:
        last = 0
        for n, (t, bits) in enumerate(self.frames, 1):
            if t < 0 or t < last:
                raise StimulusError(f"frame {n}: time {t} goes backwards")
            if len(bits) != k:
                raise StimulusError(f"frame {n}: width {len(bits)} != K={k}")
            last = t

    def dumps(self) -> str:
        return "".join(f"{t},{bits}\n" for t, bits in self.frames)


def loads_stimuli(text: str, k: int) -> StimulusTrace:
    trace = StimulusTrace()
    last = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.count(",") != 1:
            raise StimulusError(f"line {lineno}: expected '<time>,<bits>', got {raw!r}")
        ts, bs = (s.strip() for s in line.split(","))
        try:
            t = int(ts)
        except ValueError:
            raise StimulusError(f"line {lineno}: bad time {ts!r}") from None
        if t < last or t < 0:
            raise StimulusError(f"line {lineno}: time {t} is before previous frame at {last}")
        if any(c not in "01" for c in bs):
            raise StimulusError(f"line {lineno}: non-binary character in {bs!r}")
        if len(bs) != k:
            raise StimulusError(f"line {lineno}: {len(bs)} attributes, expected K={k}")
        trace.frames.append((t, AttributeVector.from_str(bs)))
        last = t
    return trace


def load_stimuli(path: str | Path, k: int) -> StimulusTrace:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StimulusError(str(exc)) from None
    return loads_stimuli(text, k)
