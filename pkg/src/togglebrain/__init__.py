"""Discrete-event simulator of a controlled-toggle artificial brain."""

from .brain import ActionEvent, Brain, Oscillator, Phase, RunLog
from .config import Config, StimulusTrace, load_config, load_stimuli, loads_config, loads_stimuli
from .fabric import (
    Instruction,
    Program,
    PulseTiming,
    ToggleFabric,
    exec_logical,
    exec_pulse,
    run_program,
)
from .kernel import EventQueue, LineId, RunAborted
from .memory import (
    AttributeVector,
    ImageRecord,
    LTMStore,
    NoveltyState,
    Origin,
    STMRow,
    cue_editor_step,
    derive_cues,
    memorize,
    novelty_gate,
    search,
)
from .priority import (
    ImportanceEntry,
    ImportanceMap,
    RegisterBank,
    RegisterLayout,
    compute_all,
    compute_priority,
    encode_subpriorities,
    gen_adder_microcode,
    load_register,
)
from .selector import PriorityValue, SelectionResult, Verdict, compare, route_winner, select_max

__version__ = "0.1.0"
