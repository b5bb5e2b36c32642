"""Exit criteria. Each test prints one PASS/FAIL line."""

import itertools
import random
import time

import pytest

from oracles import all_states, brute_force_toggle, decode, instruction_shapes
from togglebrain.brain import Brain
from togglebrain.config import StimulusTrace, loads_config
from togglebrain.fabric import Instruction, ToggleFabric, exec_logical, exec_pulse, run_program
from togglebrain.kernel import EventQueue, format_log
from togglebrain.memory import AttributeVector, LTMStore, cue_editor_step, memorize, search
from togglebrain.priority import RegisterLayout, gen_adder_microcode, load_register
from togglebrain.selector import PriorityValue, Verdict, compare, select_max


@pytest.fixture
def report(capsys):
    def _report(n, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} {detail}".rstrip())
        assert ok, f"criterion {n} failed: {detail}"
    return _report


def _shape_cases():
    for s, t in instruction_shapes(3, 2):
        ins = Instruction(frozenset(range(s)), frozenset(range(s, s + t)))
        for state in all_states(s + t):
            yield ins, state


def test_c1_toggle_truth_table(report):
    t0 = time.perf_counter()
    total = agree = 0
    for ins, state in _shape_cases():
        fab = exec_logical(ToggleFabric.from_bits(state), ins)
        total += 1
        agree += fab.bits() == brute_force_toggle(list(state), ins.sources, ins.targets)
    dt = time.perf_counter() - t0
    report(1, "toggle ISA truth table", agree == total and dt < 1.0, f"{agree}/{total} in {dt:.3f}s")


def test_c2_pulse_logic_equivalence(report):
    t0 = time.perf_counter()
    total = agree = 0
    for ins, state in _shape_cases():
        a = exec_logical(ToggleFabric.from_bits(state), ins)
        b = exec_pulse(ToggleFabric.from_bits(state), ins, EventQueue())
        total += 1
        agree += a == b
    dt = time.perf_counter() - t0
    report(2, "pulse/logic equivalence", agree == total and dt < 5.0, f"{agree}/{total} in {dt:.3f}s")


def _adder_ok(codes, n1, prog, lay):
    fab = load_register(codes, lay)
    run_program(fab, prog)
    bits = fab.bits()
    return (
        decode(bits, lay.acc) == sum(codes)
        and not any(bits[i] for i in lay.carry)
        and all(decode(bits, lay.field(i)) == codes[i - 1] for i in range(2, len(codes) + 1))
    )


def test_c3_reversible_adder(report):
    t0 = time.perf_counter()
    lay, prog = RegisterLayout(3, 3), gen_adder_microcode(3, 3)
    exhaustive = [_adder_ok(list(c), 3, prog, lay) for c in itertools.product(range(8), repeat=3)]
    rng = random.Random(20_240_601)
    lay6, prog6 = RegisterLayout(6, 6), gen_adder_microcode(6, 6)
    randomized = [_adder_ok([rng.randrange(64) for _ in range(6)], 6, prog6, lay6) for _ in range(10_000)]
    dt = time.perf_counter() - t0
    ok = len(exhaustive) == 512 and all(exhaustive) and all(randomized) and dt < 30.0
    report(3, "reversible adder", ok,
           f"{sum(exhaustive)}/512 exhaustive, {sum(randomized)}/10000 random in {dt:.2f}s")


def test_c4_adder_block_count(report):
    counts = {(k, n1): len(gen_adder_microcode(k, n1).blocks) for k in range(2, 9) for n1 in (1, 3, 6)}
    ok = all(c == k - 1 for (k, _), c in counts.items())
    report(4, "kappa-1 adder blocks for kappa in 2..8", ok,
           " ".join(f"k={k}:{counts[(k, 3)]}" for k in range(2, 9)))


def test_c5_comparator_and_argmax(report):
    t0 = time.perf_counter()
    pairs_ok = 0
    for a in range(16):
        for b in range(16):
            want = Verdict.EQUAL if a == b else Verdict.A_GREATER if a > b else Verdict.B_GREATER
            pairs_ok += compare(PriorityValue(a, 0, 4), PriorityValue(b, 1, 4)) is want
    rng = random.Random(7)
    lists_ok = 0
    for _ in range(10_000):
        n = rng.randint(1, 10)
        width = rng.randint(1, 8)
        vals = [rng.randrange(1 << width) for _ in range(n)]
        ids = rng.sample(range(100), n)
        best = max(vals)
        want = min(i for i, v in zip(ids, vals) if v == best)
        res = select_max([PriorityValue(v, i, width) for i, v in zip(ids, vals)])
        lists_ok += res.winner == want and res.priority == best and res.contenders == n
    dt = time.perf_counter() - t0
    ok = pairs_ok == 256 and lists_ok == 10_000 and dt < 10.0
    report(5, "comparator and argmax", ok, f"{pairs_ok}/256 pairs, {lists_ok}/10000 lists in {dt:.2f}s")


def test_c6_cue_editor_termination(report):
    rng = random.Random(11)
    passed = 0
    for _ in range(1000):
        k = rng.randint(1, 10)
        store = LTMStore(k, 64)
        for _ in range(rng.randint(1, 8)):
            memorize(store, AttributeVector(tuple(rng.random() < 0.5 for _ in range(k))))
        cues = frozenset(rng.sample(range(k), rng.randint(1, k)))
        budget = len(cues)
        matches = set(search(store, cues).ids())
        steps, monotone = 0, True
        while not search(store, cues).hit and steps <= budget:
            cues, _ = cue_editor_step(cues, rng)
            steps += 1
            now = set(search(store, cues).ids())
            monotone &= matches <= now
            matches = now
        passed += search(store, cues).hit and steps <= budget and monotone
    report(6, "cue-editor termination and monotonicity", passed == 1000, f"{passed}/1000")


SCENARIO = """
K = 6
N1 = 3
importance = danger:0:7, emotion:1:5, loud:2:3
major_mask = 3
key_mask = 0, 1, 2
significance_mask = 0, 1, 2
R = 3
D = 1000
seed = {seed}
"""


def test_c7_memorization_idempotence(report):
    cfg = loads_config("K = 6\nimportance = 0:7, 1:5, 2:3\nmajor_mask = 3, 4\nsignificance_mask = 2\nR = 3\nD = 1000\nseed = 1\n")
    frame = AttributeVector.from_str("001110")
    trace = StimulusTrace([(2000 * i, frame) for i in range(10)])
    log = Brain(cfg).run(trace, 20)
    memo = log.entries("MEMORIZE")
    searches = [i for i, kind in enumerate(log.kinds()) if kind == "SEARCH"]
    after = [log.lines[i + 1].split("\t")[1] for i in searches if int(log.lines[i].split("\t")[0]) > int(memo[0][0])]
    ok = len(memo) == 1 and len(after) >= 9 and all(k == "HIT" for k in after)
    report(7, "memorization idempotence", ok, f"{len(memo)} MEMORIZE, {after.count('HIT')}/{len(after)} later searches HIT")


def _scenario_run(seed):
    """Three importance-tagged images sharing cue attribute 3, then the bare cue."""
    cfg = loads_config(SCENARIO.format(seed=seed))
    images = ["100100", "010100", "001100"]        # danger, emotion, loud
    frames = [(2000 * i, AttributeVector.from_str(s)) for i, s in enumerate(images)]
    cue_time = 2000 * len(images)
    frames.append((cue_time, AttributeVector.from_str("000100")))
    brain = Brain(cfg)
    log = brain.run(StimulusTrace(frames), len(frames) * 2)
    return brain, log, cue_time // cfg.D


def test_c8_end_to_end_priority(report):
    # hand oracle: danger 7 > emotion 5 > loud 3
    expected = {"100100": 7, "010100": 5, "001100": 3}
    t0 = time.perf_counter()
    outcomes = []
    for _ in range(5):
        brain, log, cue_cycle = _scenario_run(seed=99)
        memorized = [e[4] for e in log.entries("MEMORIZE")]
        select = [e for e in log.entries("SELECT") if int(e[0]) == cue_cycle]
        recall = [e for e in log.entries("LOAD_STM") if int(e[0]) == cue_cycle + 1]
        outcomes.append((
            memorized == list(expected),
            bool(select) and select[0][3] == str(expected["100100"]) and select[0][4] == "3",
            bool(recall) and recall[0][3:] == ["RECALL", "100100"],
            log.text(),
        ))
    dt = time.perf_counter() - t0
    ok = all(o[0] and o[1] and o[2] for o in outcomes) and len({o[3] for o in outcomes}) == 1 and dt < 5.0
    report(8, "end-to-end priority scenario", ok, f"danger image recalled in 5/5 reruns, {dt:.2f}s" if ok else str(outcomes[0][:3]))


def test_c9_determinism(report):
    (b1, l1, _), (b2, l2, _) = _scenario_run(seed=2024), _scenario_run(seed=2024)
    a, b = l1.text().encode(), l2.text().encode()
    ev_a, ev_b = format_log(b1.events).encode(), format_log(b2.events).encode()
    ok = a == b and len(a) > 0 and ev_a == ev_b and len(ev_a) > 0
    report(9, "byte-identical RunLogs", ok, f"{len(a)} log bytes, {len(b1.events)} kernel events")
