import pytest
from hypothesis import given, strategies as st

from togglebrain.memory import AttributeVector, Origin, STMRow, stm_read
from togglebrain.priority import RegisterBank, RegisterLayout
from togglebrain.selector import (
    NO_CONTENDERS,
    PriorityValue,
    RoutingError,
    SelectionResult,
    Verdict,
    compare,
    route_winner,
    select_max,
)


def oracle_order(a, b):
    return Verdict.EQUAL if a == b else Verdict.A_GREATER if a > b else Verdict.B_GREATER


def argmax_lowest_id(pairs):
    best = max(v for _, v in pairs)
    return min(i for i, v in pairs if v == best), best


def pv(value, image_id=0, width=4):
    return PriorityValue(value, image_id, width)


def test_compare_examples():
    assert compare(pv(8), pv(5)) is Verdict.A_GREATER
    assert compare(pv(3), pv(3)) is Verdict.EQUAL
    assert compare(pv(0), pv(15)) is Verdict.B_GREATER


@pytest.mark.parametrize("width", [1, 2, 3, 4])
def test_compare_exhaustive(width):
    for a in range(1 << width):
        for b in range(1 << width):
            assert compare(pv(a, 0, width), pv(b, 1, width)) is oracle_order(a, b)


@given(st.integers(5, 8).flatmap(lambda w: st.tuples(st.just(w), st.integers(0, (1 << w) - 1), st.integers(0, (1 << w) - 1))))
def test_compare_random_wide(args):
    w, a, b = args
    assert compare(pv(a, 0, w), pv(b, 1, w)) is oracle_order(a, b)


def test_compare_width_mismatch():
    with pytest.raises(ValueError):
        compare(pv(1, 0, 4), pv(1, 0, 5))
    with pytest.raises(ValueError):
        pv(16, 0, 4)


def test_select_tie_to_lowest_id():
    res = select_max([pv(8, 0), pv(15, 1), pv(15, 2)])
    assert (res.winner, res.priority, res.contenders) == (1, 15, 3)


def test_select_singleton_and_empty():
    assert select_max([pv(0, 9)]).winner == 9
    assert select_max([]) == NO_CONTENDERS
    assert not NO_CONTENDERS.has_winner


@given(st.lists(st.integers(0, 15), min_size=1, max_size=12), st.randoms())
def test_select_matches_oracle_and_permutation(values, rnd):
    pairs = list(enumerate(values))
    items = [pv(v, i) for i, v in pairs]
    res = select_max(items)
    assert (res.winner, res.priority) == argmax_lowest_id(pairs)
    assert all(res.priority >= p.value for p in items)
    rnd.shuffle(items)
    assert select_max(items).winner == res.winner


def test_route_winner():
    lay = RegisterLayout(2, 2)
    bank = RegisterBank(lay)
    bank.add(4, [1, 2], AttributeVector.from_str("1100"))
    stm = STMRow.empty(4)
    bits = route_winner(SelectionResult(4, 3, 1), bank, stm)
    assert stm_read(stm) == bits == AttributeVector.from_str("1100")
    assert stm.origin is Origin.RECALL


def test_route_no_contenders_leaves_stm():
    stm = STMRow(AttributeVector.from_str("0011"))
    assert route_winner(NO_CONTENDERS, {}, stm) is None
    assert stm.bits == AttributeVector.from_str("0011") and stm.origin is Origin.SENSORY


def test_route_missing_vector():
    with pytest.raises(RoutingError):
        route_winner(SelectionResult(7, 1, 1), {}, STMRow.empty(2))
