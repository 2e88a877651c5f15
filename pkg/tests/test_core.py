import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from affectdt.core import (
    LINEAR,
    Lottery,
    LotteryError,
    expected_utility,
    gain_loss_number,
    linear,
    logarithmic,
    mix,
    square_root,
    st_petersburg_lottery,
    tabulated,
    validate_lottery,
)


def test_certain_lottery_utility():
    assert expected_utility(Lottery.certain(1.0)) == 1.0


def test_allais_l2_expected_utility():
    l2 = Lottery((1, 5, 0), (0.89, 0.10, 0.01))
    assert expected_utility(l2) == pytest.approx(1.39, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5, 10, 30])
def test_st_petersburg_utility_is_n(n):
    assert expected_utility(st_petersburg_lottery(n)) == pytest.approx(n, rel=1e-12)


def test_gain_loss_number_examples():
    assert gain_loss_number(Lottery((3, 0), (0.4, 0.6))) == 1
    assert gain_loss_number(Lottery((1, 2, 0), (0.3, 0.3, 0.4))) == 2
    assert gain_loss_number(Lottery((0, 0), (0.5, 0.5))) == 0
    assert gain_loss_number(Lottery((-1, 2, 5), (0.2, 0.8, 0.0))) == 0


def test_validate_lottery_diagnostics():
    assert validate_lottery([1, 2], [0.5, 0.5])
    bad = validate_lottery([1, 2], [0.5, 0.6])
    assert not bad and bad.prob_sum == pytest.approx(1.1)
    assert any("sum violation" in m for m in bad.messages)
    short = validate_lottery([1, 2], [1.0])
    assert any("length mismatch" in m for m in short.messages)
    assert any("outside" in m for m in validate_lottery([1, 2], [-0.1, 1.1]).messages)


def test_invalid_lottery_rejected_with_label():
    with pytest.raises(LotteryError, match="'bad'.*sum violation"):
        Lottery((1, 2), (0.5, 0.6), "bad")
    with pytest.raises(LotteryError):
        Lottery((), ())


def test_mix_merges_payoffs():
    a = Lottery((1, 0), (0.5, 0.5))
    b = Lottery((2, 0), (0.5, 0.5))
    m = mix(a, b, 0.5)
    assert m.pairs() == [(1.0, 0.25), (0.0, 0.5), (2.0, 0.25)]
    with pytest.raises(LotteryError):
        mix(a, b, 1.5)


def test_utility_function_kinds():
    assert logarithmic()(0.0) == 0.0
    assert square_root()(-4.0) == -2.0
    t = tabulated({0: 0.0, 1: 2.0})
    assert t(1) == 2.0
    with pytest.raises(ValueError):
        t(5)
    with pytest.raises(ValueError):
        tabulated({0: 1.0, 1: 0.0})
    with pytest.raises(ValueError):
        logarithmic()(-2.0)


payoffs = st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=6)


@st.composite
def lotteries(draw):
    xs = draw(payoffs)
    w = draw(st.lists(st.floats(0.01, 1.0), min_size=len(xs), max_size=len(xs)))
    total = math.fsum(w)
    ps = [x / total for x in w]
    ps[-1] = 1.0 - math.fsum(ps[:-1])
    return Lottery(tuple(xs), tuple(max(p, 0.0) for p in ps))


@given(lotteries(), st.floats(-10, 10, allow_nan=False))
def test_expected_utility_linear_in_u(lot, a):
    assert expected_utility(lot, LINEAR.scaled(a)) == pytest.approx(a * expected_utility(lot), abs=1e-9)


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_certain_lottery_equals_u(x):
    for u in (linear(), square_root()):
        assert expected_utility(Lottery.certain(x), u) == pytest.approx(u(x))


@given(lotteries(), st.randoms(use_true_random=False))
def test_gain_loss_permutation_invariant(lot, rnd):
    pairs = lot.pairs()
    rnd.shuffle(pairs)
    assert gain_loss_number(Lottery.from_pairs(pairs)) == gain_loss_number(lot)
