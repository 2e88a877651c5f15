import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from affectdt.attraction import AttractivenessRanking
from affectdt.decision import (
    Bundle,
    Cmp,
    Package,
    ProblemError,
    assemble,
    evaluate_bundle,
    preference_relation,
    stochastic_optimum,
)
from affectdt.paradox import ellsberg_curves
from affectdt.utility import utility_factor


def test_assemble_examples():
    assert list(assemble([0.5, 0.5], [0.25, -0.25]).p) == [0.75, 0.25]
    p = assemble([0.418, 0.582], [0.25, -0.25]).p
    assert p == pytest.approx([0.67, 0.33], abs=5e-3)
    f = [0.2, 0.3, 0.5]
    prob = assemble(f, [0, 0, 0])
    assert list(prob.p) == f and not prob.clamp_flag


def test_assemble_errors():
    with pytest.raises(ProblemError):
        assemble([0.5, 0.5], [0.1, -0.1, 0.0])
    with pytest.raises(ProblemError):
        assemble([0.6, 0.6], [0, 0])
    with pytest.raises(ProblemError):
        assemble([0.5, 0.5], [0.2, 0.1])


def test_clamp_renormalizes_and_flags():
    prob = assemble([0.9, 0.1], [0.2, -0.2])
    assert prob.clamp_flag
    assert prob.p.sum() == pytest.approx(1.0)
    retract_only = assemble([0.25, 0.25, 0.25, 0.25], [0.375, 0.125, -0.375, -0.125], renormalize=False)
    assert retract_only.p[1] == 0.375 and retract_only.p[2] == 0.0


def test_stochastic_optimum():
    assert stochastic_optimum(assemble([0.5, 0.5], [-0.25, 0.25])).index == 1
    tie = stochastic_optimum(assemble([0.5, 0.5], [0, 0]))
    assert tie.index == 0 and tie.tied and tie.ties == (0, 1)
    assert stochastic_optimum(assemble([0.418, 0.582], [0.25, -0.25])).index == 0


def test_preference_examples():
    allais = assemble(utility_factor([1, 1.39]), [0.25, -0.25])
    rel = preference_relation(allais, 0, 1)
    assert rel.preferred and not rel.more_useful and rel.more_attractive
    assert preference_relation(allais, 1, 0).more_useful
    same = preference_relation(assemble([0.5, 0.5], [0, 0]), 0, 1)
    assert same.indifferent and same.equally_useful and same.equally_attractive
    with pytest.raises(IndexError):
        preference_relation(allais, 0, 2)


def test_ellsberg_half_urn():
    pt = ellsberg_curves([0.5])[0]
    assert pt.closed_form[:2] == pytest.approx((0.75, 0.25))
    prob = assemble(utility_factor([0.5, 0.5]), [0.25, -0.25])
    rel = preference_relation(prob, 0, 1)
    assert rel.preferred and rel.equally_useful and rel.more_attractive


def test_ellsberg_edge_clamps():
    pt = ellsberg_curves([0.0])[0]
    assert pt.closed_form[1] == pytest.approx(-0.25)
    assert pt.assembled[1] == 0.0 and pt.clamp_flags[0]


def test_ellsberg_differences_positive():
    for pt in ellsberg_curves(np.linspace(0, 1, 41)):
        assert pt.diff12 > 0 and pt.diff34 > 0
        assert pt.closed_form[0] - pt.closed_form[1] == pytest.approx(pt.diff12)
        assert pt.closed_form[2] - pt.closed_form[3] == pytest.approx(pt.diff34)


def _pkg(u, p, label=""):
    return Package(tuple(u), assemble(p, [0.0] * len(p)), label)


def test_bundle_examples():
    single = evaluate_bundle(Bundle((_pkg([2, 1], [0.75, 0.25]),)))
    assert list(single.p) == [1.0] and stochastic_optimum(single).index == 0
    twins = evaluate_bundle(Bundle((_pkg([2, 1], [0.6, 0.4]), _pkg([2, 1], [0.6, 0.4]))))
    assert list(twins.f) == pytest.approx([0.5, 0.5])
    a = Package((2.0, 1.0), assemble([0.5, 0.5], [0.25, -0.25]))
    b = Package((1.0, 1.0), assemble([0.5, 0.5], [0.0, 0.0]))
    assert (a.utility, b.utility) == (1.75, 1.0)
    prob = evaluate_bundle(Bundle((a, b)), 0.0)
    assert prob.f == pytest.approx([1.75 / 2.75, 1 / 2.75])
    assert prob.f == pytest.approx([0.636, 0.364], abs=5e-4)
    ranked = evaluate_bundle(Bundle((a, b)), 0.0, AttractivenessRanking.strict([1, 0]))
    assert ranked.q == pytest.approx([-0.25, 0.25])
    with pytest.raises(ProblemError):
        evaluate_bundle(Bundle(()))


@st.composite
def problems(draw, n=None):
    n = n or draw(st.integers(2, 6))
    w = draw(st.lists(st.floats(0.05, 1), min_size=n, max_size=n))
    f = np.array(w) / sum(w)
    raw = np.array(draw(st.lists(st.floats(-1, 1), min_size=n, max_size=n)))
    q = raw - raw.mean()
    scale = draw(st.floats(0, 1))
    lim = min(np.min(f / np.maximum(-q, 1e-300)), np.min((1 - f) / np.maximum(q, 1e-300)), 1.0)
    return f, q * scale * lim


@given(problems())
def test_identity_when_q_zero(fq):
    f, _ = fq
    prob = assemble(f, np.zeros_like(f))
    assert np.array_equal(prob.p, f)


@given(problems())
def test_unclamped_invariants(fq):
    f, q = fq
    prob = assemble(f, q)
    assume(not prob.clamp_flag)
    assert prob.p.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(prob.p, f + q)
    assert np.all(-prob.f - 1e-12 <= prob.q) and np.all(prob.q <= 1 - prob.f + 1e-12)


@given(problems(), st.data())
def test_preference_criterion(fq, data):
    f, q = fq
    prob = assemble(f, q)
    assume(not prob.clamp_flag)
    i, j = data.draw(st.integers(0, len(f) - 1)), data.draw(st.integers(0, len(f) - 1))
    gap = (f[i] - f[j]) - (q[j] - q[i])
    assume(abs(gap) > 1e-9)
    assert preference_relation(prob, i, j).preferred == (gap > 0)


@given(problems(), st.data())
def test_preference_asymmetric_total(fq, data):
    f, q = fq
    prob = assemble(f, q)
    i, j = data.draw(st.integers(0, len(f) - 1)), data.draw(st.integers(0, len(f) - 1))
    a, b = preference_relation(prob, i, j), preference_relation(prob, j, i)
    assert a.by_p == Cmp(-b.by_p)
    if abs(prob.p[i] - prob.p[j]) > 1e-12:
        assert a.preferred != b.preferred


@given(st.lists(st.floats(0.05, 1), min_size=3, max_size=6), st.floats(0.3, 0.9))
def test_renormalization_keeps_order(w, push):
    f = np.array(w) / sum(w)
    q = np.zeros_like(f)
    q[0] = push
    q[1:] = -push / (len(f) - 1)
    prob = assemble(f, q)
    free = [k for k in range(1, len(f)) if 0 < f[k] + q[k] < 1]
    for a in free:
        for b in free:
            if f[a] + q[a] < f[b] + q[b] - 1e-12:
                assert prob.p[a] < prob.p[b]
