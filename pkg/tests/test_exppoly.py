import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import exppolys
from expid.exppoly import EmptyDomainError, ExpPoly, ExpTerm, SignClass, TermBlowup, ep_add, ep_mul
from expid.field import FieldParams
from expid.intpoly import SparsePoly, VarCountMismatch

x = SparsePoly.variable(0, 1)
X, Y = SparsePoly.variable(0, 2), SparsePoly.variable(1, 2)
one1 = SparsePoly.constant(1, 1)
MID = FieldParams.generate(193, seed=0)


def shifted(c: int) -> ExpPoly:
    return ExpPoly.exp(x**2 - c * x, x - c)


def test_add_concatenates():
    P = ExpPoly.exp(x) + ExpPoly.exp(2 * x)
    assert ep_add(P, ExpPoly.empty(1)) == P
    Q = ExpPoly.exp(x) + ExpPoly.exp(x) + ExpPoly.exp(3 * x)
    assert (P + Q).width == 5
    doubled = ExpPoly.exp(x) + ExpPoly.exp(x)
    assert doubled.width == 2 and doubled.condense().width == 1
    with pytest.raises(VarCountMismatch):
        ExpPoly.exp(x) + ExpPoly.exp(X)


def test_mul_examples():
    prod = ep_mul(ExpPoly.exp(X), ExpPoly.exp(Y))
    assert prod.width == 1
    t = prod.terms[0]
    assert (t.f, t.g, t.h) == (SparsePoly.constant(1, 2), X + Y, SparsePoly.constant(1, 2))
    P = ExpPoly.exp(x) + ExpPoly.exp(2 * x, x + 1)
    assert ep_mul(P, ExpPoly.one(1)) == P
    assert ep_mul(P, P).width == 4


def test_mul_term_cap():
    P = ExpPoly([ExpTerm(one1, c * x, one1) for c in range(5)], 1)
    with pytest.raises(TermBlowup):
        ep_mul(P, P, term_cap=24)
    assert ep_mul(P, P, term_cap=25).width == 25


def test_condense_examples():
    pair = shifted(3) + shifted(2)
    dense = pair.condense()
    assert dense.width == 1
    assert dense.terms[0] == ExpTerm(2 * one1, x**2 - 3 * x, x - 3)
    law = ExpPoly([ExpTerm(SparsePoly.constant(c, 2), X + Y, SparsePoly.constant(1, 2)) for c in (1, -1)], 2)
    assert law.condense().width == 0
    distinct = ExpPoly.exp(x) + ExpPoly.exp(2 * x) + ExpPoly.exp(x, x + 1)
    assert distinct.condense() == distinct


def test_condense_empty_domain():
    P = ExpPoly.exp(x) + ExpPoly([ExpTerm(one1, x, SparsePoly.zero(1))], 1)
    assert P.has_empty_domain()
    with pytest.raises(EmptyDomainError):
        P.condense()


def test_eval_finite_examples(tiny):
    assert ExpPoly.exp(x).eval_finite([17], [3], tiny) == 8
    assert ExpPoly.exp(one1, x).eval_finite([0], [0], tiny) is None
    zero = ExpPoly.exp(x) - ExpPoly.exp(x)
    assert all(zero.eval_finite([u], [v], tiny) == 0 for u in range(23) for v in range(11))


def test_sign_class_examples():
    P = ExpPoly.exp(x) - ExpPoly.exp(x**2 - 2 * x, x - 2)
    assert P.rational_sign_class([3]) is SignClass.ZERO
    assert P.rational_sign_class([2]) is SignClass.UNDEFINED
    assert ExpPoly.exp(x).rational_sign_class([1]) is SignClass.NONZERO


def test_metrics_examples():
    assert (shifted(3) + shifted(2)).metrics() == (2, 2, 3)
    assert ExpPoly.empty(2).metrics() == (0, 0, 0)
    assert ExpPoly.exp(x).metrics() == (1, 1, 1)


def test_text_round_trip_example():
    P = shifted(3) + ExpPoly.constant(-4, 1)
    assert P.to_text() == "[1] * EXP( [x1^2 - 3*x1] / [x1 - 3] ) + [-4] * EXP( [0] / [1] )"
    assert ExpPoly.parse(P.to_text(), 1) == P
    assert ExpPoly.parse("0", 1) == ExpPoly.empty(1)


@given(exppolys(2, nonzero_h=False))
def test_text_round_trip(P):
    assert ExpPoly.parse(P.to_text(), 2) == P


@given(exppolys(1), st.lists(st.integers(-6, 6), min_size=1, max_size=5))
def test_condensation_preserves_real_sign(P, xs):
    Q = P.condense()
    for v in xs:
        if all(t.h.eval_int([v]) != 0 for t in P.terms):
            assert P.rational_sign_class([v]) == Q.rational_sign_class([v])


@given(exppolys(2), st.integers(0, 2**32))
def test_condensation_preserves_finite_values(P, seed):
    fp = MID
    Q = P.condense()
    rng = random.Random(seed)
    for _ in range(10):
        u = [rng.randrange(fp.p) for _ in range(2)]
        v = [rng.randrange(fp.q) for _ in range(2)]
        a = fp.subgroup_element(rng.randrange(fp.q))
        left = P.eval_finite(u, v, fp, a)
        if left is not None:
            right = Q.eval_finite(u, v, fp, a)
            assert right is not None and right == left


@given(exppolys(1))
def test_empty_condensation_means_zero_everywhere(P):
    if P.condense().width == 0:
        for v in range(-15, 16):
            assert P.rational_sign_class([v]) in (SignClass.ZERO, SignClass.UNDEFINED)


@given(exppolys(2, max_width=3), st.integers(0, 2**32))
def test_nonempty_condensation_has_nonzero_witness(P, seed):
    Q = P.condense()
    if Q.width == 0:
        return
    k, d, _ = P.metrics()
    B = max(20, 20 * d * k * k)
    rng = random.Random(seed)
    assert any(
        P.rational_sign_class([rng.randint(1, B), rng.randint(1, B)]) is SignClass.NONZERO for _ in range(100)
    )


@given(exppolys(2), exppolys(2), st.integers(0, 2**32))
def test_mul_commutes_with_finite_eval(P, Q, seed):
    fp = MID
    rng = random.Random(seed)
    PQ = ep_mul(P, Q)
    for _ in range(5):
        u = [rng.randrange(fp.p) for _ in range(2)]
        v = [rng.randrange(fp.q) for _ in range(2)]
        a = fp.subgroup_element(rng.randrange(fp.q))
        lp, lq = P.eval_finite(u, v, fp, a), Q.eval_finite(u, v, fp, a)
        if lp is not None and lq is not None:
            assert PQ.eval_finite(u, v, fp, a) == lp * lq % fp.p


@given(exppolys(2), exppolys(2))
def test_product_metrics(P, Q):
    k, d, w = P.metrics()
    k2, d2, w2 = Q.metrics()
    kk, dd, ww = ep_mul(P, Q).metrics()
    monos = max([len(t.f.terms) for E in (P, Q) for t in E.terms] + [len(p.terms) for E in (P, Q) for t in E.terms for p in (t.g, t.h)] + [1])
    if P.is_one() or Q.is_one():
        return
    assert kk == k * k2
    assert dd <= d + d2
    assert ww <= 2 * monos * w * w2


def test_batch_eval_matches_scalar(tiny):
    P = shifted(3) + ExpPoly.exp(x, x + 1, f=x - 4)
    U = np.arange(23).repeat(11)[:, None]
    V = np.tile(np.arange(11), 23)[:, None]
    A = np.array([tiny.subgroup_element(j) for j in range(253)]) % 23
    batch = P.eval_finite_batch(U, V, A, tiny)
    for i in range(len(U)):
        s = P.eval_finite([int(U[i, 0])], [int(V[i, 0])], tiny, int(A[i]))
        assert batch[i] == (-1 if s is None else s)
