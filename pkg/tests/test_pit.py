import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expid import pit
from expid.circuit import Circuit, CircuitBuilder, Gate
from expid.corpus import NONZERO_CORPUS, ZERO_CORPUS, exp_product_law, exp_x, random_circuit, softmax_sum_minus_one
from expid.exppoly import ExpPoly
from expid.field import FieldParams, is_prime
from expid.intpoly import SparsePoly
from expid.pit import Decision, OracleResult


def exp_of(scale: int) -> Circuit:
    b = CircuitBuilder(1)
    x = b.input(0)
    return b.build(b.exp(b.mul(b.const(scale), x) if scale != 1 else x))


def test_repetition_examples():
    assert pit.repetitions(0.9, 0.01) == 44
    assert pit.repetitions(0.5, 0.5) == 1
    with pytest.raises(pit.PlanError):
        pit.repetitions(1.0, 0.1)


def test_minimum_separating_pair():
    q = pit.min_separating_q(2, 1)
    assert q == 11
    from expid.field import generate_prime_pair

    assert tuple(generate_prime_pair(q)) == (23, 11)


@pytest.mark.parametrize("k,d,w", [(1, 1, 1), (2, 1, 1), (3, 2, 5), (6, 3, 2), (54, 1, 3)])
def test_select_params_invariants(k, d, w):
    plan = pit.select_params(k, d, w, delta=1e-3, seed=9)
    fp = plan.params
    assert is_prime(fp.p) and is_prime(fp.q) and (fp.p - 1) % fp.q == 0
    assert fp.q > 2 * (k * w) ** 2
    assert plan.error < 1
    assert plan.repetitions == math.ceil(math.log(1e3) / math.log(1 / plan.error))
    # the error target is met as early as possible: one step below it is missed
    floor = 2 * (k * w) ** 2
    m = pit._min_q_for_error(k, d, floor, pit.TARGET_ERROR)
    assert fp.q >= m
    if m < pit.Q_CAP and m > floor + 1:
        assert pit.single_trial_error(k, d, m - 1) > pit.TARGET_ERROR >= pit.single_trial_error(k, d, m)


def test_select_params_explicit_q():
    plan = pit.select_params(2, 1, 1, delta=0.01, q=11, reps=7)
    assert (plan.params.p, plan.params.q, plan.repetitions) == (23, 11, 7)
    with pytest.raises(pit.PlanError):
        pit.select_params(2, 1, 1, delta=0.01, q=11)
    with pytest.raises(pit.PlanError):
        pit.select_params(2, 1, 1, delta=0.01, q=7, reps=3)  # 7 <= 2(kw)^2
    with pytest.raises(pit.PlanError):
        pit.select_params(2, 1, 1, delta=0.01, q=15, reps=3)


def test_plan_rejects_too_few_repetitions():
    plan = pit.select_params(2, 1, 1, delta=1e-3)
    with pytest.raises(pit.PlanError):
        pit.TestPlan(plan.params, plan.repetitions - 1, 0, plan.bounds, plan.delta)


def test_zero_corpus_always_accepted():
    for name, make in ZERO_CORPUS.items():
        c = make()
        assert pit.exact_zero_oracle(c) is OracleResult.ZERO, name
        for seed in range(5):
            plan = pit.plan_for_circuit(c, 1e-3, seed=seed)
            assert pit.test_zero(c, plan).decision is Decision.ACCEPT_ZERO, name


def test_nonzero_corpus_rejected_with_valid_witness():
    for name, make in NONZERO_CORPUS.items():
        c = make()
        assert pit.exact_zero_oracle(c) is OracleResult.NONZERO, name
        plan = pit.plan_for_circuit(c, 1e-6, seed=3)
        v = pit.test_zero(c, plan)
        assert v.decision is Decision.REJECT_NONZERO, name
        assert pit.check_witness(c, v.witness, plan.params)
        assert v.trials <= plan.repetitions


def test_equiv_examples():
    c = softmax_sum_minus_one()
    plan = pit.plan_for_circuit(c, 1e-3, seed=1)
    assert pit.test_equiv(c, c, plan).decision is Decision.ACCEPT_ZERO
    b = CircuitBuilder(2)
    left = b.build(b.mul(b.exp(b.input(0)), b.exp(b.input(1))))
    b = CircuitBuilder(2)
    right = b.build(b.exp(b.add(b.input(0), b.input(1))))
    plan = pit.plan_for_circuit(exp_product_law(), 1e-3, seed=2)
    assert pit.test_equiv(left, right, plan).decision is Decision.ACCEPT_ZERO
    from expid.circuit import difference

    diff = difference(exp_of(1), exp_of(2))
    assert pit.exact_zero_oracle(diff) is OracleResult.NONZERO
    plan = pit.plan_for_circuit(diff, 1e-6, seed=3)
    assert pit.test_equiv(exp_of(1), exp_of(2), plan).decision is Decision.REJECT_NONZERO


def test_oracle_examples():
    assert pit.exact_zero_oracle(exp_product_law()) is OracleResult.ZERO
    b = CircuitBuilder(1)
    x = b.input(0)
    empty = b.build(b.exp(b.div(x, b.mul(b.const(0), x))))
    assert pit.exact_zero_oracle(empty) is OracleResult.EMPTY_DOMAIN
    b = CircuitBuilder(1)
    c = b.build(b.add(b.exp(b.input(0)), b.const(1)))
    assert pit.exact_zero_oracle(c) is OracleResult.NONZERO
    P, _ = c.to_fraction()
    from expid.exppoly import SignClass

    assert P.rational_sign_class([1]) is SignClass.NONZERO


def test_oracle_vacuous_denominator():
    b = CircuitBuilder(1)
    e = b.exp(b.input(0))
    c = b.build(b.div(b.const(1), b.sub(e, e)))
    assert pit.exact_zero_oracle(c) is OracleResult.EMPTY_DOMAIN


def test_oracle_inconclusive_on_blowup():
    b = CircuitBuilder(2)
    s = b.add(b.exp(b.input(0)), b.exp(b.input(1)), b.const(1))
    c = b.build(b.mul(s, s, s, s, s))
    assert pit.exact_zero_oracle(c, term_cap=100) is OracleResult.INCONCLUSIVE


def test_real_model_examples():
    for make in ZERO_CORPUS.values():
        assert pit.real_model_test(make(), 50, seed=4).decision is Decision.ACCEPT_ZERO
    v = pit.real_model_test(exp_x(), 50, seed=4)
    assert v.decision is Decision.REJECT_NONZERO and v.trials == 1
    b = CircuitBuilder(1)
    x = b.input(0)
    empty = b.build(b.exp(b.div(x, b.mul(b.const(0), x))))
    assert pit.real_model_test(empty, 5).decision is Decision.EMPTY_DOMAIN


def test_threads_do_not_change_the_verdict():
    c = softmax_sum_minus_one()
    plan = pit.plan_for_circuit(c, 1e-3, seed=5)
    assert pit.test_zero(c, plan, threads=1) == pit.test_zero(c, plan, threads=3)
    # a circuit that is zero on most but not all trials: first rejection index must match
    b = CircuitBuilder(1)
    x = b.input(0)
    sparse = b.build(b.mul(b.exp(x), b.sub(x, b.const(0)), b.sub(x, b.const(1))))
    plan = pit.select_params(1, 3, 1, delta=0.5, q=3, reps=40)
    assert pit.test_zero(sparse, plan, threads=1) == pit.test_zero(sparse, plan, threads=4)


def test_verdict_json_is_deterministic():
    c = exp_x()
    plan = pit.plan_for_circuit(c, 1e-3, seed=77)
    a, b = pit.test_zero(c, plan), pit.test_zero(c, plan)
    assert a.to_json() == b.to_json()
    assert "wall_time" not in a.to_json() and "wall_time" in a.to_json(timing=True)


@settings(max_examples=30)
@given(st.integers(0, 2**32), st.integers(0, 2**64 - 1))
def test_reproducibility_and_witnesses(circuit_seed, seed):
    c = random_circuit(random.Random(circuit_seed))
    try:
        plan = pit.plan_for_circuit(c, 1e-2, seed=seed)
    except pit.TermBlowup:
        return
    first, second = pit.test_zero(c, plan), pit.test_zero(c, plan)
    assert first == second
    if first.decision is Decision.REJECT_NONZERO:
        assert pit.check_witness(c, first.witness, plan.params)


def test_zero_rate_at_exppoly_level():
    x = SparsePoly.variable(0, 1)
    P = ExpPoly.exp(x) + ExpPoly.exp(x, f=x + 1) + ExpPoly.exp(2 * x, x + 2)
    Q = P.condense()
    k, d, _ = Q.metrics()
    fp = FieldParams.generate(1009, seed=1)
    rate = pit.measure_expoly_zero_rate(Q, fp, 20_000, seed=2)
    bound = pit.zero_poly_bound(k, d, fp.q, root_factor=2)
    assert rate <= bound + 3 * math.sqrt(bound * (1 - bound) / 20_000)


def test_gate_order_does_not_affect_results():
    c = exp_product_law()
    shuffled = Circuit(dict(reversed(list(c.gates.items()))), c.output, c.num_inputs)
    assert shuffled.to_fraction() == c.to_fraction()
    assert isinstance(shuffled.gates[c.output], Gate)
