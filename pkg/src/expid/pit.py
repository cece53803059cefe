"""Randomized identity testing for exponential circuits.

The algebraic test evaluates a circuit at random ``(u, v, a)`` with
``u in F_p^n``, ``v in F_q^n`` and ``a`` in the order-``q`` subgroup; a
circuit that vanishes on its real domain only ever produces 0 or ⊥.  The
real-model test evaluates exactly at random integer points, and the exact
oracle decides zeroness symbolically after condensation.
"""

from __future__ import annotations

import enum
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import _batch
from .circuit import DEFAULT_TERM_CAP, Circuit, difference
from .exppoly import EmptyDomainError, ExpPoly, SignClass, TermBlowup
from .field import FieldParams, SearchExhausted, find_subgroup_element, generate_prime_pair, is_prime, next_prime
from .intpoly import SparsePoly

Bounds = tuple[int, int, int]

# Planned single-trial error, and the largest q tried to reach it.
TARGET_ERROR = 0.5
Q_CAP = 1 << 56

# Pairwise exponent cross-differences are only inspected below this width.
_SEPARATION_MAX_WIDTH = 64


class Decision(enum.Enum):
    ACCEPT_ZERO = "AcceptZero"
    REJECT_NONZERO = "RejectNonZero"
    EMPTY_DOMAIN = "EmptyDomain"
    INCONCLUSIVE = "Inconclusive"


class OracleResult(enum.Enum):
    ZERO = "Zero"
    NONZERO = "NonZero"
    EMPTY_DOMAIN = "EmptyDomain"
    INCONCLUSIVE = "Inconclusive"


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class Witness:
    """A point of the algebraic model where the circuit is defined and nonzero."""

    u: tuple[int, ...]
    v: tuple[int, ...]
    a: int
    value: int

    def to_dict(self) -> dict[str, Any]:
        return {"u": list(self.u), "v": list(self.v), "a": self.a, "value": self.value}


@dataclass(frozen=True)
class RealWitness:
    """An integer point where the real-valued circuit is defined and nonzero."""

    x: tuple[int, ...]

    def to_dict(self) -> dict[str, Any]:
        return {"x": list(self.x)}


@dataclass(frozen=True)
class Verdict:
    decision: Decision
    trials: int
    seed: int
    params: FieldParams | None = None
    witness: Witness | RealWitness | None = None
    reason: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)
    wall_time: float | None = field(default=None, compare=False)

    def to_dict(self, timing: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {"decision": self.decision.value, "trials": self.trials, "seed": self.seed}
        if self.params is not None:
            out["params"] = {"p": self.params.p, "q": self.params.q, "a": self.params.a}
        if self.witness is not None:
            out["witness"] = self.witness.to_dict()
        if self.reason is not None:
            out["reason"] = self.reason
        out.update(self.extra)
        if timing and self.wall_time is not None:
            out["wall_time"] = round(self.wall_time, 6)
        return out

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"


# planning


def single_trial_error(k: int, d: int, q: int) -> float:
    """Planning bound ``8 d k^4 / q + q^(-1/(k^2-1))``; the root term vanishes for ``k = 1``."""
    root = q ** (-1.0 / (k * k - 1)) if k > 1 else 0.0
    return 8 * d * k**4 / q + root


def zero_poly_bound(k: int, d: int, q: int, root_factor: float = 1.0) -> float:
    """``3 d k^2 / q + c * q^(-1/(k-1))`` for a nonzero condensed exponential polynomial."""
    root = q ** (-1.0 / (k - 1)) if k > 1 else 0.0
    return 3 * d * k * k / q + root_factor * root


def repetitions(eps: float, delta: float) -> int:
    """Smallest ``r`` with ``eps^r <= delta``."""
    if not 0 < delta < 1:
        raise PlanError("delta must lie in (0, 1)")
    if not 0 <= eps < 1:
        raise PlanError(f"single-trial error {eps:.4g} is not below 1")
    if eps == 0:
        return 1
    return max(1, math.ceil(math.log(1 / delta) / math.log(1 / eps)))


def min_separating_q(k: int, w: int) -> int:
    """Smallest prime ``q > 2 (k w)^2``."""
    return next_prime(2 * (k * w) ** 2 + 1)


def _min_q_for_error(k: int, d: int, floor: int, target: float) -> int:
    """Smallest integer ``m > floor`` with ``single_trial_error(k, d, m) <= target``, capped at ``Q_CAP``."""
    lo = floor + 1
    if single_trial_error(k, d, lo) <= target:
        return lo
    if single_trial_error(k, d, Q_CAP) > target:
        return max(lo, Q_CAP)
    hi = Q_CAP
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if single_trial_error(k, d, mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def _prime_pair_from(q_min: int) -> tuple[int, int]:
    """Like :func:`generate_prime_pair`, moving on to the next ``q`` if no ``p`` fits below 2^62."""
    q = q_min
    while True:
        try:
            return generate_prime_pair(q)
        except SearchExhausted:
            q = next_prime(q) + 1


@dataclass(frozen=True)
class TestPlan:
    params: FieldParams
    repetitions: int
    seed: int
    bounds: Bounds
    delta: float

    __test__ = False  # not a pytest class

    def __post_init__(self) -> None:
        k, d, w = self.bounds
        if k < 1 or d < 0 or w < 1:
            raise PlanError(f"bounds must satisfy k >= 1, d >= 0, w >= 1, got {self.bounds}")
        if self.params.q <= 2 * (k * w) ** 2:
            raise PlanError(f"q={self.params.q} must exceed 2(kw)^2 = {2 * (k * w) ** 2}")
        if self.repetitions < 1:
            raise PlanError("at least one repetition is required")
        if not 0 <= self.seed < 1 << 64:
            raise PlanError("seed must be a 64-bit unsigned value")
        eps = self.error
        if eps < 1 and self.repetitions < repetitions(eps, self.delta):
            raise PlanError(f"{self.repetitions} repetitions do not reach delta={self.delta}")

    @property
    def error(self) -> float:
        k, d, _ = self.bounds
        return single_trial_error(k, d, self.params.q)


def select_params(
    k: int,
    d: int,
    w: int,
    delta: float,
    seed: int = 0,
    q: int | None = None,
    reps: int | None = None,
    q_floor: int = 0,
) -> TestPlan:
    """Choose ``(p, q, a)`` and a repetition count for the given circuit bounds.

    Without an override, ``q`` is the smallest prime above both ``2 (k w)^2``
    and ``q_floor`` whose single-trial error is at most ``TARGET_ERROR``.
    Wide circuits may never get there, since ``q^(-1/(k^2-1))`` decays very
    slowly; then ``q`` sits near ``Q_CAP`` and more repetitions make up for
    it.  An explicit ``q`` must be prime; if its error is not below 1,
    ``reps`` must be given.
    """
    if k < 1 or d < 0 or w < 1:
        raise PlanError(f"bounds must satisfy k >= 1, d >= 0, w >= 1, got {(k, d, w)}")
    if not 0 < delta < 1:
        raise PlanError("delta must lie in (0, 1)")
    if q is None:
        floor = max(2 * (k * w) ** 2, q_floor)
        p, q = _prime_pair_from(max(3, _min_q_for_error(k, d, floor, TARGET_ERROR)))
    else:
        if not is_prime(q) or q < 3:
            raise PlanError(f"q={q} must be an odd prime")
        p, q = generate_prime_pair(q)
    params = FieldParams(p, q, find_subgroup_element(p, q, seed))
    eps = single_trial_error(k, d, q)
    if reps is None:
        if eps >= 1:
            raise PlanError(f"q={q} gives single-trial error {eps:.4g} >= 1; pass an explicit trial count")
        reps = repetitions(eps, delta)
    return TestPlan(params, reps, seed, (k, d, w), delta)


def separation_floor(*fractions: ExpPoly) -> int:
    """Largest coefficient that must survive reduction mod ``q`` for the test to see the terms.

    Covers the condensed coefficient and exponent polynomials and, for
    moderate widths, the cross-differences ``g_i h_j - g_j h_i`` that keep
    distinct exponent classes distinct.
    """
    best = 0
    for E in fractions:
        try:
            terms = E.condense().terms
        except EmptyDomainError:
            continue
        for t in terms:
            best = max(best, t.f.weight, t.g.weight, t.h.weight)
        if len(terms) <= _SEPARATION_MAX_WIDTH:
            for i, ti in enumerate(terms):
                for tj in terms[i + 1 :]:
                    best = max(best, (ti.g * tj.h - tj.g * ti.h).weight)
    return best


def plan_for_circuit(
    c: Circuit,
    delta: float,
    seed: int = 0,
    term_cap: int = DEFAULT_TERM_CAP,
    bounds: Bounds | None = None,
    q: int | None = None,
    reps: int | None = None,
) -> TestPlan:
    """Plan from the circuit's own fraction form, or from ``bounds`` when given.

    Raises :class:`TermBlowup` if no bounds are given and the conversion
    exceeds ``term_cap``.
    """
    floor = 0
    if bounds is None:
        P, D = c.to_fraction(term_cap)
        k, d, w = max(P.width, D.width), max(P.degree, D.degree), max(P.weight, D.weight)
        bounds = (max(k, 1), d, max(w, 1))
        floor = separation_floor(P, D)
    return select_params(*bounds, delta=delta, seed=seed, q=q, reps=reps, q_floor=floor)


# sampling


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible stream for trial ``index``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def draw_point(rng: np.random.Generator, n: int, params: FieldParams) -> tuple[list[int], list[int], int]:
    u = [int(x) for x in rng.integers(0, params.p, size=n)]
    v = [int(x) for x in rng.integers(0, params.q, size=n)]
    a = params.subgroup_element(int(rng.integers(0, params.q)))
    return u, v, a


def _run_trials(trial, count: int, threads: int) -> tuple[int, Any]:
    """Run ``trial(i)`` for ``i < count``; return ``(executed, result)`` of the lowest hit."""
    if threads <= 1:
        for i in range(count):
            hit = trial(i)
            if hit is not None:
                return i + 1, hit
        return count, None
    chunk = threads * 8
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for start in range(0, count, chunk):
            idx = range(start, min(count, start + chunk))
            for i, hit in zip(idx, pool.map(trial, idx)):
                if hit is not None:
                    return i + 1, hit
    return count, None


# testers


def test_zero(c: Circuit, plan: TestPlan, threads: int = 1) -> Verdict:
    """Reject on the first trial with a defined nonzero value, otherwise accept."""
    start = time.perf_counter()
    params = plan.params
    n = c.num_inputs
    c.order  # validate once before fanning out

    def trial(i: int) -> Witness | None:
        u, v, a = draw_point(trial_rng(plan.seed, i), n, params)
        value = c.eval_finite(u, v, params, a)
        if value:
            return Witness(tuple(u), tuple(v), a, value)
        return None

    executed, witness = _run_trials(trial, plan.repetitions, threads)
    decision = Decision.ACCEPT_ZERO if witness is None else Decision.REJECT_NONZERO
    return Verdict(
        decision,
        executed,
        plan.seed,
        params,
        witness,
        extra={"repetitions": plan.repetitions, "bounds": list(plan.bounds)},
        wall_time=time.perf_counter() - start,
    )


test_zero.__test__ = False  # keep pytest from collecting the public API


def test_equiv(c1: Circuit, c2: Circuit, plan: TestPlan, threads: int = 1) -> Verdict:
    """Test ``c1 - c2`` for zeroness; its domain is the intersection of both domains."""
    return test_zero(difference(c1, c2), plan, threads)


test_equiv.__test__ = False


def check_witness(c: Circuit, witness: Witness, params: FieldParams) -> bool:
    return witness.value != 0 and c.eval_finite(witness.u, witness.v, params, witness.a) == witness.value


def exact_zero_oracle(c: Circuit, term_cap: int = DEFAULT_TERM_CAP) -> OracleResult:
    try:
        P, D = c.to_fraction(term_cap)
    except TermBlowup:
        return OracleResult.INCONCLUSIVE
    if P.has_empty_domain() or D.has_empty_domain():
        return OracleResult.EMPTY_DOMAIN
    if not D.condense().terms:
        return OracleResult.EMPTY_DOMAIN
    if not P.condense().terms:
        return OracleResult.ZERO
    return OracleResult.NONZERO


def real_sample_bound(k: int, d: int) -> int:
    return max(20, 20 * d * k * k)


def _real_setup(c: Circuit, term_cap: int) -> tuple[ExpPoly, ExpPoly, int, int, int]:
    P, D = c.to_fraction(term_cap)
    k, d = max(P.width, D.width), max(P.degree, D.degree)
    return P, D, k, d, real_sample_bound(k, d)


def _real_nonzero(P: ExpPoly, D: ExpPoly, x: Sequence[int]) -> bool:
    return P.rational_sign_class(x) is SignClass.NONZERO and D.rational_sign_class(x) is SignClass.NONZERO


def real_model_test(c: Circuit, trials: int, seed: int = 0, term_cap: int = DEFAULT_TERM_CAP, threads: int = 1) -> Verdict:
    """Exact evaluation at random points of ``{1..B}^n`` with ``B = max(20, 20 d k^2)``."""
    start = time.perf_counter()
    try:
        P, D, k, d, B = _real_setup(c, term_cap)
    except TermBlowup as exc:
        return Verdict(Decision.INCONCLUSIVE, 0, seed, reason=str(exc))
    if P.has_empty_domain() or D.has_empty_domain():
        return Verdict(Decision.EMPTY_DOMAIN, 0, seed, reason="an exponent denominator is identically zero")
    n = c.num_inputs

    def trial(i: int) -> RealWitness | None:
        x = tuple(int(t) for t in trial_rng(seed, i).integers(1, B + 1, size=n))
        return RealWitness(x) if _real_nonzero(P, D, x) else None

    executed, witness = _run_trials(trial, trials, threads)
    decision = Decision.ACCEPT_ZERO if witness is None else Decision.REJECT_NONZERO
    return Verdict(
        decision,
        executed,
        seed,
        witness=witness,
        extra={"sample_bound": B, "bounds": [k, d]},
        wall_time=time.perf_counter() - start,
    )


@dataclass(frozen=True)
class RateReport:
    rate: float
    samples: int
    bound: float

    @property
    def standard_error(self) -> float:
        return math.sqrt(max(self.bound * (1 - self.bound), 0.0) / self.samples)


def measure_real_accept_rate(c: Circuit, samples: int, seed: int = 0, term_cap: int = DEFAULT_TERM_CAP) -> RateReport:
    """Fraction of single real-model trials that see 0 or ⊥, with the bound ``8 d k^2 / B``."""
    P, D, k, d, B = _real_setup(c, term_cap)
    rng = np.random.default_rng(seed)
    pts = rng.integers(1, B + 1, size=(samples, c.num_inputs))
    accepts = sum(not _real_nonzero(P, D, tuple(int(t) for t in row)) for row in pts)
    return RateReport(accepts / samples, samples, 8 * d * k * k / B)


def measure_expoly_zero_rate(P: ExpPoly, params: FieldParams, samples: int, seed: int = 0) -> float:
    """Fraction of uniform ``(u, v, a)`` where ``P`` evaluates to 0 or ⊥ (vectorised)."""
    rng = np.random.default_rng(seed)
    n = P.num_vars
    U = rng.integers(0, params.p, size=(samples, n))
    V = rng.integers(0, params.q, size=(samples, n))
    A = _batch.powmod_varexp(params.a, rng.integers(0, params.q, size=samples), params.p)
    values = P.eval_finite_batch(U, V, A, params)
    return float(np.count_nonzero(values <= 0)) / samples


def measure_poly_zero_rate(f: SparsePoly, upper: int, samples: int, seed: int = 0) -> float:
    """Fraction of uniform points of ``{1..upper}^n`` where ``f`` vanishes."""
    rng = np.random.default_rng(seed)
    pts = rng.integers(1, upper + 1, size=(samples, f.num_vars))
    bound = sum(abs(c) for _, c in f.terms) * upper ** max(f.degree, 1)
    if bound < _batch.BATCH_MODULUS_LIMIT:
        # |f(x)| stays below the modulus, so zero mod m means zero.
        values = f.eval_mod_batch(pts, _batch.BATCH_MODULUS_LIMIT - 1)
        return float(np.count_nonzero(values == 0)) / samples
    return sum(f.eval_int([int(t) for t in row]) == 0 for row in pts) / samples
