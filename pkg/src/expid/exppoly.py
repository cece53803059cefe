"""Exponential polynomials ``sum_i f_i * exp(g_i / h_i)`` over integer polynomials.

An :class:`ExpPoly` is a formal expression: addition concatenates term lists
and multiplication forms all pairwise products, and nothing is merged
unless :meth:`ExpPoly.condense` is called.  Exponent fractions are never
reduced, so ``exp(x)`` and ``exp((x^2 - 2x)/(x - 2))`` stay distinct terms
until condensation proves ``g_i h_j - g_j h_i = 0``.
"""

from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _batch
from .field import FieldParams
from .intpoly import ArityMismatch, SparsePoly, VarCountMismatch

# Fingerprint modulus for bucketing exponent fractions before exact checks.
_FP_PRIME = (1 << 61) - 1


class EmptyDomainError(ValueError):
    """Some exponent denominator is the zero polynomial, so the domain is empty."""


class TermBlowup(RuntimeError):
    """An intermediate exponential polynomial exceeded the configured term cap."""


class SignClass(enum.Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    UNDEFINED = "undefined"


@dataclass(frozen=True)
class ExpTerm:
    f: SparsePoly
    g: SparsePoly
    h: SparsePoly

    def __post_init__(self) -> None:
        if not (self.f.num_vars == self.g.num_vars == self.h.num_vars):
            raise VarCountMismatch("f, g and h must share num_vars")

    @property
    def num_vars(self) -> int:
        return self.f.num_vars

    def is_unit(self) -> bool:
        """True for the literal term ``1 * exp(0/1)``."""
        return self.g.is_zero() and self.f == 1 and self.h == 1


class ExpPoly:
    __slots__ = ("num_vars", "terms")

    def __init__(self, terms: Iterable[ExpTerm], num_vars: int):
        self.terms: tuple[ExpTerm, ...] = tuple(terms)
        self.num_vars = num_vars
        for t in self.terms:
            if t.num_vars != num_vars:
                raise VarCountMismatch(f"term has {t.num_vars} variables, expected {num_vars}")

    # constructors

    @classmethod
    def empty(cls, num_vars: int) -> ExpPoly:
        return cls((), num_vars)

    @classmethod
    def from_poly(cls, f: SparsePoly) -> ExpPoly:
        n = f.num_vars
        return cls([ExpTerm(f, SparsePoly.zero(n), SparsePoly.constant(1, n))], n)

    @classmethod
    def constant(cls, c: int, num_vars: int) -> ExpPoly:
        return cls.from_poly(SparsePoly.constant(c, num_vars))

    @classmethod
    def one(cls, num_vars: int) -> ExpPoly:
        return cls.constant(1, num_vars)

    @classmethod
    def exp(cls, g: SparsePoly, h: SparsePoly | None = None, f: SparsePoly | None = None) -> ExpPoly:
        """The single term ``f * exp(g/h)`` (``f`` and ``h`` default to 1)."""
        n = g.num_vars
        h = SparsePoly.constant(1, n) if h is None else h
        f = SparsePoly.constant(1, n) if f is None else f
        return cls([ExpTerm(f, g, h)], n)

    # structure

    @property
    def width(self) -> int:
        return len(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def degree(self) -> int:
        return max((max(t.f.degree, t.g.degree, t.h.degree) for t in self.terms), default=0)

    @property
    def weight(self) -> int:
        return max((max(t.f.weight, t.g.weight, t.h.weight) for t in self.terms), default=0)

    def metrics(self) -> tuple[int, int, int]:
        """``(width k, degree d, weight w)``; ``(0, 0, 0)`` for the empty sum."""
        return self.width, self.degree, self.weight

    def is_one(self) -> bool:
        return len(self.terms) == 1 and self.terms[0].is_unit()

    def has_empty_domain(self) -> bool:
        return any(t.h.is_zero() for t in self.terms)

    def is_exp_free(self) -> bool:
        return all(t.g.is_zero() and t.h.is_constant() and not t.h.is_zero() for t in self.terms)

    def as_poly(self) -> SparsePoly:
        """Collapse an exponential-free sum (every term ``f * exp(0/c)``) to ``sum f``."""
        if not self.is_exp_free():
            raise ValueError("exponential polynomial still contains exp terms")
        total = SparsePoly.zero(self.num_vars)
        for t in self.terms:
            total = total + t.f
        return total

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.num_vars, self.terms))

    # arithmetic

    def __add__(self, other: ExpPoly) -> ExpPoly:
        if not isinstance(other, ExpPoly):
            return NotImplemented
        if other.num_vars != self.num_vars:
            raise VarCountMismatch(f"{self.num_vars} vs {other.num_vars} variables")
        return ExpPoly(self.terms + other.terms, self.num_vars)

    def __mul__(self, other: ExpPoly) -> ExpPoly:
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return ep_mul(self, other)

    def __neg__(self) -> ExpPoly:
        return ExpPoly((ExpTerm(-t.f, t.g, t.h) for t in self.terms), self.num_vars)

    def __sub__(self, other: ExpPoly) -> ExpPoly:
        return self + (-other)

    # condensation

    def condense(self) -> ExpPoly:
        """Merge terms with identical exponent fractions and drop zero classes.

        Classes are formed by the exact test ``g_i h_j - g_j h_i == 0``; each
        class keeps the fraction of its lowest-index member.  Terms are first
        bucketed by a modular fingerprint of ``g/h`` so that only fractions
        that can possibly coincide are compared exactly.
        """
        if self.has_empty_domain():
            raise EmptyDomainError("an exponent denominator is the zero polynomial")
        buckets: dict[object, list[int]] = {}
        for i, key in enumerate(self._fingerprints()):
            buckets.setdefault(key, []).append(i)

        owner: dict[int, int] = {}  # term index -> representative index
        for members in buckets.values():
            reps: list[int] = []
            for i in members:
                ti = self.terms[i]
                for r in reps:
                    tr = self.terms[r]
                    if (tr.g * ti.h - ti.g * tr.h).is_zero():
                        owner[i] = r
                        break
                else:
                    reps.append(i)
                    owner[i] = i

        sums: dict[int, SparsePoly] = {}
        for i, t in enumerate(self.terms):
            r = owner[i]
            sums[r] = sums[r] + t.f if r in sums else t.f
        kept = [
            ExpTerm(sums[r], self.terms[r].g, self.terms[r].h)
            for r in sorted(sums)
            if not sums[r].is_zero()
        ]
        return ExpPoly(kept, self.num_vars)

    def _fingerprints(self) -> list[object]:
        if len(self.terms) < 2:
            return [0] * len(self.terms)
        rng = random.Random(0x5EED)
        for _ in range(8):
            pts = [[rng.randrange(1, _FP_PRIME) for _ in range(self.num_vars)] for _ in range(2)]
            keys = []
            for t in self.terms:
                key = []
                for pt in pts:
                    hv = t.h.eval_mod(pt, _FP_PRIME)
                    if hv == 0:
                        break
                    key.append(t.g.eval_mod(pt, _FP_PRIME) * pow(hv, -1, _FP_PRIME) % _FP_PRIME)
                else:
                    keys.append(tuple(key))
                    continue
                break
            else:
                return keys
        # Unlucky points every time: fall back to one bucket (still exact, just slower).
        return [0] * len(self.terms)

    # evaluation

    def _check_point(self, point: Sequence) -> None:
        if len(point) != self.num_vars:
            raise ArityMismatch(f"expected {self.num_vars} coordinates, got {len(point)}")

    def eval_finite(self, u: Sequence[int], v: Sequence[int], params: FieldParams, a: int | None = None) -> int | None:
        """``sum f_i(u) * a^(g_i(v) / h_i(v) mod q) mod p``, or ``None`` when some ``h_i(v) = 0 mod q``.

        ``a`` defaults to ``params.a``; pass any element of the order-``q``
        subgroup to evaluate at a different base.
        """
        self._check_point(u)
        self._check_point(v)
        p, q = params.p, params.q
        base = int(params.a if a is None else a)
        u, v = [int(x) for x in u], [int(x) for x in v]
        exponents = []
        for t in self.terms:
            hv = t.h.eval_mod(v, q)
            if hv == 0:
                return None
            exponents.append(t.g.eval_mod(v, q) * pow(hv, -1, q) % q)
        total = 0
        for t, alpha in zip(self.terms, exponents):
            total += t.f.eval_mod(u, p) * pow(base, alpha, p)
        return total % p

    def eval_finite_batch(self, U: np.ndarray, V: np.ndarray, A: np.ndarray | int, params: FieldParams) -> np.ndarray:
        """Vectorised :meth:`eval_finite` over rows of ``U`` and ``V``; ``-1`` marks undefined."""
        p, q = params.p, params.q
        if not _batch.supports(p, q):
            raise ValueError("batch evaluation needs p < 2^31")
        U = np.asarray(U, dtype=np.int64)
        V = np.asarray(V, dtype=np.int64)
        n_rows = U.shape[0]
        total = np.zeros(n_rows, dtype=np.int64)
        defined = np.ones(n_rows, dtype=bool)
        for t in self.terms:
            hv = t.h.eval_mod_batch(V, q)
            defined &= hv != 0
            alpha = t.g.eval_mod_batch(V, q) * _batch.inverse(hv, q) % q
            total = (total + t.f.eval_mod_batch(U, p) * _batch.powmod_varexp(A, alpha, p)) % p
        return np.where(defined, total, -1)

    def rational_sign_class(self, x: Sequence[int]) -> SignClass:
        """Exact zero/nonzero/undefined status of the real value at an integer point.

        Terms are grouped by equal rational exponents and their coefficients
        summed; since ``e^r`` for distinct rationals ``r`` are linearly
        independent over the algebraic numbers, the real value is zero
        exactly when every group sum vanishes.
        """
        self._check_point(x)
        groups: dict[Fraction, int] = {}
        for t in self.terms:
            hv = t.h.eval_int(x)
            if hv == 0:
                return SignClass.UNDEFINED
            alpha = Fraction(t.g.eval_int(x), hv)
            groups[alpha] = groups.get(alpha, 0) + t.f.eval_int(x)
        if any(groups.values()):
            return SignClass.NONZERO
        return SignClass.ZERO

    # text form

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"ExpPoly({self.to_text()!r}, num_vars={self.num_vars})"

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"[{t.f}] * EXP( [{t.g}] / [{t.h}] )" for t in self.terms)

    @classmethod
    def parse(cls, text: str, num_vars: int) -> ExpPoly:
        s = text.strip()
        if s == "0":
            return cls.empty(num_vars)
        term_re = re.compile(r"\s*\[([^\]]*)\]\s*\*\s*EXP\(\s*\[([^\]]*)\]\s*/\s*\[([^\]]*)\]\s*\)\s*")
        terms = []
        pos = 0
        while True:
            m = term_re.match(s, pos)
            if not m:
                raise ValueError(f"cannot parse exponential polynomial near {s[pos:]!r}")
            f, g, h = (SparsePoly.parse(part, num_vars) for part in m.groups())
            terms.append(ExpTerm(f, g, h))
            pos = m.end()
            if pos == len(s):
                break
            if s[pos] != "+":
                raise ValueError(f"expected '+' between terms near {s[pos:]!r}")
            pos += 1
        return cls(terms, num_vars)


def ep_mul(P: ExpPoly, Q: ExpPoly, term_cap: int | None = None) -> ExpPoly:
    """Product with ``f = f_i f'_j``, ``g = g_i h'_j + g'_j h_i``, ``h = h_i h'_j``.

    Multiplying by the literal constant ``1 * exp(0/1)`` returns the other
    operand unchanged, which is exactly what the termwise formula produces.
    """
    if P.num_vars != Q.num_vars:
        raise VarCountMismatch(f"{P.num_vars} vs {Q.num_vars} variables")
    if P.is_one():
        return Q
    if Q.is_one():
        return P
    if term_cap is not None and P.width * Q.width > term_cap:
        raise TermBlowup(f"product of widths {P.width}*{Q.width} exceeds term cap {term_cap}")
    terms = []
    for s in P.terms:
        for t in Q.terms:
            terms.append(ExpTerm(s.f * t.f, s.g * t.h + t.g * s.h, s.h * t.h))
    return ExpPoly(terms, P.num_vars)


def ep_add(P: ExpPoly, Q: ExpPoly) -> ExpPoly:
    return P + Q
