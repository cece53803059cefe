"""Exact sparse multivariate polynomials with unbounded integer coefficients.

Monomials are stored as dense exponent tuples of length ``num_vars``; the
canonical term order is graded-lexicographic (highest total degree first,
ties broken lexicographically on the exponent tuple, descending).  Variables
print as ``x1 .. xn``.
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _batch

Monomial = tuple[int, ...]


class VarCountMismatch(ValueError):
    pass


class ArityMismatch(ValueError):
    pass


class PolyParseError(ValueError):
    pass


def _grlex_key(mono: Monomial) -> tuple[int, Monomial]:
    return (sum(mono), mono)


class SparsePoly:
    __slots__ = ("num_vars", "_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, int] | Iterable[tuple[Monomial, int]], num_vars: int):
        if num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, int] = {}
        for mono, c in items:
            mono = tuple(int(e) for e in mono)
            if len(mono) != num_vars or any(e < 0 for e in mono):
                raise ValueError(f"bad monomial {mono!r} for {num_vars} variables")
            acc[mono] = acc.get(mono, 0) + int(c)
        ordered = sorted(((m, c) for m, c in acc.items() if c), key=lambda t: _grlex_key(t[0]), reverse=True)
        self.num_vars = num_vars
        self._terms: tuple[tuple[Monomial, int], ...] = tuple(ordered)
        self._hash: int | None = None

    # construction helpers

    @classmethod
    def zero(cls, num_vars: int) -> SparsePoly:
        return cls({}, num_vars)

    @classmethod
    def constant(cls, c: int, num_vars: int) -> SparsePoly:
        return cls({(0,) * num_vars: c}, num_vars)

    @classmethod
    def variable(cls, index: int, num_vars: int) -> SparsePoly:
        """The variable ``x_{index+1}`` (``index`` is 0-based)."""
        if not 0 <= index < num_vars:
            raise ValueError(f"variable index {index} out of range for {num_vars} variables")
        mono = tuple(1 if i == index else 0 for i in range(num_vars))
        return cls({mono: 1}, num_vars)

    # structure

    @property
    def terms(self) -> tuple[tuple[Monomial, int], ...]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(m) for m, _ in self._terms)

    def constant_value(self) -> int:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self._terms[0][1] if self._terms else 0

    @property
    def degree(self) -> int:
        return max((sum(m) for m, _ in self._terms), default=0)

    @property
    def weight(self) -> int:
        return max((abs(c) for _, c in self._terms), default=0)

    def metrics(self) -> tuple[int, int]:
        """``(total degree, max |coefficient|)``; both are 0 for the zero polynomial."""
        return self.degree, self.weight

    # arithmetic

    def _check(self, other: SparsePoly) -> None:
        if self.num_vars != other.num_vars:
            raise VarCountMismatch(f"{self.num_vars} vs {other.num_vars} variables")

    def _coerce(self, other: SparsePoly | int) -> SparsePoly:
        if isinstance(other, int):
            return SparsePoly.constant(other, self.num_vars)
        if isinstance(other, SparsePoly):
            self._check(other)
            return other
        return NotImplemented

    def __add__(self, other: SparsePoly | int) -> SparsePoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._terms)
        for m, c in other._terms:
            acc[m] = acc.get(m, 0) + c
        return SparsePoly(acc, self.num_vars)

    __radd__ = __add__

    def __neg__(self) -> SparsePoly:
        return SparsePoly({m: -c for m, c in self._terms}, self.num_vars)

    def __sub__(self, other: SparsePoly | int) -> SparsePoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other: int) -> SparsePoly:
        return (-self) + other

    def __mul__(self, other: SparsePoly | int) -> SparsePoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict[Monomial, int] = {}
        for m1, c1 in self._terms:
            for m2, c2 in other._terms:
                m = tuple(a + b for a, b in zip(m1, m2))
                acc[m] = acc.get(m, 0) + c1 * c2
        return SparsePoly(acc, self.num_vars)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> SparsePoly:
        if e < 0:
            raise ValueError("negative power")
        result = SparsePoly.constant(1, self.num_vars)
        for _ in range(e):
            result = result * self
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = SparsePoly.constant(other, self.num_vars)
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.num_vars == other.num_vars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num_vars, self._terms))
        return self._hash

    # evaluation

    def _check_point(self, point: Sequence) -> None:
        if len(point) != self.num_vars:
            raise ArityMismatch(f"expected {self.num_vars} coordinates, got {len(point)}")

    def eval_int(self, point: Sequence[int]) -> int:
        self._check_point(point)
        total = 0
        for mono, c in self._terms:
            t = c
            for x, e in zip(point, mono):
                if e:
                    t *= x**e
            total += t
        return total

    def eval_mod(self, point: Sequence[int], m: int) -> int:
        self._check_point(point)
        total = 0
        for mono, c in self._terms:
            t = c % m
            for x, e in zip(point, mono):
                if e:
                    t = t * pow(x, e, m) % m
            total += t
        return total % m

    def eval_mod_batch(self, points: np.ndarray, m: int) -> np.ndarray:
        """Evaluate at each row of an ``(N, num_vars)`` int64 array modulo ``m < 2^31``."""
        pts = np.asarray(points, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[1] != self.num_vars:
            raise ArityMismatch(f"expected shape (N, {self.num_vars}), got {pts.shape}")
        out = np.zeros(pts.shape[0], dtype=np.int64)
        powers: dict[tuple[int, int], np.ndarray] = {}
        for mono, c in self._terms:
            t = np.full(pts.shape[0], c % m, dtype=np.int64)
            for i, e in enumerate(mono):
                if e:
                    key = (i, e)
                    if key not in powers:
                        powers[key] = _batch.powmod(pts[:, i] % m, e, m)
                    t = t * powers[key] % m
            out = (out + t) % m
        return out

    # text form

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"SparsePoly({self.to_text()!r}, num_vars={self.num_vars})"

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts: list[str] = []
        for i, (mono, c) in enumerate(self._terms):
            factors = [f"x{j + 1}" if e == 1 else f"x{j + 1}^{e}" for j, e in enumerate(mono) if e]
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag), *factors])
            if i == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts)

    @classmethod
    def parse(cls, text: str, num_vars: int) -> SparsePoly:
        """Inverse of :meth:`to_text`; also accepts explicit ``1*`` and ``^1``."""
        s = re.sub(r"\s+", "", text)
        if not s:
            raise PolyParseError("empty polynomial text")
        acc: dict[Monomial, int] = {}
        pos = 0
        for match in re.finditer(r"([+-]?)([^+-]+)", s):
            if match.start() != pos:
                raise PolyParseError(f"unexpected text near {s[pos:]!r}")
            pos = match.end()
            sign = -1 if match.group(1) == "-" else 1
            coeff = sign
            mono = [0] * num_vars
            for factor in match.group(2).split("*"):
                if re.fullmatch(r"\d+", factor):
                    coeff *= int(factor)
                    continue
                fm = re.fullmatch(r"x(\d+)(?:\^(\d+))?", factor)
                if not fm:
                    raise PolyParseError(f"bad factor {factor!r} in {text!r}")
                var = int(fm.group(1)) - 1
                if not 0 <= var < num_vars:
                    raise PolyParseError(f"variable x{var + 1} out of range for {num_vars} variables")
                mono[var] += int(fm.group(2) or 1)
            key = tuple(mono)
            acc[key] = acc.get(key, 0) + coeff
        if pos != len(s):
            raise PolyParseError(f"trailing text {s[pos:]!r}")
        return cls(acc, num_vars)
