"""Prime fields, prime pairs ``q | p - 1`` and order-``q`` subgroup elements."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator, NamedTuple

MAX_MODULUS = 1 << 62

# Deterministic Miller-Rabin: these bases are exact for every n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class ZeroInverse(ZeroDivisionError):
    pass


class SearchExhausted(ArithmeticError):
    pass


def mod_pow(base: int, exponent: int, m: int) -> int:
    if exponent < 0:
        raise ValueError("exponent must be non-negative")
    return pow(base, exponent, m)


def mod_inv(x: int, m: int) -> int:
    """Inverse of ``x`` modulo the prime ``m``; raises :class:`ZeroInverse` on ``x = 0``."""
    x %= m
    if x == 0:
        raise ZeroInverse(f"0 has no inverse modulo {m}")
    return pow(x, -1, m)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for b in _MR_BASES:
        if n % b == 0:
            return n == b
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for b in _MR_BASES:
        x = pow(b, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime ``>= n``."""
    if n <= 2:
        return 2
    n |= 1
    while not is_prime(n):
        n += 2
    return n


class PrimePair(NamedTuple):
    p: int
    q: int


def generate_prime_pair(q_min: int) -> PrimePair:
    """Smallest prime ``q >= q_min`` and the smallest prime ``p = m*q + 1``."""
    if q_min < 3:
        raise ValueError("q_min must be at least 3")
    q = next_prime(q_min)
    if q >= MAX_MODULUS:
        raise SearchExhausted(f"no prime q >= {q_min} below 2^62")
    p = 2 * q + 1
    while p < MAX_MODULUS:
        if is_prime(p):
            return PrimePair(p, q)
        p += 2 * q  # p - 1 must be even for an odd prime p
    raise SearchExhausted(f"no prime p = 1 mod {q} below 2^62")


def find_subgroup_element(p: int, q: int, seed: int | None = 0) -> int:
    """Return an element of multiplicative order exactly ``q`` in ``F_p^*``.

    Candidates ``h`` are drawn from a seeded stream and mapped to
    ``h^((p-1)/q)``; the first image different from 1 is returned.
    """
    if (p - 1) % q:
        raise ValueError(f"q={q} does not divide p-1={p - 1}")
    rng = random.Random(seed)
    cofactor = (p - 1) // q
    while True:
        h = rng.randrange(2, p) if p > 3 else 2
        a = pow(h, cofactor, p)
        if a != 1:
            return a


def multiplicative_order(x: int, p: int) -> int:
    """Brute-force order of ``x`` in ``F_p^*``; only meant for small ``p``."""
    x %= p
    if x == 0:
        raise ValueError("0 is not a unit")
    y, k = x, 1
    while y != 1:
        y = y * x % p
        k += 1
    return k


@dataclass(frozen=True)
class FieldParams:
    """A pair of primes ``q | p - 1`` together with an element ``a`` of order ``q``."""

    p: int
    q: int
    a: int

    def __post_init__(self) -> None:
        p, q, a = self.p, self.q, self.a
        if not (p < MAX_MODULUS and q < MAX_MODULUS):
            raise ValueError("moduli must be below 2^62")
        if not is_prime(p) or not is_prime(q):
            raise ValueError(f"p={p} and q={q} must both be prime")
        if (p - 1) % q:
            raise ValueError(f"q={q} does not divide p-1")
        if not 0 < a < p or a == 1 or pow(a, q, p) != 1:
            raise ValueError(f"a={a} does not have order {q} modulo {p}")

    @classmethod
    def generate(cls, q_min: int, seed: int | None = 0) -> FieldParams:
        p, q = generate_prime_pair(q_min)
        return cls(p, q, find_subgroup_element(p, q, seed))

    def subgroup(self) -> Iterator[int]:
        """Elements ``a^0, a^1, ..., a^(q-1)`` in exponent order."""
        z = 1
        for _ in range(self.q):
            yield z
            z = z * self.a % self.p

    def subgroup_element(self, j: int) -> int:
        return pow(self.a, j % self.q, self.p)
