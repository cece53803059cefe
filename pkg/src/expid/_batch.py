"""Vectorised modular arithmetic on int64 arrays.

Only valid for moduli below 2^31 so that products of two residues fit in
int64; callers fall back to the scalar paths otherwise.
"""

from __future__ import annotations

import numpy as np

BATCH_MODULUS_LIMIT = 1 << 31


def supports(*moduli: int) -> bool:
    return all(m < BATCH_MODULUS_LIMIT for m in moduli)


def powmod(base: np.ndarray, exponent: int, m: int) -> np.ndarray:
    """``base ** exponent mod m`` elementwise for a scalar exponent."""
    result = np.ones_like(base) % m
    b = base % m
    e = exponent
    while e:
        if e & 1:
            result = result * b % m
        e >>= 1
        if e:
            b = b * b % m
    return result


def powmod_varexp(base: np.ndarray | int, exponents: np.ndarray, m: int) -> np.ndarray:
    """``base ** exponents mod m`` elementwise with array exponents (non-negative)."""
    exps = np.asarray(exponents, dtype=np.int64).copy()
    b = np.broadcast_to(np.asarray(base, dtype=np.int64) % m, exps.shape).copy()
    result = np.ones(exps.shape, dtype=np.int64) % m
    while exps.any():
        odd = (exps & 1).astype(bool)
        result[odd] = result[odd] * b[odd] % m
        exps >>= 1
        b = b * b % m
    return result


def inverse(x: np.ndarray, m: int) -> np.ndarray:
    """Inverse modulo the prime ``m``; zero entries map to zero (callers mask them)."""
    return powmod(x, m - 2, m)
