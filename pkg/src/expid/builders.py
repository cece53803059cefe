"""Neural-network building blocks written as single-output circuits.

Every builder returns one circuit per output coordinate.  Weight matrices
are circuit inputs rather than constants so the circuits stay generic in
the parameters.
"""

from __future__ import annotations

import math

from .circuit import Circuit, CircuitBuilder


class InvalidDims(ValueError):
    pass


def _positive(**dims: int) -> None:
    for name, value in dims.items():
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise InvalidDims(f"{name} must be a positive integer, got {value!r}")


def softmax(n: int) -> list[Circuit]:
    """``exp(x_i) / sum_j exp(x_j)`` for ``i = 0..n-1`` over ``n`` inputs."""
    _positive(n=n)
    out = []
    for i in range(n):
        b = CircuitBuilder(n)
        exps = [b.exp(b.input(j)) for j in range(n)]
        out.append(b.build(b.div(exps[i], b.add(*exps))))
    return out


def glu(n: int, m: int) -> list[Circuit]:
    """Gated linear unit ``(x V)_j * sigmoid((x W)_j)`` for ``j = 0..m-1``.

    Inputs are laid out as ``x`` (n), then ``W`` (n by m, row-major), then
    ``V`` (n by m, row-major).
    """
    _positive(n=n, m=m)
    num_inputs = n + 2 * n * m

    def w_index(r: int, c: int) -> int:
        return n + r * m + c

    def v_index(r: int, c: int) -> int:
        return n + n * m + r * m + c

    out = []
    for j in range(m):
        b = CircuitBuilder(num_inputs)
        xs = [b.input(r) for r in range(n)]
        gate_arg = b.add(*[b.mul(xs[r], b.input(w_index(r, j))) for r in range(n)])
        linear = b.add(*[b.mul(xs[r], b.input(v_index(r, j))) for r in range(n)])
        denom = b.add(b.const(1), b.exp(b.mul(b.const(-1), gate_arg)))
        out.append(b.build(b.div(linear, denom)))
    return out


def attention(m: int, n: int, d_k: int, d_v: int) -> list[Circuit]:
    """Scaled dot-product attention ``softmax(Q K^T / sqrt(d_k)) V``.

    ``Q`` is m by d_k, ``K`` is n by d_k and ``V`` is n by d_v, laid out
    row-major in that order.  ``d_k`` must be a perfect square so the scale
    is an integer constant.  Coordinates are returned row by row.
    """
    _positive(m=m, n=n, d_k=d_k, d_v=d_v)
    root = math.isqrt(d_k)
    if root * root != d_k:
        raise InvalidDims(f"d_k={d_k} is not a perfect square")
    q_off, k_off, v_off = 0, m * d_k, m * d_k + n * d_k
    num_inputs = v_off + n * d_v
    out = []
    for i in range(m):
        for j in range(d_v):
            b = CircuitBuilder(num_inputs)
            scale = b.const(root)
            weights = []
            for r in range(n):
                dot = b.add(*[b.mul(b.input(q_off + i * d_k + l), b.input(k_off + r * d_k + l)) for l in range(d_k)])
                weights.append(b.exp(b.div(dot, scale)))
            mixed = b.add(*[b.mul(b.input(v_off + r * d_v + j), weights[r]) for r in range(n)])
            out.append(b.build(b.div(mixed, b.add(*weights))))
    return out


EXAMPLES = {
    "softmax": (softmax, ("n",)),
    "glu": (glu, ("n", "m")),
    "attention": (attention, ("m", "n", "d_k", "d_v")),
}


def build_example(name: str, **dims: int) -> list[Circuit]:
    """Dispatch by name; unknown or missing dimensions raise :class:`InvalidDims`."""
    if name not in EXAMPLES:
        raise InvalidDims(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}")
    fn, names = EXAMPLES[name]
    missing = [d for d in names if d not in dims]
    extra = [d for d in dims if d not in names]
    if missing or extra:
        raise InvalidDims(f"{name} takes dims {names}; missing {missing}, unexpected {extra}")
    return fn(**dims)
