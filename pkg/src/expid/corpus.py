"""Named test circuits and a random circuit generator.

The zero corpus holds circuits that vanish identically on their domain;
the nonzero corpus holds circuits that do not.  Random circuits mix plain
random DAGs with templates that are zero by construction.
"""

from __future__ import annotations

import random
from typing import Callable

from .builders import attention, glu, softmax
from .circuit import Circuit, CircuitBuilder


def exp_product_law() -> Circuit:
    """``exp(x) * exp(y) - exp(x + y)``."""
    b = CircuitBuilder(2)
    x, y = b.input(0), b.input(1)
    return b.build(b.sub(b.mul(b.exp(x), b.exp(y)), b.exp(b.add(x, y))))


def softmax_sum_minus_one(n: int = 3) -> Circuit:
    b = CircuitBuilder(n)
    exps = [b.exp(b.input(i)) for i in range(n)]
    total = b.add(*exps)
    return b.build(b.add(*[b.div(e, total) for e in exps], b.const(-1)))


def _shifted_exp(b: CircuitBuilder, x: str, c: int) -> str:
    """``exp((x^2 - c x) / (x - c))``, which equals ``exp(x)`` away from ``x = c``."""
    top = b.sub(b.mul(x, x), b.mul(b.const(c), x))
    return b.exp(b.div(top, b.sub(x, b.const(c))))


def condensation_pair() -> Circuit:
    """``exp((x^2-3x)/(x-3)) - exp((x^2-2x)/(x-2))``: distinct fractions, same function."""
    b = CircuitBuilder(1)
    x = b.input(0)
    return b.build(b.sub(_shifted_exp(b, x, 3), _shifted_exp(b, x, 2)))


def exp_vs_shifted() -> Circuit:
    """``exp(x) - exp((x^2-2x)/(x-2))``."""
    b = CircuitBuilder(1)
    x = b.input(0)
    return b.build(b.sub(b.exp(x), _shifted_exp(b, x, 2)))


def exp_x() -> Circuit:
    b = CircuitBuilder(1)
    return b.build(b.exp(b.input(0)))


def exp_x_plus_one() -> Circuit:
    b = CircuitBuilder(1)
    return b.build(b.add(b.exp(b.input(0)), b.const(1)))


def exp_x_minus_exp_2x() -> Circuit:
    b = CircuitBuilder(1)
    x = b.input(0)
    return b.build(b.sub(b.exp(x), b.exp(b.mul(b.const(2), x))))


def constant(value: int, num_inputs: int) -> Circuit:
    b = CircuitBuilder(num_inputs)
    for i in range(num_inputs):
        b.input(i)
    return b.build(b.const(value))


def softmax_sum(n: int = 3) -> Circuit:
    b = CircuitBuilder(n)
    exps = [b.exp(b.input(i)) for i in range(n)]
    total = b.add(*exps)
    return b.build(b.add(*[b.div(e, total) for e in exps]))


ZERO_CORPUS: dict[str, Callable[[], Circuit]] = {
    "exp-product-law": exp_product_law,
    "softmax-sum-minus-one": softmax_sum_minus_one,
    "condensation-pair": condensation_pair,
    "exp-vs-shifted": exp_vs_shifted,
}

NONZERO_CORPUS: dict[str, Callable[[], Circuit]] = {
    "exp": exp_x,
    "exp-plus-one": exp_x_plus_one,
    "exp-minus-exp-2x": exp_x_minus_exp_2x,
    "softmax-3": lambda: softmax(3)[0],
    "glu-2-1": lambda: glu(2, 1)[0],
    "attention-1-2-1-1": lambda: attention(1, 2, 1, 1)[0],
}


class _RandomDag:
    """Random gate soup that tracks which nodes are free of ``exp`` gates."""

    def __init__(self, rng: random.Random, b: CircuitBuilder):
        self.rng = rng
        self.b = b
        self.nodes: list[str] = [b.input(i) for i in range(b.num_inputs)]
        self.exp_free: set[str] = set(self.nodes)

    def pick(self, exp_free: bool = False) -> str:
        pool = [x for x in self.nodes if x in self.exp_free] if exp_free else self.nodes
        return self.rng.choice(pool)

    def grow(self, count: int) -> str:
        rng, b = self.rng, self.b
        for _ in range(count):
            kind = rng.choice(("const", "add", "mul", "div", "exp", "add", "mul"))
            if kind == "const":
                node, free = b.const(rng.randint(-3, 3)), True
            elif kind == "exp":
                node, free = b.exp(self.pick(exp_free=True)), False
            else:
                kids = [self.pick() for _ in range(2 if kind == "div" else rng.randint(1, 3))]
                node = getattr(b, kind)(*kids)
                free = all(k in self.exp_free for k in kids)
            self.nodes.append(node)
            if free:
                self.exp_free.add(node)
        return self.nodes[-1]


def random_circuit(rng: random.Random, max_inputs: int = 3, max_gates: int = 10) -> Circuit:
    """A random valid circuit with ``n <= max_inputs`` and at most ``max_gates`` gates in total.

    Roughly half of the outputs come from zero-by-construction templates
    built on random subcircuits.
    """
    n = rng.randint(1, max_inputs)
    b = CircuitBuilder(n)
    dag = _RandomDag(rng, b)
    budget = max_gates - n
    template = rng.choice(("plain", "exp-law", "commute-mul", "div-inverse", "commute-add"))
    # Template overheads in gates, counted against the budget below.
    overhead = {"plain": 0, "exp-law": 8, "commute-mul": 5, "div-inverse": 7, "commute-add": 5}[template]
    if budget - overhead < 1:
        template, overhead = "plain", 0
    if template == "plain":
        out = dag.grow(max(1, budget))
        return b.build(out)
    dag.grow(rng.randint(0, budget - overhead))
    if template == "exp-law":
        x, y = dag.pick(exp_free=True), dag.pick(exp_free=True)
        out = b.sub(b.mul(b.exp(x), b.exp(y)), b.exp(b.add(x, y)))
    elif template == "commute-mul":
        x, y = dag.pick(), dag.pick()
        out = b.sub(b.mul(x, y), b.mul(y, x))
    elif template == "div-inverse":
        x, y = dag.pick(), dag.pick()
        out = b.sub(b.div(x, y), b.mul(x, b.div(b.const(1), y)))
    else:
        x, y = dag.pick(), dag.pick()
        out = b.sub(b.add(x, y), b.add(y, x))
    c = b.build(out)
    return c


def random_circuits(count: int, seed: int, max_inputs: int = 3, max_gates: int = 10) -> list[Circuit]:
    rng = random.Random(seed)
    return [random_circuit(rng, max_inputs, max_gates) for _ in range(count)]
