"""Arithmetic circuits with exponentiation gates (at most one ``exp`` on any path).

Evaluation over finite fields carries a pair ``(num, exp)`` on every wire:
``num`` lives in ``F_p`` ("under" the exponent) and ``exp`` in ``F_q``
("over" the exponent).  An exponentiation gate maps ``(tau, alpha)`` to
``(a^alpha mod p, ⊥)``.  ``None`` stands for ⊥ and is absorbing per
coordinate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np

from . import _batch
from .exppoly import ExpPoly, TermBlowup, ep_mul
from .field import FieldParams
from .intpoly import ArityMismatch, SparsePoly

DEFAULT_TERM_CAP = 4096

KINDS = ("input", "const", "add", "mul", "div", "exp")


class CircuitError(ValueError):
    pass


class CircuitParseError(CircuitError):
    pass


class ValidationError(CircuitError):
    pass


class CyclicGraph(ValidationError):
    pass


class FanInViolation(ValidationError):
    pass


class DanglingReference(ValidationError):
    pass


class NestedExponentiation(ValidationError):
    def __init__(self, path: Sequence[str]):
        self.path = tuple(path)
        super().__init__("two exponentiation gates on one path: " + " -> ".join(self.path))


class DualValue(NamedTuple):
    num: int | None
    exp: int | None


@dataclass(frozen=True)
class Gate:
    id: str
    kind: str
    children: tuple[str, ...] = ()
    value: int | None = None
    var: int | None = None


@dataclass
class Circuit:
    gates: dict[str, Gate]
    output: str
    num_inputs: int
    _order: list[str] | None = field(default=None, init=False, repr=False, compare=False)

    # validation

    def validate(self) -> None:
        """Check references, fan-in, acyclicity and the one-exp-per-path rule."""
        self._order = None
        if self.num_inputs < 0:
            raise ValidationError("num_inputs must be non-negative")
        if self.output not in self.gates:
            raise DanglingReference(f"output gate {self.output!r} does not exist")
        for g in self.gates.values():
            self._check_gate(g)
        order = self._toposort()
        exp_depth: dict[str, int] = {}
        via: dict[str, str | None] = {}
        for gid in order:
            g = self.gates[gid]
            best, best_child = 0, None
            for c in g.children:
                if best_child is None or exp_depth[c] > best:
                    best, best_child = exp_depth[c], c
            depth = best + (g.kind == "exp")
            exp_depth[gid] = depth
            via[gid] = best_child
            if depth > 1:
                path = [gid]
                while via[path[-1]] is not None:
                    path.append(via[path[-1]])
                raise NestedExponentiation(list(reversed(path)))
        self._order = [gid for gid in order if gid in self._reachable()]

    def _check_gate(self, g: Gate) -> None:
        if g.kind not in KINDS:
            raise ValidationError(f"gate {g.id!r} has unknown kind {g.kind!r}")
        n = len(g.children)
        if g.kind in ("input", "const") and n:
            raise FanInViolation(f"{g.kind} gate {g.id!r} cannot have children")
        if g.kind in ("add", "mul") and n < 1:
            raise FanInViolation(f"{g.kind} gate {g.id!r} needs at least one child")
        if g.kind == "div" and n != 2:
            raise FanInViolation(f"div gate {g.id!r} needs exactly 2 children, has {n}")
        if g.kind == "exp" and n != 1:
            raise FanInViolation(f"exp gate {g.id!r} needs exactly 1 child, has {n}")
        if g.kind == "input" and (g.var is None or not 0 <= g.var < self.num_inputs):
            raise ValidationError(f"input gate {g.id!r} has invalid variable {g.var!r}")
        if g.kind == "const" and not isinstance(g.value, int):
            raise ValidationError(f"const gate {g.id!r} needs an integer value")
        for c in g.children:
            if c not in self.gates:
                raise DanglingReference(f"gate {g.id!r} references missing gate {c!r}")

    def _toposort(self) -> list[str]:
        state: dict[str, int] = {}  # 1 = on stack, 2 = done
        order: list[str] = []
        for root in self.gates:
            if root in state:
                continue
            stack = [(root, iter(self.gates[root].children))]
            state[root] = 1
            while stack:
                gid, it = stack[-1]
                for c in it:
                    s = state.get(c)
                    if s == 1:
                        raise CyclicGraph(f"cycle through gate {c!r}")
                    if s is None:
                        state[c] = 1
                        stack.append((c, iter(self.gates[c].children)))
                        break
                else:
                    stack.pop()
                    state[gid] = 2
                    order.append(gid)
        return order

    def _reachable(self) -> set[str]:
        seen = {self.output}
        todo = [self.output]
        while todo:
            for c in self.gates[todo.pop()].children:
                if c not in seen:
                    seen.add(c)
                    todo.append(c)
        return seen

    @property
    def order(self) -> list[str]:
        """Topological order of the gates feeding the output (validates lazily)."""
        if self._order is None:
            self.validate()
        return self._order

    @property
    def size(self) -> int:
        return len(self.order)

    # finite-field evaluation

    def eval_dual(self, u: Sequence[int], v: Sequence[int], params: FieldParams, a: int | None = None) -> DualValue:
        if len(u) != self.num_inputs or len(v) != self.num_inputs:
            raise ArityMismatch(f"expected {self.num_inputs} inputs")
        p, q = params.p, params.q
        base = int(params.a if a is None else a)
        u, v = [int(x) for x in u], [int(x) for x in v]
        vals: dict[str, DualValue] = {}
        for gid in self.order:
            g = self.gates[gid]
            kids = [vals[c] for c in g.children]
            if g.kind == "input":
                val = DualValue(u[g.var] % p, v[g.var] % q)
            elif g.kind == "const":
                val = DualValue(g.value % p, g.value % q)
            elif g.kind == "add":
                val = DualValue(_fold(kids, 0, p, lambda x, y: x + y), _fold(kids, 1, q, lambda x, y: x + y))
            elif g.kind == "mul":
                val = DualValue(_fold(kids, 0, p, lambda x, y: x * y), _fold(kids, 1, q, lambda x, y: x * y))
            elif g.kind == "div":
                (t1, a1), (t2, a2) = kids
                num = None if t1 is None or not t2 else t1 * pow(t2, -1, p) % p
                ex = None if a1 is None or not a2 else a1 * pow(a2, -1, q) % q
                val = DualValue(num, ex)
            else:  # exp
                alpha = kids[0].exp
                val = DualValue(None if alpha is None else pow(base, alpha, p), None)
            vals[gid] = val
        return vals[self.output]

    def eval_finite(self, u: Sequence[int], v: Sequence[int], params: FieldParams, a: int | None = None) -> int | None:
        """Value of the output in ``F_p``, or ``None`` for ⊥."""
        return self.eval_dual(u, v, params, a).num

    def eval_finite_batch(self, U: np.ndarray, V: np.ndarray, A: np.ndarray | int, params: FieldParams) -> np.ndarray:
        """Vectorised :meth:`eval_finite` over rows of ``U``/``V``; ``-1`` marks ⊥."""
        p, q = params.p, params.q
        if not _batch.supports(p, q):
            raise ValueError("batch evaluation needs p < 2^31")
        U = np.asarray(U, dtype=np.int64)
        V = np.asarray(V, dtype=np.int64)
        N = U.shape[0]
        ones = np.ones(N, dtype=bool)
        vals: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = {}
        for gid in self.order:
            g = self.gates[gid]
            kids = [vals[c] for c in g.children]
            if g.kind == "input":
                val = (U[:, g.var] % p, ones, V[:, g.var] % q, ones)
            elif g.kind == "const":
                val = (np.full(N, g.value % p, dtype=np.int64), ones, np.full(N, g.value % q, dtype=np.int64), ones)
            elif g.kind in ("add", "mul"):
                t, tok, x, xok = kids[0]
                for t2, tok2, x2, xok2 in kids[1:]:
                    if g.kind == "add":
                        t, x = (t + t2) % p, (x + x2) % q
                    else:
                        t, x = t * t2 % p, x * x2 % q
                    tok, xok = tok & tok2, xok & xok2
                val = (t, tok, x, xok)
            elif g.kind == "div":
                (t1, tok1, x1, xok1), (t2, tok2, x2, xok2) = kids
                val = (
                    t1 * _batch.inverse(t2, p) % p,
                    tok1 & tok2 & (t2 != 0),
                    x1 * _batch.inverse(x2, q) % q,
                    xok1 & xok2 & (x2 != 0),
                )
            else:
                _, _, x, xok = kids[0]
                val = (_batch.powmod_varexp(A, np.where(xok, x, 0), p), xok, np.zeros(N, dtype=np.int64), ~ones)
            vals[gid] = val
        t, tok, _, _ = vals[self.output]
        return np.where(tok, t, -1)

    # conversion to a fraction of exponential polynomials

    def to_fraction(self, term_cap: int = DEFAULT_TERM_CAP) -> tuple[ExpPoly, ExpPoly]:
        """Return ``(P, P')`` with ``C = P / P'`` on the circuit's domain.

        Raises :class:`~expid.exppoly.TermBlowup` when an intermediate sum
        grows beyond ``term_cap`` terms.
        """
        n = self.num_inputs
        one = ExpPoly.one(n)
        memo: dict[str, tuple[ExpPoly, ExpPoly]] = {}

        def mul(x: ExpPoly, y: ExpPoly) -> ExpPoly:
            return ep_mul(x, y, term_cap)

        def capped(x: ExpPoly) -> ExpPoly:
            if x.width > term_cap:
                raise TermBlowup(f"width {x.width} exceeds term cap {term_cap}")
            return x

        for gid in self.order:
            g = self.gates[gid]
            kids = [memo[c] for c in g.children]
            if g.kind == "input":
                frac = (ExpPoly.from_poly(SparsePoly.variable(g.var, n)), one)
            elif g.kind == "const":
                frac = (ExpPoly.constant(g.value, n), one)
            elif g.kind == "add":
                num = ExpPoly.empty(n)
                for i, (Pi, _) in enumerate(kids):
                    term = Pi
                    for j, (_, Pj_den) in enumerate(kids):
                        if j != i:
                            term = mul(term, Pj_den)
                    num = capped(num + term)
                den = one
                for _, Pi_den in kids:
                    den = mul(den, Pi_den)
                frac = (num, den)
            elif g.kind == "mul":
                num, den = one, one
                for Pi, Pi_den in kids:
                    num, den = mul(num, Pi), mul(den, Pi_den)
                frac = (num, den)
            elif g.kind == "div":
                (P1, D1), (P2, D2) = kids
                num, den = mul(P1, D2), mul(P2, D1)
                if not D2.is_one():
                    # Guard: the divisor's own denominator must stay nonzero,
                    # otherwise x/(y/z) would look defined at z = 0.
                    num, den = mul(num, D2), mul(den, D2)
                frac = (num, den)
            else:
                P1, D1 = kids[0]
                frac = (ExpPoly.exp(P1.as_poly(), D1.as_poly()), one)
            memo[gid] = frac
        return memo[self.output]

    def metrics(self, term_cap: int = DEFAULT_TERM_CAP) -> tuple[int, int, int]:
        """``(k, d, w)`` bounds of the fraction form: max over numerator and denominator."""
        P, D = self.to_fraction(term_cap)
        return max(P.width, D.width), max(P.degree, D.degree), max(P.weight, D.weight)

    # serialisation

    def to_dict(self) -> dict[str, Any]:
        gates = []
        for g in self.gates.values():
            entry: dict[str, Any] = {"id": g.id, "kind": g.kind}
            if g.kind == "input":
                entry["var"] = g.var
            elif g.kind == "const":
                entry["value"] = str(g.value)
            else:
                entry["children"] = list(g.children)
            gates.append(entry)
        return {"num_inputs": self.num_inputs, "output": self.output, "gates": gates}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Circuit:
        if not isinstance(data, Mapping):
            raise CircuitParseError("circuit must be a JSON object")
        unknown = set(data) - {"num_inputs", "output", "gates"}
        if unknown:
            raise CircuitParseError(f"unknown top-level fields: {sorted(unknown)}")
        try:
            num_inputs, output, raw_gates = data["num_inputs"], data["output"], data["gates"]
        except KeyError as exc:
            raise CircuitParseError(f"missing field {exc.args[0]!r}") from None
        if not isinstance(num_inputs, int) or isinstance(num_inputs, bool) or num_inputs < 0:
            raise CircuitParseError("num_inputs must be a non-negative integer")
        if not isinstance(raw_gates, list):
            raise CircuitParseError("gates must be a list")
        gates: dict[str, Gate] = {}
        for raw in raw_gates:
            g = _parse_gate(raw)
            if g.id in gates:
                raise CircuitParseError(f"duplicate gate id {g.id!r}")
            gates[g.id] = g
        return cls(gates, _parse_id(output), num_inputs)

    @classmethod
    def from_json(cls, text: str) -> Circuit:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CircuitParseError(f"malformed JSON: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> Circuit:
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())


def _fold(kids: Sequence[DualValue], coord: int, m: int, op) -> int | None:
    acc = kids[0][coord]
    if acc is None:
        return None
    for k in kids[1:]:
        x = k[coord]
        if x is None:
            return None
        acc = op(acc, x) % m
    return acc % m


def _parse_id(raw: Any) -> str:
    if isinstance(raw, bool) or not isinstance(raw, (str, int)):
        raise CircuitParseError(f"gate id must be a string or integer, got {raw!r}")
    return str(raw)


def _parse_gate(raw: Any) -> Gate:
    if not isinstance(raw, Mapping):
        raise CircuitParseError("each gate must be a JSON object")
    unknown = set(raw) - {"id", "kind", "children", "value", "var"}
    if unknown:
        raise CircuitParseError(f"unknown gate fields: {sorted(unknown)}")
    if "id" not in raw or "kind" not in raw:
        raise CircuitParseError("gate needs 'id' and 'kind'")
    gid, kind = _parse_id(raw["id"]), raw["kind"]
    if kind not in KINDS:
        raise CircuitParseError(f"gate {gid!r}: unknown kind {kind!r}")
    children = raw.get("children", [])
    if not isinstance(children, list):
        raise CircuitParseError(f"gate {gid!r}: children must be a list")
    value = var = None
    if kind == "const":
        text = raw.get("value")
        if not isinstance(text, str):
            raise CircuitParseError(f"gate {gid!r}: const value must be a decimal string")
        try:
            value = int(text.strip())
        except ValueError:
            raise CircuitParseError(f"gate {gid!r}: bad integer {text!r}") from None
    elif "value" in raw:
        raise CircuitParseError(f"gate {gid!r}: only const gates carry a value")
    if kind == "input":
        var = raw.get("var")
        if isinstance(var, bool) or not isinstance(var, int):
            raise CircuitParseError(f"gate {gid!r}: input var must be an integer")
    elif "var" in raw:
        raise CircuitParseError(f"gate {gid!r}: only input gates carry a var")
    return Gate(gid, kind, tuple(_parse_id(c) for c in children), value, var)


class CircuitBuilder:
    """Incremental construction; every method returns the new gate's id.

    >>> b = CircuitBuilder(1)
    >>> c = b.build(b.exp(b.input(0)))
    >>> c.size
    2
    """

    def __init__(self, num_inputs: int):
        self.num_inputs = num_inputs
        self._gates: dict[str, Gate] = {}
        self._inputs: dict[int, str] = {}
        self._consts: dict[int, str] = {}

    def _new(self, kind: str, children: Sequence[str] = (), value: int | None = None, var: int | None = None) -> str:
        gid = f"g{len(self._gates)}"
        self._gates[gid] = Gate(gid, kind, tuple(children), value, var)
        return gid

    def input(self, i: int) -> str:
        if i not in self._inputs:
            if not 0 <= i < self.num_inputs:
                raise ValueError(f"input {i} out of range")
            gid = f"x{i}"
            self._gates[gid] = Gate(gid, "input", var=i)
            self._inputs[i] = gid
        return self._inputs[i]

    def const(self, value: int) -> str:
        if value not in self._consts:
            self._consts[value] = self._new("const", value=int(value))
        return self._consts[value]

    def add(self, *children: str) -> str:
        return self._new("add", children)

    def mul(self, *children: str) -> str:
        return self._new("mul", children)

    def div(self, numerator: str, denominator: str) -> str:
        return self._new("div", (numerator, denominator))

    def exp(self, child: str) -> str:
        return self._new("exp", (child,))

    def neg(self, x: str) -> str:
        return self.mul(self.const(-1), x)

    def sub(self, x: str, y: str) -> str:
        return self.add(x, self.neg(y))

    def embed(self, circuit: Circuit, prefix: str, inputs: Sequence[str] | None = None) -> str:
        """Copy another circuit's reachable gates under ``prefix``; returns its output id."""
        inputs = inputs if inputs is not None else [self.input(i) for i in range(circuit.num_inputs)]
        rename: dict[str, str] = {}
        for gid in circuit.order:
            g = circuit.gates[gid]
            if g.kind == "input":
                rename[gid] = inputs[g.var]
                continue
            new_id = f"{prefix}{gid}"
            if new_id in self._gates:
                raise ValueError(f"gate id clash on {new_id!r}")
            self._gates[new_id] = Gate(new_id, g.kind, tuple(rename[c] for c in g.children), g.value, g.var)
            rename[gid] = new_id
        return rename[circuit.output]

    def build(self, output: str) -> Circuit:
        c = Circuit(dict(self._gates), output, self.num_inputs)
        c.validate()
        return c


def difference(c1: Circuit, c2: Circuit) -> Circuit:
    """The circuit ``c1 + (-1) * c2`` over shared inputs."""
    if c1.num_inputs != c2.num_inputs:
        raise ArityMismatch(f"circuits have {c1.num_inputs} and {c2.num_inputs} inputs")
    b = CircuitBuilder(c1.num_inputs)
    left = b.embed(c1, "a.")
    right = b.embed(c2, "b.")
    return b.build(b.sub(left, right))
