"""Root counts of sparse univariate polynomials on the order-q subgroup of ``F_p^*``.

Experiments here back the soundness analysis of the identity tester: a
``k``-sparse ``f(z) = sum beta_i z^alpha_i`` is expected to have at most
``q^(1 - 1/(k-1))`` roots among ``a^0, ..., a^(q-1)``.
"""

from __future__ import annotations

import csv
import itertools
import math
import random
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from . import _batch
from .field import FieldParams, find_subgroup_element

MAX_SCAN_INSTANCES = 10**7
_CHUNK_CELLS = 1 << 22  # beta rows times q per evaluation block

CSV_COLUMNS = ("k", "p", "q", "instances", "max_count", "paper_bound", "safe_bound", "argmax_alphas", "argmax_betas")


class PreconditionViolation(ValueError):
    pass


class SpaceTooLarge(ValueError):
    pass


class BoundViolation(AssertionError):
    """An instance exceeded twice the weak Descartes bound."""


@dataclass(frozen=True)
class SparseUnivariate:
    alphas: tuple[int, ...]
    betas: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.alphas) != len(self.betas):
            raise ValueError("alphas and betas must have equal length")
        if any(a < 0 for a in self.alphas) or any(x >= y for x, y in zip(self.alphas, self.alphas[1:])):
            raise ValueError("alphas must be non-negative and strictly increasing")
        if any(b == 0 for b in self.betas):
            raise ValueError("betas must be nonzero")

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[int, int]], params: FieldParams) -> SparseUnivariate:
        """Build from ``(alpha, beta)`` pairs, reducing mod ``q`` and ``p`` and merging equal exponents."""
        acc: dict[int, int] = {}
        for alpha, beta in terms:
            key = alpha % params.q
            acc[key] = (acc.get(key, 0) + beta) % params.p
        items = sorted((a, b) for a, b in acc.items() if b)
        return cls(tuple(a for a, _ in items), tuple(b for _, b in items))

    @property
    def k(self) -> int:
        return len(self.alphas)

    def __call__(self, z: int, p: int) -> int:
        return sum(b * pow(z, a, p) for a, b in zip(self.alphas, self.betas)) % p


def count_roots_in_subgroup(f: SparseUnivariate, params: FieldParams) -> int:
    """Number of ``j < q`` with ``f(a^j) = 0 mod p``, in ``O(k q)`` multiplications."""
    p = params.p
    terms = [b % p for b in f.betas]
    steps = [pow(params.a, alpha, p) for alpha in f.alphas]
    count = 0
    for _ in range(params.q):
        if sum(terms) % p == 0:
            count += 1
        terms = [t * s % p for t, s in zip(terms, steps)]
    return count


def rotate_exponents(f: SparseUnivariate, c: int, q: int) -> SparseUnivariate:
    """Map every exponent ``alpha`` to ``c * alpha mod q``; ``c`` must be a unit mod ``q``."""
    if c % q == 0:
        raise PreconditionViolation("rotation multiplier must be nonzero mod q")
    pairs = sorted((c * a % q, b) for a, b in zip(f.alphas, f.betas))
    alphas = tuple(a for a, _ in pairs)
    if len(set(alphas)) != len(alphas):
        raise PreconditionViolation("rotation merged exponents; q must be prime and alphas distinct mod q")
    return SparseUnivariate(alphas, tuple(b for _, b in pairs))


# multiplier search


@dataclass(frozen=True)
class KelleyResult:
    c: int
    symmetric_max: int
    one_sided_c: int
    one_sided_max: int
    bound: float
    symmetric_met: bool
    one_sided_met: bool


def _within(residue: int, N: int, n: int, t: int) -> bool:
    # residue <= N / n^(1/t), compared exactly
    return residue**t * n <= N**t


def kelley_search(alphas: Sequence[int], N: int, n: int) -> KelleyResult:
    """Exhaustively find ``c in [1, n-1]`` minimising ``max_i dist(alpha_i c mod N)``.

    ``dist`` is the distance to the nearest multiple of ``N`` (symmetric
    residue).  The one-sided optimum ``max_i (alpha_i c mod N)`` is reported
    alongside, with ties broken towards the smallest ``c``.
    """
    t = len(alphas)
    if t < 1 or N < 1:
        raise PreconditionViolation("need at least one exponent and N >= 1")
    bound = N / n ** (1 / t) if n >= 1 else math.inf
    nonzero = [a % N for a in alphas if a % N]
    if not nonzero:
        return KelleyResult(1, 0, 1, 0, bound, True, True)
    g = math.gcd(N, *nonzero)
    if not 2 <= n <= N // g:
        raise PreconditionViolation(f"need 2 <= n <= N/gcd = {N // g}, got n={n}")
    best_sym = best_one = None
    for c in range(1, n):
        residues = [a * c % N for a in alphas]
        sym = max(min(r, N - r) for r in residues)
        one = max(residues)
        if best_sym is None or sym < best_sym[1]:
            best_sym = (c, sym)
        if best_one is None or one < best_one[1]:
            best_one = (c, one)
    return KelleyResult(
        best_sym[0],
        best_sym[1],
        best_one[0],
        best_one[1],
        bound,
        _within(best_sym[1], N, n, t),
        _within(best_one[1], N, n, t),
    )


# bound scans


def sparse_root_bound(k: int, q: int) -> float:
    """``q^(1 - 1/(k-1))`` for ``k >= 2``; a single monomial never vanishes on the subgroup."""
    return 0.0 if k < 2 else q ** (1 - 1 / (k - 1))


def exceeds_bound(count: int, k: int, q: int, factor: int = 1) -> bool:
    """Exact test of ``count > factor * q^(1 - 1/(k-1))`` in integers."""
    if k < 2:
        return count > 0
    return count ** (k - 1) > factor ** (k - 1) * q ** (k - 2)


@dataclass
class ScanReport:
    k: int
    p: int
    q: int
    instances: int
    max_count: int
    argmax: SparseUnivariate
    root_bound: float
    safe_bound: float
    root_bound_violations: int
    safe_violations: int
    histogram: list[int] = field(default_factory=list)

    def csv_row(self) -> dict[str, object]:
        return {
            "k": self.k,
            "p": self.p,
            "q": self.q,
            "instances": self.instances,
            "max_count": self.max_count,
            "paper_bound": f"{self.root_bound:.6f}",
            "safe_bound": f"{self.safe_bound:.6f}",
            "argmax_alphas": " ".join(map(str, self.argmax.alphas)),
            "argmax_betas": " ".join(map(str, self.argmax.betas)),
        }


def scan_size(k: int, p: int, q: int) -> int:
    """Normalised instances: ``alpha_1 = 0``, ``beta_1 = 1``, the rest free."""
    if k < 1 or k > q:
        raise PreconditionViolation(f"need 1 <= k <= q, got k={k}, q={q}")
    return math.comb(q - 1, k - 1) * (p - 1) ** (k - 1)


def _subgroup_powers(params: FieldParams) -> np.ndarray:
    return np.array(list(params.subgroup()), dtype=np.int64)


def exhaustive_bound_scan(k: int, params: FieldParams, max_instances: int = MAX_SCAN_INSTANCES) -> ScanReport:
    """Count roots of every normalised ``k``-sparse polynomial.

    Dividing by ``z^alpha_1`` and scaling by ``1/beta_1`` leave the root set
    in the subgroup unchanged, so ``alpha_1 = 0`` and ``beta_1 = 1`` lose
    nothing.  Raises :class:`BoundViolation` if any instance exceeds twice
    the sparse root bound; violations of the bound itself are only counted.
    """
    p, q = params.p, params.q
    size = scan_size(k, p, q)
    if size > max_instances:
        raise SpaceTooLarge(f"{size} instances exceed the limit {max_instances}")
    if not _batch.supports(p):
        raise SpaceTooLarge("exhaustive scans need p < 2^31")
    powers = _subgroup_powers(params)
    j = np.arange(q, dtype=np.int64)
    histogram = np.zeros(q + 1, dtype=np.int64)
    best = (-1, None)
    root_v = safe_v = 0
    threshold_root = _first_exceeding(k, q, 1)
    threshold_safe = _first_exceeding(k, q, 2)

    beta_values = np.arange(1, p, dtype=np.int64)
    chunk = max(1, _CHUNK_CELLS // q)
    for tail in itertools.combinations(range(1, q), k - 1):
        # table[i, j] = a^(alpha_i * j) for the free exponents
        table = powers[(np.array(tail, dtype=np.int64)[:, None] * j[None, :]) % q] if tail else np.zeros((0, q), dtype=np.int64)
        for start in range(0, (p - 1) ** (k - 1), chunk):
            stop = min((p - 1) ** (k - 1), start + chunk)
            betas = _beta_block(beta_values, k - 1, start, stop)
            values = (1 + betas @ table) % p if tail else np.ones((1, q), dtype=np.int64)
            counts = np.count_nonzero(values == 0, axis=1)
            histogram += np.bincount(counts, minlength=q + 1)
            root_v += int(np.count_nonzero(counts >= threshold_root))
            safe_v += int(np.count_nonzero(counts >= threshold_safe))
            top = int(counts.max())
            if top > best[0]:
                row = int(np.argmax(counts))
                best = (top, SparseUnivariate((0, *tail), (1, *(int(b) for b in betas[row]))))
    report = ScanReport(
        k, p, q, size, best[0], best[1], sparse_root_bound(k, q), 2 * sparse_root_bound(k, q), root_v, safe_v, histogram.tolist()
    )
    if safe_v:
        raise BoundViolation(f"{safe_v} instances exceed 2*q^(1-1/(k-1)); worst {report.argmax} with {report.max_count} roots")
    return report


def _first_exceeding(k: int, q: int, factor: int) -> int:
    """Smallest root count that exceeds ``factor`` times the sparse root bound."""
    c = 0
    while not exceeds_bound(c, k, q, factor):
        c += 1
    return c


def _beta_block(values: np.ndarray, width: int, start: int, stop: int) -> np.ndarray:
    """Rows ``start..stop`` of the lexicographic product ``values^width``."""
    idx = np.arange(start, stop, dtype=np.int64)
    base = len(values)
    cols = []
    for _ in range(width):
        cols.append(values[idx % base])
        idx //= base
    return np.stack(cols[::-1], axis=1) if cols else np.zeros((stop - start, 0), dtype=np.int64)


@dataclass(frozen=True)
class ConjectureReport:
    k: int
    samples: int
    max_fraction: float
    max_count: int
    worst: SparseUnivariate


def conjecture_scan(params: FieldParams, k: int, samples: int, seed: int = 0) -> ConjectureReport:
    """Largest observed root fraction ``count / q`` over random ``k``-sparse instances."""
    p, q = params.p, params.q
    if not 1 <= k <= q:
        raise PreconditionViolation(f"need 1 <= k <= q, got k={k}")
    rng = random.Random(seed)
    batch_ok = _batch.supports(p)
    powers = _subgroup_powers(params) if batch_ok else None
    j = np.arange(q, dtype=np.int64)
    best_count, worst = -1, None
    for _ in range(samples):
        alphas = tuple(sorted(rng.sample(range(q), k)))
        betas = tuple(rng.randrange(1, p) for _ in range(k))
        f = SparseUnivariate(alphas, betas)
        if batch_ok:
            table = powers[(np.array(alphas, dtype=np.int64)[:, None] * j[None, :]) % q]
            count = int(np.count_nonzero((np.array(betas, dtype=np.int64) @ table) % p == 0))
        else:
            count = count_roots_in_subgroup(f, params)
        if count > best_count:
            best_count, worst = count, f
    return ConjectureReport(k, samples, best_count / q, best_count, worst)


def write_scan_csv(reports: Iterable[ScanReport], out: IO[str]) -> None:
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.csv_row())


# evaluation isomorphism


def crt_map(coeffs: Sequence[int], p: int, q: int, g: int) -> tuple[int, ...]:
    """``f -> (f(1), f(g), ..., f(g^(q-1)))`` for ``f`` given by ``q`` coefficients."""
    out = []
    z = 1
    for _ in range(q):
        out.append(sum(c * pow(z, i, p) for i, c in enumerate(coeffs)) % p)
        z = z * g % p
    return tuple(out)


def cyclic_product(f: Sequence[int], h: Sequence[int], p: int) -> tuple[int, ...]:
    """``f * h mod (x^q - 1, p)`` for coefficient vectors of length ``q``."""
    q = len(f)
    out = [0] * q
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(h):
                out[(i + j) % q] = (out[(i + j) % q] + a * b) % p
    return tuple(out)


@dataclass(frozen=True)
class CrtReport:
    p: int
    q: int
    g: int
    exhaustive: bool
    elements: int
    collisions: int
    pairs: int
    homomorphism_failures: int

    @property
    def ok(self) -> bool:
        return self.collisions == 0 and self.homomorphism_failures == 0


def verify_crt_isomorphism(p: int, q: int, samples: int = 1000, seed: int = 0, exhaustive_limit: int = 10**6) -> CrtReport:
    """Check that evaluation on the subgroup is a ring isomorphism ``F_p[x]/(x^q-1) -> F_p^q``.

    Injectivity is checked on every element when ``p^q <= exhaustive_limit``
    (which for a map between sets of equal size is bijectivity), otherwise
    on the sampled elements.  Additive and multiplicative laws are checked
    on ``samples`` random pairs.
    """
    if (p - 1) % q:
        raise PreconditionViolation(f"q={q} does not divide p-1")
    g = find_subgroup_element(p, q, seed)
    rng = random.Random(seed)
    exhaustive = p**q <= exhaustive_limit
    if exhaustive:
        elements: Iterable[tuple[int, ...]] = itertools.product(range(p), repeat=q)
    else:
        elements = [tuple(rng.randrange(p) for _ in range(q)) for _ in range(samples)]
    images: set[tuple[int, ...]] = set()
    checked = collisions = 0
    seen: set[tuple[int, ...]] = set()
    for f in elements:
        if f in seen:
            continue
        seen.add(f)
        image = crt_map(f, p, q, g)
        if image in images:
            collisions += 1
        images.add(image)
        checked += 1

    failures = 0
    for _ in range(samples):
        f = tuple(rng.randrange(p) for _ in range(q))
        h = tuple(rng.randrange(p) for _ in range(q))
        ef, eh = crt_map(f, p, q, g), crt_map(h, p, q, g)
        sum_img = crt_map(tuple((x + y) % p for x, y in zip(f, h)), p, q, g)
        prod_img = crt_map(cyclic_product(f, h, p), p, q, g)
        if sum_img != tuple((x + y) % p for x, y in zip(ef, eh)) or prod_img != tuple(
            x * y % p for x, y in zip(ef, eh)
        ):
            failures += 1
    return CrtReport(p, q, g, exhaustive, checked, collisions, samples, failures)
