import io
import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from expid.descartes import (
    CSV_COLUMNS,
    PreconditionViolation,
    SparseUnivariate,
    SpaceTooLarge,
    conjecture_scan,
    count_roots_in_subgroup,
    crt_map,
    exhaustive_bound_scan,
    kelley_search,
    rotate_exponents,
    verify_crt_isomorphism,
    write_scan_csv,
)
from expid.field import FieldParams


def brute_roots(f: SparseUnivariate, fp: FieldParams) -> int:
    return sum(f(z, fp.p) == 0 for z in fp.subgroup())


def test_root_count_examples(tiny):
    assert count_roots_in_subgroup(SparseUnivariate((0, 1), (22, 1)), tiny) == 1
    image = {pow(z, 3, 23) for z in tiny.subgroup()}
    for c in range(1, 23):
        f = SparseUnivariate((0, 3), (-c % 23, 1))
        assert count_roots_in_subgroup(f, tiny) == (1 if c in image else 0) == brute_roots(f, tiny)
    for alpha in range(11):
        for beta in range(1, 23):
            assert count_roots_in_subgroup(SparseUnivariate((alpha,), (beta,)), tiny) == 0


def test_rotation_examples(tiny):
    f = SparseUnivariate((0, 1), (22, 1))
    assert rotate_exponents(f, 1, 11) == f
    g = rotate_exponents(f, 3, 11)
    assert g.alphas == (0, 3)
    assert count_roots_in_subgroup(g, tiny) == 1
    h = SparseUnivariate((1, 4, 9), (5, 7, 2))
    assert rotate_exponents(rotate_exponents(h, 3, 11), pow(3, -1, 11), 11) == h
    with pytest.raises(PreconditionViolation):
        rotate_exponents(h, 11, 11)


@st.composite
def sparse_instances(draw, q=101, p=607):
    k = draw(st.integers(1, 6))
    alphas = tuple(sorted(draw(st.sets(st.integers(0, q - 1), min_size=k, max_size=k))))
    betas = tuple(draw(st.integers(1, p - 1)) for _ in alphas)
    return SparseUnivariate(alphas, betas)


@given(sparse_instances(), st.integers(1, 100))
def test_rotation_invariance(f, c):
    fp = FieldParams.generate(101, seed=0)
    assert count_roots_in_subgroup(rotate_exponents(f, c, 101), fp) == count_roots_in_subgroup(f, fp)


@given(sparse_instances())
def test_incremental_count_matches_brute_force(f):
    fp = FieldParams.generate(101, seed=0)
    assert count_roots_in_subgroup(f, fp) == brute_roots(f, fp)


def test_kelley_examples():
    r = kelley_search([3], 11, 11)
    assert r.one_sided_c == 4 and r.one_sided_max == 1 and r.one_sided_met
    r = kelley_search([3, 5], 11, 11)
    assert r.symmetric_max == 2 and r.c in (4, 7) and r.symmetric_met
    assert r.one_sided_max == 4 and r.one_sided_c == 5 and not r.one_sided_met
    assert r.bound == pytest.approx(11 / 11**0.5)
    r = kelley_search([0], 13, 5)
    assert (r.c, r.symmetric_max, r.one_sided_max) == (1, 0, 0)


def test_kelley_matches_brute_force():
    rng = random.Random(5)
    for _ in range(50):
        N = rng.randrange(5, 40)
        alphas = [rng.randrange(1, N) for _ in range(rng.randint(1, 3))]
        from math import gcd

        g = gcd(N, *alphas)
        if N // g < 2:
            continue
        n = rng.randint(2, N // g)
        r = kelley_search(alphas, N, n)
        sym = min(max(min(a * c % N, N - a * c % N) for a in alphas) for c in range(1, n))
        one = min(max(a * c % N for a in alphas) for c in range(1, n))
        assert (r.symmetric_max, r.one_sided_max) == (sym, one)


def test_kelley_precondition():
    with pytest.raises(PreconditionViolation):
        kelley_search([2, 4], 8, 5)  # N / gcd = 2
    with pytest.raises(PreconditionViolation):
        kelley_search([], 11, 3)


def test_exhaustive_scan_small(tiny):
    assert exhaustive_bound_scan(1, tiny).max_count == 0
    r2 = exhaustive_bound_scan(2, tiny)
    assert r2.instances == 10 * 22 and r2.max_count == 1 and r2.root_bound_violations == 0
    assert sum(r2.histogram) == r2.instances


def test_exhaustive_scan_agrees_with_brute_force_at_7_3():
    fp = FieldParams(7, 3, 2)
    report = exhaustive_bound_scan(3, fp)
    best = 0
    for betas in itertools.product(range(1, 7), repeat=2):
        f = SparseUnivariate((0, 1, 2), (1, *betas))
        best = max(best, brute_roots(f, fp))
    assert report.max_count == best
    assert brute_roots(report.argmax, fp) == report.max_count


def test_scan_limits(tiny):
    with pytest.raises(SpaceTooLarge):
        exhaustive_bound_scan(3, tiny, max_instances=100)
    with pytest.raises(PreconditionViolation):
        exhaustive_bound_scan(12, tiny)


def test_conjecture_scan_ranges(tiny):
    r2 = conjecture_scan(tiny, 2, 2000, seed=1)
    assert 0 <= r2.max_fraction <= 1 / 11
    r3 = conjecture_scan(tiny, 3, 10_000, seed=1)
    assert r3.max_fraction <= 6 / 11
    assert count_roots_in_subgroup(r3.worst, tiny) == r3.max_count


def test_crt_examples():
    r = verify_crt_isomorphism(7, 3)
    assert r.exhaustive and r.elements == 343 and r.collisions == 0 and r.homomorphism_failures == 0
    assert crt_map((1, 0, 0), 7, 3, r.g) == (1, 1, 1)
    assert crt_map((0, 0, 0), 7, 3, r.g) == (0, 0, 0)
    big = verify_crt_isomorphism(23, 11, samples=200)
    assert not big.exhaustive and big.ok


def test_csv_columns(tiny):
    buf = io.StringIO()
    write_scan_csv([exhaustive_bound_scan(2, tiny)], buf)
    header, row = buf.getvalue().splitlines()
    assert header.split(",") == list(CSV_COLUMNS)
    assert row.startswith("2,23,11,220,1,")
