from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from expid.exppoly import ExpPoly, ExpTerm
from expid.field import FieldParams
from expid.intpoly import SparsePoly

settings.register_profile("expid", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("expid")


@pytest.fixture
def tiny() -> FieldParams:
    return FieldParams(23, 11, 2)


def polys(num_vars: int, max_terms: int = 4, max_exp: int = 3, max_coeff: int = 9):
    mono = st.tuples(*[st.integers(0, max_exp)] * num_vars)
    return st.lists(st.tuples(mono, st.integers(-max_coeff, max_coeff)), max_size=max_terms).map(
        lambda terms: SparsePoly(terms, num_vars)
    )


def nonzero_polys(num_vars: int, **kw):
    return polys(num_vars, **kw).filter(lambda f: not f.is_zero())


def exppolys(num_vars: int, max_width: int = 4, nonzero_h: bool = True):
    small = dict(max_terms=3, max_exp=2, max_coeff=4)
    h = nonzero_polys(num_vars, **small) if nonzero_h else polys(num_vars, **small)
    term = st.builds(ExpTerm, polys(num_vars, **small), polys(num_vars, **small), h)
    return st.lists(term, max_size=max_width).map(lambda ts: ExpPoly(ts, num_vars))


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
