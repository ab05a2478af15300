import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import exprs

from odelie.catalog import get
from odelie.equations import (
    DifferenceEquation,
    Orbit,
    PreconditionViolated,
    close_onshell,
    iterate_orbit,
    orbit_residual,
    random_orbits,
    sample_onshell,
)
from odelie.expr import U, shift, u
from odelie.numeric import Domain, NonFinite, evaluate
from odelie.parser import parse

E1, E2, E3 = (get(k).equation for k in ("E1", "E2", "E3"))


def test_equation_validation():
    with pytest.raises(PreconditionViolated):
        DifferenceEquation.from_string("u[1]+u[2]", 4)  # omega independent of u[0]
    with pytest.raises(ValueError):
        DifferenceEquation.from_string("u[0]+u[4]", 4)
    with pytest.raises(ValueError):
        DifferenceEquation.from_string("u[0]", 5)


def test_equation_json_round_trip(tmp_path):
    path = tmp_path / "e.json"
    path.write_text(json.dumps(E2.to_json()))
    eq = DifferenceEquation.load(path)
    assert eq.omega == E2.omega and eq.order == 4 and eq.domain == E2.domain and eq.name == "E2"


def test_equation_json_keys():
    d = E3.to_json()
    assert {"name", "order", "omega", "domain"} <= set(d)
    assert set(d["domain"]) == {"nMin", "nMax", "uIntervals"}


def test_orbit_examples():
    o = iterate_orbit(E1, (1, 2, 3, 4), 0, 8)
    assert list(o.values) == [1, 2, 3, 4] * 3
    o = iterate_orbit(E2, (1, 1, 1, 1), 1, 1)
    assert o.values[4] == pytest.approx(1 / 5)
    o = iterate_orbit(E3, (0.5,) * 4, 0, 1)
    assert o.values[4] == pytest.approx(0.8)


def test_orbit_pole_is_reported():
    with pytest.raises(NonFinite):
        iterate_orbit(E2, (1, 1, 1, 1), -4, 2)


def test_orbit_recurrence_residual():
    n0, vals = random_orbits(E3, 3, 200, np.random.default_rng(0))
    for k in range(3):
        assert orbit_residual(E3, Orbit(int(n0[k]), vals[k])) <= 1e-12


def test_close_onshell_examples():
    assert close_onshell(u(4), E1) == u(0)
    assert close_onshell(u(7), E1) == u(3)
    assert close_onshell(u(4), E3) == parse("(u[1]+u[0])/(u[0]*u[1]+1)")


@given(exprs.filter(lambda e: "log" not in str(e) and "sqrt" not in str(e)), st.integers(0, 3))
def test_close_onshell_agrees_with_orbits(e, k):
    # evaluating the closed form at the orbit head matches evaluating e on the extended orbit
    o = iterate_orbit(E3, (0.3, -0.4, 0.6, 0.2), 7, 8)
    shifted = shift(e, k + 1)
    try:
        direct = evaluate(shifted, n=7, u=o.values)
        closed = evaluate(close_onshell(shifted, E3), n=7, u=o.values[:4])
    except NonFinite:
        return
    assert abs(direct - closed) <= 1e-9 * (1 + abs(direct)) or abs(direct) > 1e8


def test_sample_onshell():
    assert sample_onshell(E3, 0) == []
    pts = sample_onshell(E3, 40)
    assert all(len(p.u) == 4 for p in pts)
    assert all(0.1 <= abs(x) <= 0.9 for p in pts for x in p.u)
    assert all(5 <= p.n <= 60 for p in pts)
    assert sample_onshell(E3, 10, seed=3) == sample_onshell(E3, 10, seed=3)
    assert sample_onshell(E3, 10, seed=3) != sample_onshell(E3, 10, seed=4)


def test_domain_json_round_trip():
    d = Domain(n_min=1, n_max=9, u_intervals=((0.2, 0.3),))
    assert Domain.from_json(d.to_json()) == d


def test_close_onshell_leaves_low_indices():
    e = U(2) * U(3)
    assert close_onshell(e, E3) is e
