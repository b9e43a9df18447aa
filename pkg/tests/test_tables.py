import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cbcrc import tables
from cbcrc.errors import DomainError
from cbcrc.fastcbc import error_column, init_state, advance
from cbcrc.numtheory import mod_inverse
from cbcrc.weights import WeightAssignment

PRIMES = [p for p in range(5, 400) if all(p % d for d in range(2, int(p**0.5) + 1))]


def test_data_file_shape():
    doc = tables.load_tables()
    assert doc["schema_version"] == 1 and doc["s"] == 100
    assert tables.table_ids() == ["1", "2", "3", "4"]
    for tid in tables.table_ids():
        t = doc["tables"][tid]
        assert len(t["weights"]) == 3
        assert set(t["rows"]) == {f"{c}:e{m}" for c in tables.CONSTRUCTIONS for m in (1, 2, 3)}
        assert all(len(r) == len(t["n"]) for r in t["rows"].values())
        for con, ns in t["tie_branch"].items():
            assert con in tables.CONSTRUCTIONS and set(ns) <= set(t["n"])
    assert set(doc["default_n"]) <= set(doc["tables"]["1"]["n"])


def test_reference_anchor_values():
    t1 = tables._table(1)
    assert t1["rows"]["cbc1:e1"][:3] == [140.44, 98.623, 69.702]
    assert t1["rows"]["cbc2c:e2"][0] == 5.4897e-04
    assert tables._table(2)["rows"]["cbc2:e2"][0] == 5.4882e-04


def test_family_gamma_hat():
    s = 5
    j = np.arange(1, 6, dtype=float)
    assert np.array_equal(tables.family_gamma_hat({"kind": "constant", "value": 1}, s), np.ones(5))
    assert np.allclose(tables.family_gamma_hat({"kind": "geometric", "base": 10}, s), 10.0**-j)
    assert np.allclose(tables.family_gamma_hat({"kind": "power", "p": 2}, s), j**-2)
    assert np.allclose(tables.family_gamma_hat({"kind": "reverse_power", "p": 2}, s), (6 - j) ** -2)
    with pytest.raises(DomainError):
        tables.family_gamma_hat({"kind": "uniform"}, s)
    with pytest.raises(DomainError):
        tables.family_gamma_hat({"kind": "spline"}, s)


def test_seeded_random_families():
    a = tables.table_weights(3, seed=1)[2].gamma_hat
    b = tables.table_weights(3, seed=1)[2].gamma_hat
    c = tables.table_weights(3, seed=2)[2].gamma_hat
    assert np.array_equal(a, b) and not np.array_equal(a, c)


@pytest.mark.parametrize("tid,con,metric,role", [
    (1, "cbc1", 1, "gate"), (1, "cbc2", 2, "gate"), (1, "cbc2c", 1, "loose"), (1, "cbc2c", 3, "report"),
    (1, "cbc1", 2, "report"), (2, "cbc1", 3, "report"), (3, "cbc1", 3, "report"),
    (4, "cbc2c", 1, "report"), (4, "cbc1", 1, "gate"), (4, "cbc2", 2, "report"),
])
def test_cell_roles(tid, con, metric, role):
    assert tables.cell_role(tid, con, metric, 1.0) == role


def test_zero_targets_skipped():
    t = tables._table(1)
    k = t["n"].index(4177051)
    target = t["rows"]["cbc2c:e2"][k]
    assert target == 0.0
    assert tables.cell_role(1, "cbc2c", 2, target) == "skipped"


def test_unknown_table_and_column():
    with pytest.raises(DomainError):
        tables.reproduce(7)
    with pytest.raises(DomainError):
        tables.reproduce(1, ns=[257])


@given(st.sampled_from(PRIMES), st.data())
@settings(max_examples=40, deadline=None)
def test_dimension_two_tie_is_exact(n, data):
    # for any weights, the dimension-2 column takes equal values at z and its inverse
    gh = data.draw(st.lists(st.floats(0.01, 5), min_size=2, max_size=2))
    state = init_state(n, WeightAssignment.product(gh))
    advance(state, 1)
    col = error_column(state)
    for z in range(1, n):
        zi = mod_inverse(z, n)
        assert col[z - 1] == pytest.approx(col[zi - 1], rel=1e-12)
        assert tables.tie_partner(z, n) in (zi, n - zi)
        assert col[tables.tie_partner(z, n) - 1] == pytest.approx(col[z - 1], rel=1e-12)


def test_build_alternate_branch():
    w = tables.table_weights(1)
    g = tables.build(2039, w, "cbc2")
    alt = tables.build(2039, w, "cbc2", alternate=True)
    assert alt.components[1] == tables.tie_partner(g.components[1], 2039)
    assert alt.components[0] == 1
    assert tables.follows_alternate(1, "cbc2", 2039)
    assert not tables.follows_alternate(1, "cbc1", 251)


def test_reproduce_first_column():
    cells = tables.reproduce(1, ns=[251])
    assert len(cells) == 9
    gates = [c for c in cells if c.role == "gate"]
    assert len(gates) == 2 and all(c.passed for c in gates)
    anchor = next(c for c in cells if c.construction == "cbc1" and c.metric == 1)
    assert anchor.computed == pytest.approx(140.44, rel=1e-3)
    assert anchor.to_json()["computed_squared"] == pytest.approx(anchor.computed**2)
    assert tables.qualitative_checks(cells, 1) == []


def test_alternate_branch_reproduces_tie_sensitive_cell():
    # Table 2, N = 2039: the reference cbc(gamma1) value follows the other dimension-2 branch
    cells = {(c.construction, c.metric): c for c in tables.reproduce(2, ns=[2039])}
    cell = cells[("cbc1", 1)]
    assert cell.branch == "alternate" and cell.passed
    w = tables.table_weights(2)
    from cbcrc.wce import squared_wce
    default = math.sqrt(squared_wce(tables.build(2039, w, "cbc1"), w[0]))
    assert abs(default - cell.target) / cell.target > 1e-3
