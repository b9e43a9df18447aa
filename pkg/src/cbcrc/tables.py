"""Regression targets for the reference s = 100 comparison tables.

Each table compares cbc2c (two constraints, ``c = (2, 2)``) with classical
cbc on either family, evaluating root errors for three weight families.
Targets, tolerances and the cell policy live in ``data/tables.json``.

Cell roles:

``gate``
    classical cbc evaluated on its own deterministic weights; a deviation
    above ``tolerances.gate`` is a regression.
``loose``
    cbc2c on a deterministic constraint family; reported against
    ``tolerances.cbc2c`` but never fails the run.
``report``
    cross-family or random-weight cells, reported without a verdict.
``skipped``
    reference target is exactly zero (underflow in the reference run).
"""

from dataclasses import dataclass
from functools import lru_cache
import json
import math
from importlib import resources

import numpy as np

from .constructor import ConstraintSpec, construct
from .errors import DomainError
from .numtheory import mod_inverse
from .wce import squared_wce
from .weights import WeightAssignment

CONSTRUCTIONS = ("cbc2c", "cbc1", "cbc2")


@lru_cache(maxsize=1)
def load_tables():
    with resources.files("cbcrc").joinpath("data/tables.json").open() as fh:
        return json.load(fh)


def table_ids():
    return sorted(load_tables()["tables"], key=int)


def _table(table_id):
    doc = load_tables()["tables"]
    key = str(table_id)
    if key not in doc:
        raise DomainError(f"unknown table {table_id!r}; choose from {table_ids()}")
    return doc[key]


def family_gamma_hat(desc, s, rng=None):
    """``gamma_hat_j`` for ``j = 1..s`` from a family description."""
    j = np.arange(1, s + 1, dtype=float)
    kind = desc["kind"]
    if kind == "constant":
        return np.full(s, float(desc["value"]))
    if kind == "geometric":
        return float(desc["base"]) ** -j
    if kind == "power":
        return j ** -float(desc["p"])
    if kind == "reverse_power":
        return (s - j + 1) ** -float(desc["p"])
    if kind == "uniform":
        if rng is None:
            raise DomainError("random weight families need a seeded generator")
        return rng.uniform(0.0, 1.0, s)
    raise DomainError(f"unknown weight family {kind!r}")


def table_weights(table_id, seed=0):
    t, s = _table(table_id), load_tables()["s"]
    rng = np.random.default_rng(seed)
    return [WeightAssignment.product(family_gamma_hat(d, s, rng)) for d in t["weights"]]


def cell_role(table_id, construction, metric, target):
    t = _table(table_id)
    random = {i + 1 for i, d in enumerate(t["weights"]) if d["kind"] == "uniform"}
    random |= set(t.get("report_only_families", []))
    if target == 0:
        return "skipped"
    if construction == "cbc2c":
        built_on = {1, 2}
    else:
        built_on = {int(construction[3:])}
    if built_on & random or metric in random:
        return "report"
    if construction == f"cbc{metric}":
        return "gate"
    if construction == "cbc2c" and metric in built_on:
        return "loose"
    return "report"


def tie_partner(z, n):
    """The other member of the exact tie ``z ~ z^-1 (mod n)`` at dimension 2."""
    w = mod_inverse(z, n)
    return min(w, n - w)


def follows_alternate(table_id, construction, n):
    return int(n) in _table(table_id).get("tie_branch", {}).get(construction, [])


def _spec(weights, construction, c):
    if construction == "cbc2c":
        return ConstraintSpec((weights[0], weights[1]), tuple(c))
    return ConstraintSpec.single(weights[int(construction[3:]) - 1], 1.0)


def build(n, weights, construction, alternate=False, c=(2.0, 2.0)):
    """Generating vector for one table construction at ``N = n``.

    With ``alternate`` the dimension-2 tie is resolved to the partner of the
    default choice.
    """
    spec = _spec(weights, construction, c)
    g, _ = construct(n, spec)
    if alternate and g.s >= 2:
        g, _ = construct(n, spec, prefix=(1, tie_partner(g.components[1], n)))
    return g


@dataclass
class Cell:
    table: int
    n: int
    construction: str
    metric: int
    computed: float
    target: float
    role: str
    tolerance: float
    branch: str

    @property
    def rel_dev(self):
        if self.target == 0:
            return math.nan
        return abs(self.computed - self.target) / abs(self.target)

    @property
    def passed(self):
        if self.role not in ("gate", "loose"):
            return None
        return bool(self.rel_dev <= self.tolerance)

    def to_json(self):
        return {
            "table": self.table, "n": self.n, "construction": self.construction,
            "metric": f"e{self.metric}", "computed": self.computed,
            "computed_squared": self.computed**2, "target": self.target,
            "rel_dev": None if math.isnan(self.rel_dev) else self.rel_dev,
            "role": self.role, "tolerance": self.tolerance, "branch": self.branch,
            "passed": self.passed,
        }


def reproduce(table_id, ns=None, seed=0):
    """Compute every cell of a table for the requested ``N`` columns."""
    doc, t = load_tables(), _table(table_id)
    cols = list(t["n"])
    ns = doc["default_n"] if ns is None else [int(n) for n in ns]
    for n in ns:
        if n not in cols:
            raise DomainError(f"table {table_id} has no column N = {n}; columns are {cols}")
    weights = table_weights(table_id, seed)
    tol = doc["tolerances"]
    cells = []
    for n in ns:
        k = cols.index(n)
        for con in CONSTRUCTIONS:
            alt = follows_alternate(table_id, con, n)
            g = build(n, weights, con, alternate=alt, c=doc["c"])
            for metric in (1, 2, 3):
                target = float(t["rows"][f"{con}:e{metric}"][k])
                role = cell_role(table_id, con, metric, target)
                e = math.sqrt(squared_wce(g, weights[metric - 1]))
                cells.append(Cell(int(table_id), n, con, metric, e, target, role,
                                  tol["gate"] if role == "gate" else tol["cbc2c"],
                                  "alternate" if alt else "default"))
    return cells


def qualitative_checks(cells, table_id):
    """For random-weight tables: cbc on the faster-decaying family does worse
    on the random family than cbc2c does (per ``N``)."""
    t = _table(table_id)
    check = t.get("qualitative")
    if not check:
        return []
    out = []
    for n in sorted({c.n for c in cells}):
        get = {(c.construction, c.metric): c.computed for c in cells if c.n == n}
        worse = get[(check["fast"], check["metric"])]
        ref = get[("cbc2c", check["metric"])]
        out.append({"n": n, "fast_decay": worse, "cbc2c": ref, "holds": bool(worse >= ref)})
    return out
