"""Component-by-component construction with r simultaneous weight constraints.

For every dimension ``j >= 2`` each constraint ``w`` keeps the ``K_w``
candidates ``z`` with the smallest squared error for its weights; the new
component is taken from the intersection of these candidate sets. Classical
cbc is the single-constraint case with ``c = 1``.
"""

from dataclasses import dataclass, field
import math
import time
import warnings

import numpy as np

from .errors import DomainError, FastPathUnsupported, InfeasibleError
from .fastcbc import CirculantKernel, init_state
from .numtheory import Modulus
from .wce import GeneratingVector, squared_wce
from .weights import MAX_GENERAL_DIM

# Column entries closer than this (relative to the column's largest magnitude)
# count as ties; both the FFT and the direct path resolve them alike.
TIE_RTOL = 1e-12
STRATEGIES = ("first-constraint-min", "lexicographic-min")


def _inv(c):
    return 0.0 if math.isinf(c) else 1.0 / c


@dataclass(frozen=True, eq=False)
class ConstraintSpec:
    """Weight families and budget factors, stored sorted by ``c`` ascending.

    ``order[k]`` is the position in the caller's input of stored constraint ``k``.
    """

    weights: tuple
    c: tuple
    order: tuple = field(default=None)

    def __post_init__(self):
        ws, cs = tuple(self.weights), tuple(float(x) for x in self.c)
        if not ws or len(ws) != len(cs):
            raise DomainError("need one budget factor c per weight family")
        if any(not (x >= 1) for x in cs):
            raise DomainError(f"budget factors must satisfy c >= 1, got {cs}")
        total = math.fsum(_inv(x) for x in cs)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"sum of 1/c must equal 1, got {total!r}")
        dims = {w.dimension for w in ws}
        if len(dims) != 1:
            raise DomainError(f"weight families disagree on the dimension: {sorted(dims)}")
        if self.order is None:
            order = tuple(sorted(range(len(cs)), key=lambda k: cs[k]))
            ws = tuple(ws[k] for k in order)
            cs = tuple(cs[k] for k in order)
        else:
            order = tuple(self.order)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "c", cs)
        object.__setattr__(self, "order", order)
        self._check_independence()

    @classmethod
    def single(cls, weights, c=1.0):
        return cls((weights,), (c,))

    @property
    def r(self):
        return len(self.weights)

    @property
    def dimension(self):
        return self.weights[0].dimension

    def _check_independence(self):
        if self.r < 2 or self.dimension > MAX_GENERAL_DIM:
            return
        mat = np.array([w.vector() for w in self.weights])
        # unit rows so the verdict does not depend on how each family is scaled
        norms = np.linalg.norm(mat, axis=1, keepdims=True)
        mat = np.divide(mat, norms, out=np.zeros_like(mat), where=norms > 0)
        if np.linalg.matrix_rank(mat) < self.r:
            msg = "weight families are linearly dependent"
            if all(w.is_product for w in self.weights):
                warnings.warn(msg, stacklevel=3)
            else:
                raise DomainError(msg)

    def scaled(self, factors):
        """Same spec with each family multiplied by a positive factor."""
        return ConstraintSpec(
            tuple(w.scaled(a) for w, a in zip(self.weights, factors)), self.c, self.order
        )


@dataclass
class StepRecord:
    j: int
    thresholds: tuple
    candidate_counts: tuple
    intersection_size: int
    g: int
    errors: tuple


@dataclass
class ConstructionTrace:
    """Per-dimension record of a construction (constraints in stored order)."""

    steps: list = field(default_factory=list)
    fast_path: bool = True
    wall_time: float = 0.0

    def final_errors(self):
        return self.steps[-1].errors if self.steps else ()


def candidate_threshold(n, c):
    """``K = min(floor((N-1)(1 - 1/c)) + 1, N-1)``, the candidates kept for budget ``c``."""
    n = int(n)
    if n < 2:
        raise DomainError("N must be at least 2")
    c = float(c)
    if not c >= 1:
        raise DomainError(f"budget factor must be >= 1, got {c}")
    if math.isinf(c):
        return n - 1
    return min(math.floor((n - 1) * (1.0 - 1.0 / c)) + 1, n - 1)


def rank_order(column, atol=0.0):
    """Candidates ``z = 1..len(column)`` from best to worst.

    Values within ``atol`` of their sorted neighbour are tied, and ties go to
    the smaller ``z``.
    """
    col = np.asarray(column, dtype=float)
    z = np.arange(1, col.size + 1)
    order = np.lexsort((z, col))
    if atol > 0 and col.size > 1:
        gaps = np.diff(col[order]) > atol
        cluster = np.concatenate(([0], np.cumsum(gaps)))
        order = order[np.lexsort((order, cluster))]
    return z[order]


def rank_select(column, k, atol=0.0):
    """The ``k`` best candidates (ascending ``z``)."""
    m = len(column)
    if not 1 <= k <= m:
        raise DomainError(f"K must lie in 1..{m}, got {k}")
    return np.sort(rank_order(column, atol)[:k])


def _tie_tol(column):
    return TIE_RTOL * float(np.max(np.abs(column)))


def construct(n, spec, strategy="first-constraint-min", fast=None, prefix=(1,)):
    """Build ``g`` with ``g_1 = 1`` and return ``(GeneratingVector, ConstructionTrace)``.

    ``fast=None`` uses the FFT engine whenever ``N`` is prime and falls back
    to direct O(N^2) columns otherwise (with a warning). ``prefix`` fixes the
    leading components and the search continues from there; it is used to
    follow the other branch of an exact tie.
    """
    if strategy not in STRATEGIES:
        raise DomainError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    modulus = Modulus.of(n)
    s = spec.dimension
    t0 = time.perf_counter()
    trace = ConstructionTrace()
    prefix = tuple(int(z) for z in prefix)
    if not 1 <= len(prefix) <= s or any(not 1 <= z < max(modulus.N, 2) for z in prefix):
        raise DomainError(f"prefix must hold 1..{s} components in 1..{modulus.N - 1}")
    if modulus.N == 2 or s == 1:
        # nothing to search: every component must be 1
        g = GeneratingVector(modulus, prefix + (1,) * (s - len(prefix)))
        trace.steps.append(StepRecord(s, (), (), 0, 1, tuple(squared_wce(g, w) for w in spec.weights)))
        trace.wall_time = time.perf_counter() - t0
        return g, trace
    use_fast = modulus.is_prime if fast is None else bool(fast)
    if use_fast and not modulus.is_prime:
        raise FastPathUnsupported(f"N = {modulus.N} is not prime")
    if not use_fast and fast is None:
        warnings.warn(f"N = {modulus.N} is composite; using the O(N^2) search", stacklevel=2)
    trace.fast_path = use_fast
    kernel = CirculantKernel(modulus.N) if use_fast else None
    states = [init_state(modulus, w, fast=use_fast, kernel=kernel) for w in spec.weights]
    thresholds = tuple(candidate_threshold(modulus.N, c) for c in spec.c)

    for j, z in enumerate(prefix, start=1):
        for st in states:
            st.advance(z)
        trace.steps.append(StepRecord(j, thresholds, (), 0, z, tuple(st.e2 for st in states)))

    m = modulus.N - 1
    for j in range(len(prefix) + 1, s + 1):
        columns = [st.error_column() for st in states]
        orders = [rank_order(col, _tie_tol(col)) for col in columns]
        member = np.ones(m + 1, dtype=bool)
        member[0] = False
        for order, k in zip(orders, thresholds):
            mask = np.zeros(m + 1, dtype=bool)
            mask[order[:k]] = True
            member &= mask
        if not member.any():
            raise InfeasibleError(j)
        if strategy == "first-constraint-min":
            z = int(orders[0][np.argmax(member[orders[0]])])
        else:
            z = int(np.argmax(member))
        for st in states:
            st.advance(z)
        trace.steps.append(
            StepRecord(j, thresholds, thresholds, int(member.sum()), z, tuple(st.e2 for st in states))
        )
    g = GeneratingVector(modulus, tuple(states[0].chosen))
    trace.wall_time = time.perf_counter() - t0
    return g, trace


def construct_classic(n, weights, fast=None):
    """Classical cbc: one constraint with ``c = 1`` (pure argmin per dimension)."""
    return construct(n, ConstraintSpec.single(weights, 1.0), fast=fast)


def verify_theorem_bound(g, spec, tau):
    """Check ``e^2(gamma_w) <= tractability_bound(gamma_w, c_w, N, tau)`` per constraint.

    Returns one dict per constraint, in ``spec.weights`` order.
    """
    from .bounds import tractability_bound

    tau = float(tau)
    if not 1.0 <= tau < 2.0:
        raise DomainError(f"tau must lie in [1, 2), got {tau}")
    out = []
    for k, (w, c) in enumerate(zip(spec.weights, spec.c)):
        e2 = squared_wce(g, w)
        bound = tractability_bound(w, c, g.modulus, tau)
        out.append({"constraint": spec.order[k], "c": c, "tau": tau, "e2": e2,
                    "bound": bound, "passed": bool(e2 <= bound)})
    return out
