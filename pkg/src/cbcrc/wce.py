"""Squared worst-case error of rank-1 lattice rules and its random-weight statistics.

For a generating vector ``g`` with ``N`` points the squared worst-case error is

    e^2 = sum_{u nonempty} gamma_u * e_u,
    e_u = (1/N) sum_{n=0}^{N-1} prod_{i in u} B2({n g_i / N}),

with ``B2(x) = x^2 - x + 1/6``. Fractional parts are taken from exact integer
residues ``n g_i mod N``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ConsistencyError, DomainError
from .numtheory import Modulus
from .weights import _check_dense_dim, subset_mask

NEGATIVE_CLAMP = 1e-12
_CHUNK_CELLS = 1 << 22


def bernoulli_b2(x):
    """``x**2 - x + 1/6`` for ``0 <= x < 1`` (scalar or array)."""
    a = np.asarray(x, dtype=float)
    if np.any(a < 0) or np.any(a >= 1) or np.any(np.isnan(a)):
        raise DomainError("B2 is evaluated on fractional parts in [0, 1)")
    out = a * a - a + 1.0 / 6.0
    return float(out) if out.ndim == 0 else out


def b2_residue(k, n):
    """``B2(k / n)`` for integer residues ``0 <= k < n``.

    Evaluated as ``k (k - n) / n^2 + 1/6`` with the product in exact integer
    arithmetic, so ``b2_residue(k, n) == b2_residue(n - k, n)`` bit for bit.
    """
    k = np.asarray(k, dtype=np.int64)
    return (k * (k - n)) / float(n * n) + 1.0 / 6.0


@dataclass(frozen=True)
class GeneratingVector:
    """Modulus ``N`` and components ``g_1..g_s`` in {1, ..., N-1}."""

    modulus: Modulus
    components: tuple

    def __post_init__(self):
        comps = tuple(int(c) for c in self.components)
        if not comps:
            raise DomainError("a generating vector needs at least one component")
        n = self.modulus.N
        bad = [c for c in comps if not 1 <= c <= n - 1]
        if bad:
            raise DomainError(f"components {bad} outside 1..{n - 1}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def of(cls, n, components):
        return cls(Modulus.of(n), tuple(components))

    @property
    def N(self):
        return self.modulus.N

    @property
    def s(self):
        return len(self.components)

    def to_json(self):
        return {"n": self.N, "s": self.s, "g": list(self.components)}

    @classmethod
    def from_json(cls, doc):
        try:
            g = cls.of(int(doc["n"]), [int(c) for c in doc["g"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed vector document: {exc!r}") from exc
        if "s" in doc and int(doc["s"]) != g.s:
            raise DomainError(f"'s' is {doc['s']} but {g.s} components were given")
        return g


def b2_rows(g, n_slice=slice(None)):
    """Array ``B2({n g_i / N})`` with shape ``(s, len(n_slice))``."""
    n = np.arange(g.N, dtype=np.int64)[n_slice]
    comps = np.asarray(g.components, dtype=np.int64)
    return b2_residue((comps[:, None] * n[None, :]) % g.N, g.N)


def _clamp(value, what):
    if value < 0:
        if value < -NEGATIVE_CLAMP:
            raise ConsistencyError(f"{what} = {value!r} is negative beyond rounding")
        return 0.0
    return value


def projection_error(g, u):
    """``e_u`` for the subset ``u`` (compensated sum over the points)."""
    mask = subset_mask(u, g.s)
    coords = [i for i in range(g.s) if mask >> i & 1]
    if len(coords) == 1:
        return first_order_sum(g.components[coords[0]], g.N) / g.N
    n = np.arange(g.N, dtype=np.int64)
    prod = np.ones(g.N)
    for i in coords:
        prod *= b2_residue(n * g.components[i] % g.N, g.N)
    return _clamp(math.fsum(prod) / g.N, f"e_{tuple(i + 1 for i in coords)}")


@dataclass(frozen=True, eq=False)
class ErrorProfile:
    """All projection errors ``e_u`` of a generating vector, in mask order."""

    dimension: int
    values: np.ndarray

    def __getitem__(self, u):
        return float(self.values[subset_mask(u, self.dimension) - 1])

    def dot(self, w):
        """``sum_u gamma_u e_u`` for a weight assignment of matching dimension."""
        if w.dimension != self.dimension:
            raise DomainError("weights and profile dimensions differ")
        return math.fsum(np.asarray(w.vector()) * self.values)


def error_profile(g):
    """Every ``e_u``; products over subsets are built incrementally per mask."""
    s = g.s
    _check_dense_dim(s)
    n_sub = 2**s - 1
    chunk = max(1, _CHUNK_CELLS // (n_sub + 1))
    partial = []
    for start in range(0, g.N, chunk):
        rows = b2_rows(g, slice(start, start + chunk))
        table = np.empty((n_sub + 1, rows.shape[1]))
        table[0] = 1.0
        for i in range(s):
            lo = 1 << i
            # masks lo..2lo-1 are the masks below lo extended by coordinate i+1
            table[lo:2 * lo] = table[0:lo] * rows[i]
        partial.append(table[1:].sum(axis=1))
    sums = np.array([math.fsum(col) for col in np.array(partial).T]) if len(partial) > 1 else partial[0]
    values = sums / g.N
    for i, gi in enumerate(g.components):
        # one-coordinate sums cancel badly; use their exact value
        values[(1 << i) - 1] = first_order_sum(gi, g.N) / g.N
    low = values.min()
    if low < -NEGATIVE_CLAMP:
        raise ConsistencyError(f"projection error {low!r} is negative beyond rounding")
    values = np.where(values < 0, 0.0, values)
    values.setflags(write=False)
    return ErrorProfile(dimension=s, values=values)


def first_order_sum(gi, n):
    """``sum_{k=0}^{n-1} B2({k g / n}) = gcd(g, n)^2 / (6 n)``, exactly."""
    d = math.gcd(int(gi), int(n))
    return d * d / (6.0 * n)


def _higher_order_terms(g, w):
    """Per-point ``prod_i (1 + x_i) - 1 - sum_i x_i`` with ``x_i = gamma_i B2({n g_i / N})``.

    Built by ``R += x A; A += x (1 + A)`` where ``A`` is the running
    ``prod - 1``; no step subtracts nearly equal numbers.
    """
    if w.dimension != g.s:
        raise DomainError(f"weights have dimension {w.dimension} but the vector has {g.s}")
    n = np.arange(g.N, dtype=np.int64)
    a = np.zeros(g.N)
    r = np.zeros(g.N)
    for gi, gh in zip(g.components, w.gamma_hat):
        if gh == 0:
            continue
        x = gh * b2_residue(n * gi % g.N, g.N)
        r += x * a
        a += x * (1.0 + a)
    return r


def squared_wce(g, w):
    """Squared worst-case error of ``g`` for weights ``w``.

    Product weights use the O(sN) form ``(1/N) sum_n prod_i (1 + gamma_i B2) - 1``,
    with the first-order part summed in closed form; general weights go
    through :func:`error_profile`.
    """
    if w.is_product:
        first = math.fsum(
            float(gh) * first_order_sum(gi, g.N) for gi, gh in zip(g.components, w.gamma_hat)
        )
        value = w.scale * (first + math.fsum(_higher_order_terms(g, w))) / g.N
        return _clamp(value, "squared worst-case error")
    if w.dimension != g.s:
        raise DomainError(f"weights have dimension {w.dimension} but the vector has {g.s}")
    return error_profile(g).dot(w)


def wce_expectation(g, model):
    """Expected squared error under random weights: the error at the mean weights."""
    return squared_wce(g, model.mean)


def wce_variance(g, model):
    """``sum_u (sigma_u e_u)^2``; needs the full profile, so ``s <= 16``."""
    if model.dimension != g.s:
        raise DomainError("model and vector dimensions differ")
    prof = error_profile(g)
    return math.fsum((np.asarray(model.std.vector()) * prof.values) ** 2)


def wce_std(g, model):
    return math.sqrt(wce_variance(g, model))
