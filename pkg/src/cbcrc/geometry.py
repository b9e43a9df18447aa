"""Simplices ``Gamma(z, eps) = {y >= 0 : y . z <= eps}`` over subset-indexed vectors.

The error profile of a constructed rule lies in ``Gamma(gamma_w, X_w)`` for
every constraint ``w``; since the test is the same dot product,
``e in Gamma(gamma, b)`` holds exactly when ``gamma in Gamma(e, b)``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError
from .weights import MAX_GENERAL_DIM

SLACK = 1e-12


def _as_vector(x):
    if hasattr(x, "vector"):
        return np.asarray(x.vector(), dtype=float)
    if hasattr(x, "values"):
        return np.asarray(x.values, dtype=float)
    return np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class Simplex:
    normal: np.ndarray
    epsilon: float

    def __post_init__(self):
        z = _as_vector(self.normal)
        if z.ndim != 1 or np.any(z < 0) or not np.all(np.isfinite(z)):
            raise DomainError("the normal must be a finite nonnegative vector")
        if z.size > 2**MAX_GENERAL_DIM - 1:
            raise DomainError(f"simplices are limited to s <= {MAX_GENERAL_DIM}")
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        object.__setattr__(self, "normal", z)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    def vertices(self):
        """Origin plus ``(eps / z_i) e_i`` for each ``z_i > 0``."""
        out = [np.zeros(self.normal.size)]
        for i in np.flatnonzero(self.normal > 0):
            v = np.zeros(self.normal.size)
            v[i] = self.epsilon / self.normal[i]
            out.append(v)
        return out


def _halfspace(y, z, eps):
    if y.shape != z.shape:
        raise DomainError(f"dimension mismatch: {y.size} vs {z.size}")
    if np.any(y < 0):
        return False
    return math.fsum(y * z) <= eps * (1.0 + SLACK)


def simplex_contains(sx, y):
    return _halfspace(_as_vector(y), sx.normal, sx.epsilon)


def intersection_membership(e_prof, spec, x_values):
    """Whether ``e_prof`` lies in ``Gamma(gamma_w, X_w)`` for every constraint."""
    if len(x_values) != spec.r:
        raise DomainError("need one X value per constraint")
    return all(
        simplex_contains(Simplex(w, x), e_prof) for w, x in zip(spec.weights, x_values)
    )


def dual_membership(e_prof, w, bound):
    """Whether the weights ``w`` lie in ``Gamma(e_prof, bound)``."""
    if not bound > 0:
        raise DomainError("bound must be positive")
    return _halfspace(_as_vector(w), _as_vector(e_prof), float(bound))


def smallest_epsilon(e_prof, weight_list):
    """``max_w e . gamma_w``: the least ``eps`` with every ``gamma_w`` in ``Gamma(e, eps)``."""
    weight_list = list(weight_list)
    if not weight_list:
        raise DomainError("need at least one weight assignment")
    e = _as_vector(e_prof)
    out = -math.inf
    for w in weight_list:
        v = _as_vector(w)
        if v.shape != e.shape:
            raise DomainError(f"dimension mismatch: {v.size} vs {e.size}")
        out = max(out, math.fsum(v * e))
    return out
