"""Existence bounds for constructed lattice rules and derived robustness bounds.

For budget ``c`` and any ``1 <= tau < 2`` a vector built by the constrained
search satisfies

    e^2 <= (c/N * sum_u gamma_u^(1/tau) * beta^|u|)^tau,   beta = 2^kappa pi^-2 zeta(2/tau),

with ``kappa`` the number of distinct prime factors of ``N``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError
from .numtheory import Modulus
from .wce import squared_wce
from .weights import holder_ratio, popcounts

ZETA_TERMS = 10_000
# B_2, B_4, B_6, B_8
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0)
TAU_CAP = 2.0 - 1e-6
TAU_GRID_STEP = 0.01
TAU_XTOL = 1e-6
_K = np.arange(1, ZETA_TERMS, dtype=float)


def riemann_zeta(x):
    """``zeta(x)`` for real ``x > 1`` by Euler-Maclaurin summation."""
    x = float(x)
    if not x > 1.0:
        raise DomainError(f"zeta needs x > 1, got {x}")
    m = float(ZETA_TERMS)
    # add small terms first
    head = math.fsum(np.power(_K[::-1], -x))
    tail = [m ** (1.0 - x) / (x - 1.0), 0.5 * m ** -x]
    rising = x  # x (x+1) ... (x+2k-2)
    for k, b in enumerate(_BERNOULLI, start=1):
        tail.append(b / math.factorial(2 * k) * rising * m ** (-x - 2 * k + 1))
        rising *= (x + 2 * k - 1) * (x + 2 * k)
    return head + math.fsum(tail)


def _modulus(n):
    return n if isinstance(n, Modulus) else Modulus.of(n)


def _check_tau(tau):
    tau = float(tau)
    if not 1.0 <= tau < 2.0:
        raise DomainError(f"tau must lie in [1, 2), got {tau}")
    return tau


def _beta(kappa, tau):
    return 2.0**kappa / math.pi**2 * riemann_zeta(2.0 / tau)


def _log_subset_sum(w, tau, beta):
    """``log sum_u gamma_u^(1/tau) beta^|u|`` (``-inf`` for zero weights)."""
    if w.is_product:
        if w.scale == 0:
            return -math.inf
        gh = np.asarray(w.gamma_hat)
        total = math.fsum(np.log1p(np.power(gh, 1.0 / tau) * beta))
        if total == 0:
            return -math.inf
        # log(expm1(t)) without overflow for large t
        log_em1 = math.log(math.expm1(total)) if total < 700 else total + math.log1p(-math.exp(-total))
        return math.log(w.scale) / tau + log_em1
    vals = np.asarray(w.vector())
    pos = vals > 0
    if not pos.any():
        return -math.inf
    sizes = popcounts(w.dimension)[pos]
    logs = np.log(vals[pos]) / tau + sizes * math.log(beta)
    top = logs.max()
    return top + math.log(math.fsum(np.exp(logs - top)))


def _log_bound(w, c, modulus, tau):
    ls = _log_subset_sum(w, tau, _beta(modulus.kappa, tau))
    if ls == -math.inf:
        return -math.inf
    return tau * (math.log(c / modulus.N) + ls)


def _check_c(c):
    c = float(c)
    if not c >= 1.0:
        raise DomainError(f"budget factor must be >= 1, got {c}")
    return c


def _exp(log_value):
    return math.exp(log_value) if log_value < 709.0 else math.inf


def tractability_bound(w, c, n, tau):
    """The bound above for weights ``w``, budget ``c``, modulus ``n`` and ``tau``."""
    tau = _check_tau(tau)
    lb = _log_bound(w, _check_c(c), _modulus(n), tau)
    return _exp(lb)


@dataclass(frozen=True)
class XValue:
    value: float
    tau: float
    at_cap: bool

    def __iter__(self):
        return iter((self.value, self.tau))


def x_value(w, c, n):
    """Infimum of :func:`tractability_bound` over ``tau in [1, 2)``.

    A 0.01 grid (closed by ``2 - 1e-6``) locates the minimum, which bounded
    Brent search then refines to ``1e-6`` in ``tau``.
    """
    c, modulus = _check_c(c), _modulus(n)
    f = lambda t: _log_bound(w, c, modulus, t)
    grid = np.append(np.arange(1.0, 2.0 - TAU_GRID_STEP / 2, TAU_GRID_STEP), TAU_CAP)
    vals = np.array([f(t) for t in grid])
    if np.all(vals == -math.inf):
        return XValue(0.0, 1.0, False)
    i = int(np.argmin(vals))
    best_t, best = float(grid[i]), float(vals[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if hi > lo:
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": TAU_XTOL})
        if res.fun < best:
            best_t, best = float(res.x), float(res.fun)
    return XValue(_exp(best), best_t, best_t >= TAU_CAP - TAU_XTOL)


def combined_bound(model, c, c1, c2, n, tau, tau_prime):
    """``bound(mean, c1, tau) + c * bound(std, c2, tau')``."""
    if not c >= 0:
        raise DomainError("c must be nonnegative")
    c1, c2 = _check_c(c1), _check_c(c2)
    if abs(1.0 / c1 + 1.0 / c2 - 1.0) > 1e-12:
        raise DomainError("c1 and c2 must satisfy 1/c1 + 1/c2 = 1")
    first = tractability_bound(model.mean, c1, n, tau)
    if c == 0:
        return first
    return first + c * tractability_bound(model.std, c2, n, tau_prime)


def chebyshev_probability(c):
    """``c^2 / (1 + c^2)``: lower bound on the chance that ``e^2 <= E + c sd``."""
    c = float(c)
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    return c * c / (1.0 + c * c)


def robustness_bound(model, g, c):
    """``e^2(std weights) * (holder_ratio(mean, std) + c)``."""
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    return squared_wce(g, model.std) * (holder_ratio(model.mean, model.std) + c)


def polytope_bound(x_values, lambdas):
    """``sum_w lambdas[w] * x_values[w]``."""
    x = np.asarray(x_values, dtype=float)
    lam = np.asarray(lambdas, dtype=float)
    if x.shape != lam.shape or x.ndim != 1:
        raise DomainError("x_values and lambdas must have equal lengths")
    if np.any(lam < 0):
        raise DomainError("lambdas must be nonnegative")
    return math.fsum(lam[lam > 0] * x[lam > 0])


@dataclass
class ConstraintBound:
    c: float
    x_value: float
    tau_star: float
    at_cap: bool
    bound_at_tau: dict = field(default_factory=dict)


@dataclass
class BoundReport:
    constraints: list
    chebyshev_c: float
    probability: float

    def to_json(self):
        return {
            "constraints": [
                {"c": b.c, "x_value": b.x_value, "tau_star": b.tau_star, "at_cap": b.at_cap,
                 "bound_at_tau": {f"{t:g}": v for t, v in b.bound_at_tau.items()}}
                for b in self.constraints
            ],
            "chebyshev_c": self.chebyshev_c,
            "probability": self.probability,
        }


def bound_report(spec, n, taus=(1.0, 1.25, 1.5, 1.75), chebyshev_c=1.0):
    """X values and sampled bounds for every constraint of ``spec``."""
    modulus = _modulus(n)
    rows = []
    for w, c in zip(spec.weights, spec.c):
        xv = x_value(w, c, modulus)
        at = {float(t): tractability_bound(w, c, modulus, t) for t in taus}
        rows.append(ConstraintBound(c, xv.value, xv.tau, xv.at_cap, at))
    return BoundReport(rows, float(chebyshev_c), chebyshev_probability(chebyshev_c))


def empirical_coverage(g, model, c, m, family, rng):
    """Fraction of ``m`` sampled weight vectors with ``e^2 <= E + c sd``.

    Returns ``(fraction, threshold, samples_e2)``.
    """
    from .wce import error_profile, wce_expectation, wce_std
    from .weights import sample_subset_weights

    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    threshold = wce_expectation(g, model) + c * wce_std(g, model)
    e2 = sample_subset_weights(model, int(m), family, rng) @ error_profile(g).values
    return float(np.mean(e2 <= threshold)), threshold, e2
