"""Weight assignments over the nonempty coordinate subsets of {1, ..., s}.

Subsets are given as iterables of 1-based coordinates. Dense vectors over all
``2**s - 1`` subsets are indexed by ``mask - 1`` where bit ``i - 1`` of
``mask`` marks coordinate ``i``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import CapacityError, DomainError, PreconditionError

MAX_GENERAL_DIM = 16


def subset_mask(u, s):
    """Bitmask of the subset ``u`` of {1, ..., s}."""
    mask = 0
    for i in u:
        i = int(i)
        if not 1 <= i <= s:
            raise DomainError(f"coordinate {i} outside 1..{s}")
        mask |= 1 << (i - 1)
    if mask == 0:
        raise DomainError("the empty subset carries no weight")
    return mask


def mask_subset(mask):
    """Ascending coordinates encoded by ``mask``."""
    out, i = [], 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcounts(s):
    """``|u|`` for every nonempty subset, in mask order."""
    masks = np.arange(1, 2**s, dtype=np.int64)
    counts = np.zeros_like(masks)
    for i in range(s):
        counts += (masks >> i) & 1
    return counts


def _check_dense_dim(s):
    if s > MAX_GENERAL_DIM:
        raise CapacityError(f"dense subset vectors need s <= {MAX_GENERAL_DIM}, got s = {s}")


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightAssignment:
    """Nonnegative weights ``gamma_u``.

    Product form stores ``gamma_u = scale * prod_{i in u} gamma_hat[i]`` and
    works for any ``s``; general form stores every ``gamma_u`` and is limited
    to ``s <= 16``. Build instances with :meth:`product` or :meth:`general`.
    """

    form: str
    dimension: int
    gamma_hat: np.ndarray = None
    scale: float = 1.0
    values: np.ndarray = None

    @classmethod
    def product(cls, gamma_hat, scale=1.0):
        gh = _frozen(gamma_hat)
        if gh.ndim != 1 or gh.size == 0:
            raise DomainError("gamma_hat must be a non-empty sequence")
        if not np.all(np.isfinite(gh)) or np.any(gh < 0):
            raise DomainError("product weights must be finite and nonnegative")
        if not (math.isfinite(scale) and scale >= 0):
            raise DomainError("scale must be finite and nonnegative")
        return cls(form="product", dimension=gh.size, gamma_hat=gh, scale=float(scale))

    @classmethod
    def general(cls, entries, s):
        """From a mapping ``subset -> gamma_u``; missing subsets get weight 0.

        Keys may be iterables of coordinates or strings like ``"1,3"``.
        """
        _check_dense_dim(s)
        vec = np.zeros(2**s - 1)
        for key, val in entries.items():
            if isinstance(key, str):
                key = [int(t) for t in key.split(",") if t.strip()]
            vec[subset_mask(key, s) - 1] = val
        return cls.from_vector(vec, s)

    @classmethod
    def from_vector(cls, vec, s):
        _check_dense_dim(s)
        v = _frozen(vec)
        if v.shape != (2**s - 1,):
            raise DomainError(f"expected {2**s - 1} subset weights, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DomainError("weights must be finite and nonnegative")
        return cls(form="general", dimension=s, values=v)

    @property
    def is_product(self):
        return self.form == "product"

    def weight_of(self, u):
        mask = subset_mask(u, self.dimension)
        if self.is_product:
            return self.scale * math.prod(float(self.gamma_hat[i - 1]) for i in mask_subset(mask))
        return float(self.values[mask - 1])

    def vector(self):
        """All ``2**s - 1`` weights in mask order."""
        if not self.is_product:
            return self.values
        _check_dense_dim(self.dimension)
        vec = np.ones(1)
        for g in self.gamma_hat:
            # masks with the new top bit follow all masks without it
            vec = np.concatenate([vec, vec * g])
        out = vec[1:] * self.scale
        out.setflags(write=False)
        return out

    def scaled(self, alpha):
        if alpha < 0 or not math.isfinite(alpha):
            raise DomainError("scaling factor must be finite and nonnegative")
        if self.is_product:
            return WeightAssignment.product(self.gamma_hat, self.scale * alpha)
        return WeightAssignment.from_vector(self.values * alpha, self.dimension)

    def to_json(self):
        if self.is_product:
            doc = {"s": self.dimension, "form": "product", "gamma_hat": self.gamma_hat.tolist()}
            if self.scale != 1.0:
                doc["scale"] = self.scale
            return doc
        entries = {
            ",".join(map(str, mask_subset(m + 1))): float(v)
            for m, v in enumerate(self.values)
            if v != 0
        }
        return {"s": self.dimension, "form": "general", "entries": entries}

    @classmethod
    def from_json(cls, doc):
        try:
            form, s = doc["form"], int(doc["s"])
            if form == "product":
                w = cls.product(doc["gamma_hat"], doc.get("scale", 1.0))
                if w.dimension != s:
                    raise DomainError(f"'s' is {s} but gamma_hat has {w.dimension} entries")
                return w
            if form == "general":
                return cls.general(doc["entries"], s)
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed weight document: {exc!r}") from exc
        raise DomainError(f"unknown weight form {form!r}")


@dataclass(frozen=True, eq=False)
class RandomWeightModel:
    """Means and standard deviations of independent random weights."""

    mean: WeightAssignment
    std: WeightAssignment

    def __post_init__(self):
        if self.mean.dimension != self.std.dimension:
            raise DomainError("mean and std weights must share the dimension")

    @classmethod
    def product(cls, mean_hat, std_hat, mean_scale=1.0, std_scale=1.0):
        return cls(
            WeightAssignment.product(mean_hat, mean_scale),
            WeightAssignment.product(std_hat, std_scale),
        )

    @property
    def dimension(self):
        return self.mean.dimension

    def hypothesis_violations(self):
        """Masks with positive mean but zero deviation (dense form only)."""
        mean, std = self.mean.vector(), self.std.vector()
        return [int(m) + 1 for m in np.flatnonzero((mean > 0) & (std == 0))]


def _check_same_dim(weights):
    dims = {w.dimension for w in weights}
    if len(dims) != 1:
        raise DomainError(f"weight assignments disagree on the dimension: {sorted(dims)}")
    return dims.pop()


def linear_combination(weights, lambdas):
    """General-form weights ``sum_w lambdas[w] * weights[w]``.

    The result is always general form: a sum of product weights is not a
    product weight.
    """
    weights = list(weights)
    lambdas = [float(x) for x in lambdas]
    if not weights or len(weights) != len(lambdas):
        raise DomainError("need one coefficient per weight assignment")
    if any(x < 0 or not math.isfinite(x) for x in lambdas):
        raise DomainError("coefficients must be finite and nonnegative")
    s = _check_same_dim(weights)
    _check_dense_dim(s)
    vec = sum(lam * w.vector() for lam, w in zip(lambdas, weights))
    return WeightAssignment.from_vector(vec, s)


def normalize_weights(w, x_value, epsilon):
    """Scale ``w`` by ``epsilon / x_value``."""
    if not (x_value > 0 and epsilon > 0):
        raise DomainError("x_value and epsilon must be positive")
    return w.scaled(epsilon / x_value)


def holder_ratio(mean, std):
    """``sqrt(sum over sigma_u > 0 of mean_u**2 / sigma_u**2)``.

    Raises :class:`PreconditionError` if some subset has positive mean and
    zero deviation.
    """
    s = _check_same_dim([mean, std])
    if mean.is_product and std.is_product:
        if mean.scale == 0:
            return 0.0
        if std.scale == 0:
            raise PreconditionError("all deviations are zero but some means are positive")
        log_terms = []
        for i, (z, y) in enumerate(zip(mean.gamma_hat, std.gamma_hat), start=1):
            if y == 0:
                if z > 0:
                    raise PreconditionError(f"subset {(i,)} has positive mean weight but zero deviation")
                continue
            log_terms.append(math.log1p((z / y) ** 2))
        total = math.expm1(math.fsum(log_terms)) * (mean.scale / std.scale) ** 2
        return math.sqrt(total)
    m, sd = mean.vector(), std.vector()
    bad = np.flatnonzero((m > 0) & (sd == 0))
    if bad.size:
        raise PreconditionError(
            f"subset {mask_subset(int(bad[0]) + 1)} has positive mean weight but zero deviation"
        )
    pos = sd > 0
    return math.sqrt(math.fsum((m[pos] / sd[pos]) ** 2))


SAMPLING_FAMILIES = ("uniform", "lognormal")


def sample_subset_weights(model, m, family, rng):
    """``m`` independent draws of all ``2**s - 1`` weights, shape ``(m, 2**s - 1)``.

    Each ``gamma_u`` is drawn on its own with the model's mean and deviation:
    ``uniform`` on ``[mean - sqrt(3) std, mean + sqrt(3) std]`` or a
    moment-matched ``lognormal``. Draws stay nonnegative in both cases.
    """
    mean, std = np.asarray(model.mean.vector()), np.asarray(model.std.vector())
    if family == "uniform":
        half = math.sqrt(3.0) * std
        if np.any(half > mean * (1 + 1e-12)):
            raise DomainError("uniform draws would go negative: need std <= mean / sqrt(3)")
        return mean + half * rng.uniform(-1.0, 1.0, (m, mean.size))
    if family == "lognormal":
        if np.any((mean == 0) & (std > 0)):
            raise DomainError("a lognormal weight with zero mean must have zero deviation")
        pos = mean > 0
        out = np.zeros((m, mean.size))
        var_ln = np.log1p((std[pos] / mean[pos]) ** 2)
        mu_ln = np.log(mean[pos]) - 0.5 * var_ln
        out[:, pos] = rng.lognormal(mu_ln, np.sqrt(var_ln), (m, int(pos.sum())))
        return out
    raise DomainError(f"unknown sampling family {family!r}; choose from {SAMPLING_FAMILIES}")
