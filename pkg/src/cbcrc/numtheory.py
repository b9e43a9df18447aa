"""Integer helpers for the fast construction: primality, factors, primitive roots."""

from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt
import random

from .errors import DomainError

# Deterministic for every n < 3.3e24, in particular all 64-bit inputs.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_TRIAL_LIMIT = 10**6


def _check_int(n, lower, name="n"):
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"{name} must be an integer, got {n!r}")
    n = int(n)
    if n < lower:
        raise DomainError(f"{name} must be >= {lower}, got {n}")
    return n


def is_prime(n):
    """Deterministic Miller-Rabin primality test."""
    n = _check_int(n, 2)
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n):
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    while True:
        c = rng.randrange(1, n)
        f = lambda x: (x * x + c) % n
        x = y = rng.randrange(2, n)
        d = 1
        while d == 1:
            x = f(x)
            y = f(f(y))
            d = gcd(abs(x - y), n)
        if d != n:
            return d


def _factor_into(n, out):
    if n == 1:
        return
    if is_prime(n):
        out.add(n)
        return
    d = _pollard_rho(n)
    _factor_into(d, out)
    _factor_into(n // d, out)


@lru_cache(maxsize=256)
def prime_factors(n):
    """Sorted tuple of the distinct primes dividing ``n``."""
    n = _check_int(n, 2)
    found = set()
    p = 2
    limit = min(isqrt(n), _TRIAL_LIMIT)
    while p <= limit:
        if n % p == 0:
            found.add(p)
            while n % p == 0:
                n //= p
            limit = min(isqrt(n), _TRIAL_LIMIT)
        p += 1 if p == 2 else 2
    if n > 1:
        _factor_into(n, found)
    return tuple(sorted(found))


def distinct_prime_factor_count(n):
    """Number of distinct primes dividing ``n`` (the kappa of the bounds)."""
    return len(prime_factors(n))


def mod_pow(base, exp, m):
    """``base**exp mod m`` on Python integers (no overflow)."""
    m = _check_int(m, 2, "m")
    exp = _check_int(exp, 0, "exp")
    return pow(int(base), exp, m)


def mod_inverse(v, n):
    """Multiplicative inverse of ``v`` modulo ``n``."""
    n = _check_int(n, 2)
    if gcd(int(v), n) != 1:
        raise DomainError(f"{v} is not invertible modulo {n}")
    return pow(int(v), -1, n)


@lru_cache(maxsize=256)
def primitive_root(n):
    """Smallest generator of the multiplicative group modulo the prime ``n``."""
    n = _check_int(n, 3)
    if not is_prime(n):
        raise DomainError(f"{n} is not prime")
    cofactors = [(n - 1) // q for q in prime_factors(n - 1)]
    for v in range(2, n):
        if all(pow(v, e, n) != 1 for e in cofactors):
            return v
    raise AssertionError("unreachable: every prime has a primitive root")


def multiplicative_order(v, n):
    """Order of ``v`` in (Z/nZ)^*, by direct iteration. Intended for small n."""
    if gcd(v, n) != 1:
        raise DomainError(f"{v} is not a unit modulo {n}")
    k, x = 1, v % n
    while x != 1:
        x = x * v % n
        k += 1
    return k


@dataclass(frozen=True)
class Modulus:
    """Number of lattice points together with its arithmetic data."""

    N: int
    kappa: int
    is_prime: bool

    @classmethod
    def of(cls, n):
        if isinstance(n, Modulus):
            return n
        n = _check_int(n, 2, "N")
        return cls(N=n, kappa=distinct_prime_factor_count(n), is_prime=is_prime(n))

    def __int__(self):
        return self.N
