"""Per-dimension error columns for component-by-component search.

With coordinates ``g_1..g_{j-1}`` fixed, the squared error of
``(g_1, ..., g_{j-1}, z)`` differs across ``z`` only through

    Psi(z) = sum_{n=1}^{N-1} p_n B2({n z / N}),

where ``p_n = prod_{i<j} (1 + gamma_i B2({n g_i / N}))``. For prime ``N`` the
matrix ``B2({n z / N})`` becomes circulant after reindexing ``n`` and ``z`` by
powers of a primitive root, so all ``N - 1`` values cost one circulant
product, O(N log N).
"""

import math

import numpy as np

from .errors import DomainError, FastPathUnsupported
from .fft import circulant_multiply, circulant_spectrum
from .numtheory import Modulus, mod_inverse, primitive_root
from .wce import b2_residue

_DIRECT_BLOCK_CELLS = 1 << 22


class CirculantKernel:
    """Primitive-root permutations and circulant spectrum for one prime ``N``.

    Depends only on ``N``; one kernel is shared by every constraint and every
    dimension of a construction.
    """

    def __init__(self, n):
        n = int(n)
        self.N = n
        self.v = primitive_root(n)
        self.v_inv = mod_inverse(self.v, n)
        m = n - 1
        powers = np.empty(m, dtype=np.int64)
        inv_powers = np.empty(m, dtype=np.int64)
        a = b = 1
        for k in range(m):
            powers[k] = a
            inv_powers[k] = b
            a = a * self.v % n
            b = b * self.v_inv % n
        self.powers = powers
        self.inv_powers = inv_powers
        self.first_column = b2_residue(powers, n)
        self.spectrum = circulant_spectrum(self.first_column)

    def psi(self, vec):
        """``Psi(z)`` for ``z = 1..N-1`` given ``vec`` indexed by ``n = 0..N-1``."""
        # Psi(v^k) = sum_l C[k, l] vec[v^-l] with C[k, l] = B2({v^(k-l) / N})
        y = circulant_multiply(self.spectrum, vec[self.inv_powers])
        out = np.empty(self.N)
        out[self.powers] = y
        return _symmetrize(out[1:])


def _symmetrize(psi):
    # Psi(z) = Psi(N - z) exactly; enforce it so ties stay ties
    return 0.5 * (psi + psi[::-1])


def psi_direct(vec, n):
    """O(N^2) evaluation of ``Psi(z) = sum_{n=1}^{N-1} vec[n] B2({n z / N})`` for any modulus."""
    rest = np.asarray(vec[1:], dtype=float)
    idx = np.arange(1, n, dtype=np.int64)
    out = np.empty(n - 1)
    block = max(1, _DIRECT_BLOCK_CELLS // n)
    for start in range(0, n - 1, block):
        z = idx[start:start + block]
        out[start:start + block] = b2_residue((z[:, None] * idx[None, :]) % n, n) @ rest
    return out


class CbcState:
    """Accumulator for one weight family during a construction.

    The running product ``p[n] = prod_{i<j} (1 + gamma_i B2({n g_i/N}))`` is
    stored as its excess ``a = p - 1``: the constant part of every sum over
    ``n`` is known in closed form, and only the excess goes through the
    circulant product. ``e2`` is the squared error of the partial vector.
    Only :meth:`advance` mutates.
    """

    def __init__(self, modulus, weights, kernel=None):
        if not weights.is_product:
            raise DomainError("CbcState needs product weights; use GeneralCbcState")
        self.modulus = modulus
        self.weights = weights
        self.kernel = kernel
        self.a = np.zeros(modulus.N)
        self.chosen = []
        self.e2 = 0.0
        self._n = np.arange(modulus.N, dtype=np.int64)
        # gcd(z, N)^2 for z = 1..N-1; all ones for prime N
        z = np.arange(1, modulus.N, dtype=np.int64)
        self._d2 = (np.gcd(z, modulus.N) ** 2).astype(float)

    @property
    def N(self):
        return self.modulus.N

    @property
    def p(self):
        return 1.0 + self.a

    @property
    def dim_built(self):
        return len(self.chosen)

    @property
    def v(self):
        return None if self.kernel is None else self.kernel.v

    @property
    def v_inv(self):
        return None if self.kernel is None else self.kernel.v_inv

    @property
    def spectrum(self):
        return None if self.kernel is None else self.kernel.spectrum

    def _next_index(self):
        j = self.dim_built
        if j >= self.weights.dimension:
            raise DomainError("all coordinates have already been chosen")
        return j

    def search_vector(self):
        """``(const, excess, factor)`` describing the next coordinate's increment.

        ``e2(z) - e2 = factor / N * sum_n (const + excess[n]) B2({n z / N})``.
        """
        j = self._next_index()
        return 1.0, self.a, self.weights.scale * float(self.weights.gamma_hat[j])

    def _psi_excess(self, excess):
        if self.kernel is not None:
            return self.kernel.psi(excess)
        return _symmetrize(psi_direct(excess, self.N))

    def psi(self):
        """``Psi(z) = sum_{n=1}^{N-1} p_n B2({n z / N})`` for ``z = 1..N-1``."""
        const, excess, _ = self.search_vector()
        return const * (self._d2 / (6.0 * self.N) - 1.0 / 6.0) + self._psi_excess(excess)

    def psi_direct(self):
        const, excess, _ = self.search_vector()
        return _symmetrize(psi_direct(const + excess, self.N))

    def error_column(self):
        """Squared error of ``(g_1..g_{j-1}, z)`` for every ``z = 1..N-1``."""
        if self.dim_built == 0:
            raise DomainError("the first component is fixed to 1; there is no column to search")
        const, excess, factor = self.search_vector()
        inner = const * self._d2 / (6.0 * self.N) + excess[0] / 6.0 + self._psi_excess(excess)
        return self.e2 + factor / self.N * inner

    def increment(self, z):
        """Exact O(N) error increment of appending ``z``."""
        const, excess, factor = self.search_vector()
        z = int(z)
        b = b2_residue(self._n * z % self.N, self.N)
        d = math.gcd(z, self.N)
        return factor / self.N * (const * d * d / (6.0 * self.N) + math.fsum(excess * b))

    def _check_z(self, z):
        z = int(z)
        if not 1 <= z <= self.N - 1:
            raise DomainError(f"component {z} outside 1..{self.N - 1}")
        return z

    def advance(self, z):
        z = self._check_z(z)
        self.e2 += self.increment(z)
        j = self._next_index()
        gh = float(self.weights.gamma_hat[j])
        if gh != 0.0:
            x = gh * b2_residue(self._n * z % self.N, self.N)
            self.a = self.a + x * (1.0 + self.a)
        self.chosen.append(z)
        return self

    def recompute_p(self):
        """``p`` rebuilt from ``chosen``, for consistency checks."""
        p = np.ones(self.N)
        for gh, z in zip(self.weights.gamma_hat, self.chosen):
            p *= 1.0 + gh * b2_residue(self._n * z % self.N, self.N)
        return p


class GeneralCbcState(CbcState):
    """Accumulator for general (non-product) weights, ``s <= 16``.

    The search vector for coordinate ``j`` is
    ``q[n] = sum_{v subset of {1..j-1}} gamma_{v + {j}} prod_{i in v} B2({n g_i/N})``,
    split into the constant ``gamma_{{j}}`` and the nonempty-``v`` excess. It
    is rebuilt from the chosen components at each step, O(2^(j-1) N).
    """

    def __init__(self, modulus, weights, kernel=None):
        self.modulus = modulus
        self.weights = weights
        self.kernel = kernel
        self.chosen = []
        self.e2 = 0.0
        self._n = np.arange(modulus.N, dtype=np.int64)
        z = np.arange(1, modulus.N, dtype=np.int64)
        self._d2 = (np.gcd(z, modulus.N) ** 2).astype(float)
        self._vec = np.asarray(weights.vector())

    @property
    def a(self):
        return self.search_vector()[1]

    @property
    def p(self):
        const, excess, _ = self.search_vector()
        return const + excess

    def search_vector(self):
        j = self._next_index()
        top = 1 << j
        gam = self._vec[top - 1:2 * top - 1]  # masks top..2top-1 all contain coordinate j+1
        n = self.N
        q = np.zeros(n)
        if top > 1:
            block = max(1, _DIRECT_BLOCK_CELLS // top)
            for start in range(0, n, block):
                nn = self._n[start:start + block]
                table = np.empty((top, nn.size))
                table[0] = 1.0
                for i, z in enumerate(self.chosen):
                    lo = 1 << i
                    table[lo:2 * lo] = table[:lo] * b2_residue(nn * z % n, n)
                q[start:start + block] = gam[1:] @ table[1:]
        return float(gam[0]), q, 1.0

    def advance(self, z):
        z = self._check_z(z)
        self.e2 += self.increment(z)
        self._next_index()
        self.chosen.append(z)
        return self

    def recompute_p(self):
        return self.p


def init_state(n, weights, fast=True, kernel=None):
    """Fresh accumulator for weights ``weights`` over ``N`` points.

    With ``fast=True`` the modulus must be prime; composite moduli raise
    :class:`FastPathUnsupported` so the caller can fall back to ``fast=False``.
    """
    modulus = Modulus.of(n)
    if modulus.N < 3:
        raise DomainError("N = 2 admits only g = 1; nothing to search")
    if fast:
        if not modulus.is_prime:
            raise FastPathUnsupported(f"N = {modulus.N} is not prime")
        if kernel is None:
            kernel = CirculantKernel(modulus.N)
        elif kernel.N != modulus.N:
            raise DomainError("kernel was built for a different N")
    else:
        kernel = None
    cls = CbcState if weights.is_product else GeneralCbcState
    return cls(modulus, weights, kernel)


def psi_all(state):
    """``Psi(z)`` for ``z = 1..N-1`` (FFT path when the state has a kernel)."""
    return state.psi()


def psi_all_direct(state):
    """O(N^2) reference evaluation of :func:`psi_all`."""
    return state.psi_direct()


def error_column(state):
    return state.error_column()


def advance(state, g_j):
    return state.advance(g_j)
