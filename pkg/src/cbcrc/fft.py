"""Arbitrary-length DFTs and circulant matrix-vector products.

Transforms are delegated to ``numpy.fft`` (pocketfft), which handles every
length in O(M log M): mixed radix for smooth factors and Bluestein's chirp-z
algorithm for large prime factors. Convention: unnormalized forward
transform, ``1/M`` on the inverse.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


def _as_sequence(x):
    x = np.asarray(x)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("expected a non-empty one-dimensional sequence")
    return x


def fft_forward(x):
    """Unnormalized DFT, ``X[k] = sum_l x[l] exp(-2 pi i k l / M)``."""
    return np.fft.fft(_as_sequence(x).astype(complex, copy=False))


def fft_inverse(x):
    """Inverse DFT, ``x[l] = (1/M) sum_k X[k] exp(2 pi i k l / M)``."""
    return np.fft.ifft(_as_sequence(x).astype(complex, copy=False))


@dataclass(frozen=True)
class CirculantSpectrum:
    """Eigenvalues of a real circulant matrix, i.e. the DFT of its first column.

    The circulant is ``C[k, l] = column[(k - l) mod M]``.
    """

    eigenvalues: np.ndarray
    size: int
    _half: np.ndarray = field(repr=False, compare=False)


def circulant_spectrum(first_column):
    """Precompute the spectrum of the circulant generated by ``first_column``."""
    col = _as_sequence(first_column).astype(float)
    eig = fft_forward(col)
    eig.setflags(write=False)
    half = np.fft.rfft(col)
    half.setflags(write=False)
    return CirculantSpectrum(eigenvalues=eig, size=col.size, _half=half)


def circulant_multiply(spec, x):
    """Return ``C @ x`` in O(M log M) using the precomputed spectrum.

    The first column and ``x`` are real, so the product is formed with real
    transforms and carries no imaginary residue.
    """
    x = _as_sequence(x)
    if x.size != spec.size:
        raise DomainError(f"length {x.size} does not match circulant size {spec.size}")
    if np.iscomplexobj(x):
        return fft_inverse(spec.eigenvalues * fft_forward(x))
    return np.fft.irfft(spec._half * np.fft.rfft(x), n=spec.size)


def circulant_matrix(first_column):
    """Dense circulant, for testing and tiny sizes."""
    col = np.asarray(first_column, dtype=float)
    m = col.size
    idx = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m
    return col[idx]
