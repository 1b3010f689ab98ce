"""
Complex 2-vector and 2x2-matrix helpers.

Vectors are numpy arrays whose last axis has length 2 and matrices have
trailing shape ``(2, 2)`` (row-major). Every function broadcasts over
leading axes, so a batch of Monte Carlo trials is just an array of shape
``(n, 2)``.
"""

import numpy as np

from .errors import SingularMatrix, ZeroVector

__all__ = ["hermitian_dot", "norm", "normalize", "orthonormal_complement",
           "det2", "matvec", "solve2", "crandn", "random_unit"]


def hermitian_dot(a, b):
    """Return ``a^H b`` along the last axis (conjugate-linear in `a`)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return np.sum(np.conj(a) * b, axis=-1)


def norm(a):
    return np.sqrt(np.sum(np.abs(np.asarray(a)) ** 2, axis=-1))


def normalize(a):
    a = np.asarray(a, dtype=complex)
    n = norm(a)
    if np.any(n == 0):
        raise ZeroVector("cannot normalize a zero vector")
    return a / n[..., None]


def orthonormal_complement(a):
    """
    Unit vector orthogonal to `a`.

    Uses the canonical choice ``(-conj(a1), conj(a0)) / |a|`` so the
    result is deterministic.

    Raises
    ------
    ZeroVector
        If any input vector has zero norm.
    """
    a = np.asarray(a, dtype=complex)
    n = norm(a)
    if np.any(n == 0):
        raise ZeroVector("orthonormal complement of a zero vector")
    v = np.stack([-np.conj(a[..., 1]), np.conj(a[..., 0])], axis=-1)
    return v / n[..., None]


def det2(m):
    m = np.asarray(m, dtype=complex)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def matvec(m, x):
    return np.einsum("...ij,...j->...i", np.asarray(m, dtype=complex),
                     np.asarray(x, dtype=complex))


def singular_mask(m, rtol=1e-14):
    """Boolean mask of matrices with ``|det| <= rtol * max|entry|^2``."""
    m = np.asarray(m, dtype=complex)
    scale = np.max(np.abs(m), axis=(-2, -1)) ** 2
    return np.abs(det2(m)) <= rtol * scale


def solve2(m, rhs):
    """
    Solve ``m x = rhs`` for 2x2 systems by the adjugate formula.

    Parameters
    ----------
    m : array_like, shape (..., 2, 2)
    rhs : array_like, shape (..., 2)

    Raises
    ------
    SingularMatrix
        If ``|det(m)| <= 1e-14 * max|m_ij|^2`` for any matrix in the batch.
    """
    m = np.asarray(m, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    if np.any(singular_mask(m)):
        raise SingularMatrix("2x2 system is singular")
    d = det2(m)
    x0 = m[..., 1, 1] * rhs[..., 0] - m[..., 0, 1] * rhs[..., 1]
    x1 = m[..., 0, 0] * rhs[..., 1] - m[..., 1, 0] * rhs[..., 0]
    return np.stack([x0, x1], axis=-1) / d[..., None]


def crandn(rng, shape, var=1.0):
    """Circularly symmetric CN(0, var) samples (real/imag each N(0, var/2))."""
    s = np.sqrt(np.asarray(var, dtype=float) / 2.0)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return s * z


def random_unit(rng, n=None):
    """Isotropically distributed unit 2-vectors, shape ``(n, 2)`` or ``(2,)``."""
    shape = (2,) if n is None else (n, 2)
    z = crandn(rng, shape)
    return z / norm(z)[..., None]
