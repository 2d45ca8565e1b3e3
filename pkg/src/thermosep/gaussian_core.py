"""
Symplectic linear algebra for Gaussian covariance matrices.

Everything here works in natural units; the scale of the uncertainty
relation of a covariance matrix is carried by its ``hbar`` attribute.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DimensionMismatchError,
    NotPositiveDefiniteError,
    NotPSDError,
    NotSymmetricError,
    SingularSpectrumError,
    ThermoSepError,
)

#: Absolute tolerance on eigenvalues of difference matrices when deciding ``A >= 0``.
TOL_PSD = 1e-9
#: Tolerance for the uncertainty relation of emitted covariance matrices.
TOL_UNCERTAINTY = 1e-10
TOL_SYMMETRY = 1e-12
TOL_SYMPLECTIC = 1e-10
#: Eigenvalues of a "PSD" input above this (negative) threshold are clamped to zero.
TOL_CLAMP = 1e-12


class Ordering(enum.Enum):
    """Ordering of the canonical coordinates in a phase-space vector."""

    XP_INTERLEAVED = "xp"  # (x1, p1, x2, p2, ...)
    XXPP = "xxpp"  # (x1, ..., xn, p1, ..., pn)


def _as_square(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {a.shape}")
    return a


def _check_symmetric(a, name="matrix"):
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > TOL_SYMMETRY * scale:
        raise NotSymmetricError(f"{name} is not symmetric")


def _readonly(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def xxpp_permutation(n):
    """Index array mapping interleaved coordinates to XXPP order.

    ``a_xxpp = a_xp[np.ix_(perm, perm)]`` with ``perm = xxpp_permutation(n)``.
    """
    return np.concatenate([np.arange(0, 2 * n, 2), np.arange(1, 2 * n, 2)])


def standard_form(n, ordering=Ordering.XXPP):
    """The symplectic form for ``n`` modes in the requested ordering.

    Parameters
    ----------
    n : int
        Number of modes, ``n >= 1``.
    ordering : Ordering
        Coordinate ordering of the returned matrix.

    Returns
    -------
    numpy.ndarray
        ``2n x 2n`` antisymmetric matrix with ``sigma @ sigma == -I``.
    """
    if int(n) != n or n < 1:
        raise ThermoSepError(f"number of modes must be a positive integer, got {n!r}")
    n = int(n)
    if ordering is Ordering.XP_INTERLEAVED:
        return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class CovarianceMatrix:
    """Second moments of a zero-mean Gaussian state.

    ``hbar`` is the scale of the uncertainty relation ``gamma + i hbar/2 sigma >= 0``
    this matrix is measured against; unit-free matrices use ``hbar = 1`` and the
    vacuum-normalised convention (vacuum = identity) uses ``hbar = 2``.
    With ``physical=True`` the uncertainty relation is checked on construction.
    """

    matrix: np.ndarray
    ordering: Ordering = Ordering.XXPP
    hbar: float = 1.0
    physical: bool = field(default=False, compare=False)

    def __post_init__(self):
        a = _as_square(self.matrix, "covariance matrix")
        if a.shape[0] == 0 or a.shape[0] % 2:
            raise DimensionMismatchError(f"covariance matrix must be 2n x 2n, got {a.shape}")
        _check_symmetric(a, "covariance matrix")
        if not isinstance(self.ordering, Ordering):
            object.__setattr__(self, "ordering", Ordering(self.ordering))
        object.__setattr__(self, "matrix", _readonly(0.5 * (a + a.T)))
        if self.hbar <= 0:
            raise ThermoSepError("hbar must be positive")
        if self.physical:
            margin = self.uncertainty_margin()
            if margin < -TOL_UNCERTAINTY:
                raise ThermoSepError(
                    f"covariance matrix violates the uncertainty relation (margin {margin:.3g})"
                )

    @property
    def n_modes(self):
        return self.matrix.shape[0] // 2

    def sigma(self):
        return standard_form(self.n_modes, self.ordering)

    def uncertainty_margin(self):
        """Smallest eigenvalue of the Hermitian matrix ``gamma + i (hbar/2) sigma``."""
        herm = self.matrix + 0.5j * self.hbar * self.sigma()
        return float(np.linalg.eigvalsh(herm)[0])

    def is_physical(self, tol=TOL_UNCERTAINTY):
        return self.uncertainty_margin() >= -tol

    def to(self, ordering):
        return reorder(self, ordering)

    def mode_block(self, j):
        """The 2x2 reduced covariance matrix of mode ``j`` as ``[[xx, xp], [px, pp]]``."""
        idx = _mode_indices(self.n_modes, self.ordering, j)
        return self.matrix[np.ix_(idx, idx)]


def _mode_indices(n, ordering, j):
    if ordering is Ordering.XP_INTERLEAVED:
        return [2 * j, 2 * j + 1]
    return [j, n + j]


@dataclass(frozen=True)
class SymplecticTransform:
    """A real matrix ``S`` with ``S sigma S^T = sigma``."""

    matrix: np.ndarray
    ordering: Ordering = Ordering.XXPP

    def __post_init__(self):
        s = _as_square(self.matrix, "symplectic transform")
        if s.shape[0] == 0 or s.shape[0] % 2:
            raise DimensionMismatchError(f"symplectic transform must be 2n x 2n, got {s.shape}")
        sig = standard_form(s.shape[0] // 2, self.ordering)
        scale = max(1.0, float(np.linalg.norm(s, 2)) ** 2)
        if np.max(np.abs(s @ sig @ s.T - sig)) > TOL_SYMPLECTIC * scale:
            raise ThermoSepError("matrix does not satisfy S sigma S^T = sigma")
        object.__setattr__(self, "matrix", _readonly(s))

    @property
    def n_modes(self):
        return self.matrix.shape[0] // 2

    @classmethod
    def from_orthogonal(cls, o):
        """The point transformation ``x -> O x, p -> O p`` for an orthogonal ``O``."""
        o = _as_square(o, "orthogonal matrix")
        zero = np.zeros_like(o)
        return cls(np.block([[o, zero], [zero, o]]), Ordering.XXPP)

    def to(self, ordering):
        if ordering is self.ordering:
            return self
        perm = xxpp_permutation(self.n_modes)
        if ordering is Ordering.XXPP:
            m = self.matrix[np.ix_(perm, perm)]
        else:
            inv = np.argsort(perm)
            m = self.matrix[np.ix_(inv, inv)]
        return SymplecticTransform(m, ordering)


def reorder(gamma, target_ordering):
    """Express ``gamma`` in ``target_ordering``; a pure permutation similarity."""
    if gamma.ordering is target_ordering:
        return gamma
    perm = xxpp_permutation(gamma.n_modes)
    if target_ordering is Ordering.XXPP:
        idx = perm
    else:
        idx = np.argsort(perm)
    return CovarianceMatrix(
        gamma.matrix[np.ix_(idx, idx)], target_ordering, gamma.hbar, gamma.physical
    )


def symplectic_spectrum(a, ordering=Ordering.XXPP):
    """Symplectic eigenvalues of a positive definite ``2n x 2n`` matrix, descending.

    These are the moduli of the eigenvalues of ``i sigma a``, each pair counted
    once. They are read off the Hermitian matrix ``i L^T sigma L`` with
    ``a = L L^T``, which is similar to ``i sigma a``.
    """
    a = _as_square(a)
    n = a.shape[0] // 2
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("matrix is not positive definite") from None
    herm = 1j * (chol.T @ standard_form(n, ordering) @ chol)
    w = np.linalg.eigvalsh(herm)
    return w[n:][::-1].copy()


def symplectic_eigenvalues(gamma):
    """Symplectic eigenvalues of a covariance matrix in descending order."""
    return symplectic_spectrum(gamma.matrix, gamma.ordering)


def psd_margin(a):
    """Minimum eigenvalue of the symmetric matrix ``a``.

    ``a >= 0`` is declared iff ``psd_margin(a) >= -TOL_PSD``.
    """
    a = _as_square(a)
    _check_symmetric(a)
    return float(np.linalg.eigvalsh(0.5 * (a + a.T))[0])


def is_psd(a, tol=TOL_PSD):
    return psd_margin(a) >= -tol


def apply_symplectic(s, gamma):
    """Return ``S gamma S^T`` as a covariance matrix in the ordering of ``S``."""
    if s.n_modes != gamma.n_modes:
        raise DimensionMismatchError(
            f"transform acts on {s.n_modes} modes, covariance matrix has {gamma.n_modes}"
        )
    g = reorder(gamma, s.ordering).matrix
    m = s.matrix
    return CovarianceMatrix(m @ g @ m.T, s.ordering, gamma.hbar, gamma.physical)


def matrix_function(v, f: Callable[[np.ndarray], np.ndarray]):
    """Apply a scalar function to a symmetric PSD matrix through its eigendecomposition.

    Eigenvalues in ``[-1e-12, 0)`` (relative to the matrix scale) are clamped to
    zero; anything more negative raises :class:`NotPSDError`. ``f`` is called on
    the array of eigenvalues and must return an array of the same shape. A
    non-finite value of ``f`` raises :class:`SingularSpectrumError` naming the
    offending eigenvalue.
    """
    v = _as_square(v, "V")
    _check_symmetric(v, "V")
    w, q = np.linalg.eigh(0.5 * (v + v.T))
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    if w.size and w[0] < -TOL_CLAMP * scale:
        raise NotPSDError(w[0])
    w = np.where(w < 0.0, 0.0, w)
    with np.errstate(all="ignore"):
        fw = np.asarray(f(w), dtype=float)
    if fw.shape != w.shape:
        fw = np.broadcast_to(fw, w.shape)
    bad = ~np.isfinite(fw)
    if np.any(bad):
        raise SingularSpectrumError(w[np.argmax(bad)])
    out = (q * fw) @ q.T
    return 0.5 * (out + out.T)
