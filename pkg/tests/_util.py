"""Random test objects shared across test modules."""

import numpy as np

from thermosep.gaussian_core import CovarianceMatrix, Ordering, SymplecticTransform


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def random_symplectic(rng, n, strength=0.5):
    """Product of shears, a local squeezer and an orthogonal point map (XXPP)."""
    eye, zero = np.eye(n), np.zeros((n, n))
    b1 = rng.normal(scale=strength, size=(n, n))
    b2 = rng.normal(scale=strength, size=(n, n))
    lower = np.block([[eye, zero], [0.5 * (b1 + b1.T), eye]])
    upper = np.block([[eye, 0.5 * (b2 + b2.T)], [zero, eye]])
    d = np.exp(rng.normal(scale=strength, size=n))
    squeeze = np.diag(np.concatenate([d, 1.0 / d]))
    o = random_orthogonal(rng, n)
    point = np.block([[o, zero], [zero, o]])
    return SymplecticTransform(point @ squeeze @ upper @ lower, Ordering.XXPP)


def random_physical_cm(rng, n, hbar=1.0, strength=0.5):
    nu = 0.5 * hbar * (1.0 + rng.exponential(size=n))
    s = random_symplectic(rng, n, strength).matrix
    return CovarianceMatrix(s @ np.diag(np.concatenate([nu, nu])) @ s.T, Ordering.XXPP, hbar), np.sort(nu)[::-1]


def random_pd_potential(rng, n, floor=0.1):
    a = rng.normal(size=(n, n))
    return a @ a.T / n + floor * np.eye(n)
