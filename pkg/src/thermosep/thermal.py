"""Thermal (Gibbs) covariance matrices in the site basis and the normal-mode basis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ThermoSepError, ZeroModeError
from .gaussian_core import CovarianceMatrix, Ordering, matrix_function

#: Strict positivity gate on the eigenvalues of V for thermal states.
EPS_V = 1e-10
_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class ThermalPoint:
    """Inverse temperature ``beta`` together with the unit constants."""

    beta: float
    hbar: float = 1.0
    k_B: float = 1.0

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ThermoSepError(f"beta must be positive and finite, got {self.beta!r}")
        if not (self.hbar > 0 and self.k_B > 0):
            raise ThermoSepError("hbar and k_B must be positive")

    @classmethod
    def from_temperature(cls, temperature, hbar=1.0, k_B=1.0):
        return cls(1.0 / (k_B * temperature), hbar, k_B)

    @property
    def temperature(self):
        return 1.0 / (self.k_B * self.beta)


def coth(x):
    """``coth`` for positive arguments, safe against overflow and cancellation."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        big = 1.0 + 2.0 / np.expm1(2.0 * x)
        small = 1.0 / x + x / 3.0
    out = np.where(x < _SERIES_CUTOFF, small, big)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ModeBlock:
    """Thermal 2x2 covariance block ``diag(xx, pp)`` of a single normal mode."""

    omega: float
    mass: float
    block: np.ndarray
    unit_free: bool

    @property
    def symplectic_eigenvalue(self):
        return float(math.sqrt(self.block[0, 0] * self.block[1, 1]))


def mode_block(omega, t, mass=1.0, unit_free=False):
    if not omega > 0:
        raise ZeroModeError(f"mode frequency must be positive, got {omega!r}")
    c = coth(0.5 * t.beta * t.hbar * omega)
    if unit_free:
        s = 0.5 * c
        block = np.diag([s, s])
    else:
        block = np.diag([t.hbar * c / (2.0 * mass * omega), 0.5 * mass * t.hbar * omega * c])
    block.setflags(write=False)
    return ModeBlock(float(omega), float(mass), block, unit_free)


def thermal_cm(pot, t):
    """Site-basis thermal covariance matrix of ``sum p^2/2m + m/2 x^T V x``.

    Returns the XXPP matrix ``gamma_x (+) gamma_p`` with

        gamma_x = hbar/(2m) V^{-1/2} coth(beta hbar V^{1/2} / 2)
        gamma_p = m hbar/2  V^{1/2}  coth(beta hbar V^{1/2} / 2)

    Raises :class:`ZeroModeError` if ``V`` has an eigenvalue ``<= 1e-10``: a free
    mode (e.g. the centre of mass of an untrapped ring) has no thermal state.
    """
    lam_min = float(np.linalg.eigvalsh(pot.v)[0])
    if lam_min <= EPS_V:
        raise ZeroModeError(
            f"potential has a zero mode (eigenvalue {lam_min:.3g}); a free centre of mass "
            "has no thermal state, add an on-site trap"
        )
    m, hb, beta = pot.mass, t.hbar, t.beta

    def fx(lam):
        w = np.sqrt(lam)
        return hb / (2.0 * m) * coth(0.5 * beta * hb * w) / w

    def fp(lam):
        w = np.sqrt(lam)
        return 0.5 * m * hb * w * coth(0.5 * beta * hb * w)

    gx = matrix_function(pot.v, fx)
    gp = matrix_function(pot.v, fp)
    zero = np.zeros_like(gx)
    return CovarianceMatrix(np.block([[gx, zero], [zero, gp]]), Ordering.XXPP, hb, physical=True)


def normal_mode_cm(spectrum, t, unit_free=False, mass=1.0):
    """Direct sum of thermal mode blocks, one per frequency, in XXPP order.

    With ``unit_free=True`` each mode contributes ``diag(s, s)`` with
    ``s = coth(beta hbar omega / 2) / 2``, the length unit of each mode being
    chosen so that both variances agree; the result is then measured against
    ``hbar = 1``.
    """
    blocks = [mode_block(w, t, mass, unit_free) for w in spectrum.frequencies]
    xx = [b.block[0, 0] for b in blocks]
    pp = [b.block[1, 1] for b in blocks]
    hbar = 1.0 if unit_free else t.hbar
    return CovarianceMatrix(np.diag(xx + pp), Ordering.XXPP, hbar, physical=True)


def eta_block(omega0, mass=1.0, hbar=1.0):
    """Minimal-uncertainty single-mode CM ``diag(hbar/(2 m w0), m hbar w0/2)``."""
    if not omega0 > 0:
        raise ThermoSepError(f"comparator frequency must be positive, got {omega0!r}")
    return CovarianceMatrix(
        np.diag([hbar / (2.0 * mass * omega0), 0.5 * mass * hbar * omega0]),
        Ordering.XXPP,
        hbar,
        physical=True,
    )
