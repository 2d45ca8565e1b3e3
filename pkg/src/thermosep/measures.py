"""
Entanglement below the critical temperature.

The P-measure is the largest ``p`` with ``gamma >= p (+) eta``. For symmetric
kinetic-plus-potential systems it only depends on the normal-mode spectrum,
and in ``u = ln omega0`` the objective is the minimum of lines with slopes
-1, +1 and 0, which gives a closed form. Entropies are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ThermoSepError, ZeroModeError
from .gaussian_core import CovarianceMatrix, Ordering
from .thermal import coth

P_FLOOR = 1e-300
_ROUNDING = 64 * np.finfo(float).eps
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class PMeasureResult:
    """``p`` is clamped to ``P_FLOOR`` with ``underflow`` set; ``neg_log_p`` is never clamped."""

    p: float
    neg_log_p: float
    omega0_star: float
    underflow: bool = False


@dataclass(frozen=True)
class SqueezedPair:
    tau: float

    def __post_init__(self):
        if not (self.tau >= 0 and math.isfinite(self.tau)):
            raise ThermoSepError(f"squeezing must be finite and nonnegative, got {self.tau!r}")


def p_measure(spectrum, t):
    """Closed-form P-measure of the thermal state with the given spectrum.

    With ``c_j = coth(beta hbar w_j / 2)``, ``a_j = ln(w_j c_j)`` and
    ``b_j = ln(w_j / c_j)``, the optimum is at ``ln omega0 = (min a + max b)/2``
    and ``ln P = min(0, (min a - max b)/2)``. Gaps within a few ulps of zero
    are read as ``P = 1``.
    """
    w = spectrum.frequencies
    if w[0] <= 0:
        raise ZeroModeError("P-measure needs strictly positive frequencies")
    with np.errstate(over="ignore"):
        c = coth(0.5 * t.beta * t.hbar * w)
    logw, logc = np.log(w), np.log(c)
    a = float(np.min(logw + logc))
    b = float(np.max(logw - logc))
    gap = 0.5 * (a - b)
    # a gap within evaluation round-off is the separable boundary itself
    if gap < 0.0 and -gap <= _ROUNDING * (1.0 + max(abs(a), abs(b))):
        gap = 0.0
    log_p = min(0.0, gap)
    neg = -log_p if log_p < 0.0 else 0.0
    p = math.exp(log_p)
    underflow = p < P_FLOOR
    if underflow:
        p = P_FLOOR
    return PMeasureResult(p, neg, math.exp(0.5 * (a + b)), underflow)


def p_objective(spectrum, omega0, t):
    """The max-min objective ``min_j {(w_j/w0) c_j, (w0/w_j) c_j, 1}``, vectorised over ``omega0``."""
    w = spectrum.frequencies[None, :]
    w0 = np.atleast_1d(np.asarray(omega0, dtype=float))[:, None]
    c = coth(0.5 * t.beta * t.hbar * w)
    vals = np.minimum(np.min(w / w0 * c, axis=1), np.min(w0 / w * c, axis=1))
    return np.minimum(vals, 1.0)


def comparator_scale(gamma, eta):
    """Largest ``p`` with ``gamma >= p * eta`` for positive definite ``eta``.

    Equal to the smallest eigenvalue of ``L^-1 gamma L^-T`` with ``eta = L L^T``.
    Both arguments are plain matrices in the same coordinate order.
    """
    chol = np.linalg.cholesky(np.asarray(eta, dtype=float))
    x = np.linalg.solve(chol, np.asarray(gamma, dtype=float))
    x = np.linalg.solve(chol, x.T)
    return float(np.linalg.eigvalsh(0.5 * (x + x.T))[0])


def squeezed_cm(s):
    """Two-mode squeezed covariance matrix in the vacuum-normalised convention (vacuum = I)."""
    ch, sh = math.cosh(s.tau), math.sinh(s.tau)
    m = np.array(
        [
            [ch, 0.0, sh, 0.0],
            [0.0, ch, 0.0, -sh],
            [sh, 0.0, ch, 0.0],
            [0.0, -sh, 0.0, ch],
        ]
    )
    return CovarianceMatrix(m, Ordering.XP_INTERLEAVED, hbar=2.0, physical=True)


def squeezed_p(s):
    """Bipartite P-measure of a two-mode squeezed state, ``exp(-tau)``."""
    return math.exp(-s.tau)


def hyperbolic_entropy(tau):
    """Entanglement entropy ``cosh^2 log cosh^2 - sinh^2 log sinh^2`` (bits) of squeezing ``tau``.

    Evaluated through ``q = exp(-2 tau)`` as
    ``2 (tau + log1p(q) - ln 2) + (1 - q)^2 atanh(q) / q`` (nats), which stays
    finite for large ``tau``.
    """
    if not tau >= 0:
        raise ThermoSepError(f"tau must be nonnegative, got {tau!r}")
    if tau == 0.0:
        return 0.0
    if math.isinf(tau):
        return math.inf
    q = math.exp(-2.0 * tau)
    nats = 2.0 * (tau + math.log1p(q) - _LN2) + _atanh_ratio(q) * (1.0 - q) ** 2
    return max(nats, 0.0) / _LN2


def _atanh_ratio(q):
    # atanh(q)/q with the q -> 0 limit
    if q == 0.0:
        return 1.0
    return math.atanh(q) / q


def _check_p(p):
    if isinstance(p, PMeasureResult):
        return p.p, p.neg_log_p
    p = float(p)
    if not (0.0 < p <= 1.0):
        raise ThermoSepError(f"p must lie in (0, 1], got {p!r}")
    return p, -math.log(p)


def eof_correction(p):
    """Correction ``Delta(p) = H(-ln p) + 2 log2 p``.

    Increases from ``1/ln 2 - 2`` at ``p -> 0`` to ``0`` at ``p = 1``. With
    ``tau = -ln p`` the ``2 tau`` terms cancel exactly, leaving
    ``(2 log1p(p^2) - 2 ln 2 + (1 - p^2)^2 atanh(p^2)/p^2) / ln 2``.
    """
    p, neg = _check_p(p)
    if neg == 0.0:
        return 0.0
    q = math.exp(-2.0 * neg)
    return (2.0 * math.log1p(q) - 2.0 * _LN2 + (1.0 - q) ** 2 * _atanh_ratio(q)) / _LN2


def eof_lower_bound(p):
    """Lower bound ``H(-ln p)`` on the Gaussian entanglement of formation across a cut with P-value ``p``."""
    _, neg = _check_p(p)
    return hyperbolic_entropy(neg)
