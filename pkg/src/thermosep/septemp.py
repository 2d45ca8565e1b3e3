"""
Critical temperatures for full separability of thermal states.

The scaling function ``s(x) = ln|(1+x)/(1-x)| / x`` turns the comparison of a
thermal covariance matrix with a direct sum of identical minimal-uncertainty
blocks into a scalar problem that only involves the extremal normal-mode
frequencies. ``sigma(r)`` is the optimal constant for spectral ratio ``r``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, ThermoSepError, ZeroModeError
from .gaussian_core import TOL_PSD, Ordering, psd_margin, reorder

#: Spectral ratios at or above this are treated as infinite.
R_INF = 1e12
MAX_BISECTION = 200
GRID_POINTS = 512
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_PRODUCT_TOL = 1e-12


class Method(enum.Enum):
    SYMMETRIC_EXACT = "symmetric_exact"
    SYMMETRIC_BOUND = "symmetric_bound"
    ROUGH_BOUND = "rough_bound"


class Status(enum.Enum):
    SEPARABLE_CERTIFIED = "separable_certified"
    ENTANGLED_CERTIFIED = "entangled_certified"
    UNKNOWN = "unknown"


# -- scaling function ------------------------------------------------------------


def scaling_s(x):
    """The scaling function ``s(x) = (1/x) ln|(1+x)/(1-x)|`` for ``x > 0, x != 1``.

    Written as ``log1p(2x/(1-x))/x`` below the singularity and
    ``log1p(2/(x-1))/x`` above it, so that neither branch loses accuracy near
    ``x = 1`` or at large ``x``. Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ThermoSepError("scaling function needs x > 0")
    if np.any(x == 1.0):
        raise ThermoSepError("scaling function is singular at x = 1")
    out = _s(x)
    return out if out.ndim else float(out)


def _s(x):
    # s with the limits s(0) = 2 and s(1) = inf filled in
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        below = np.log1p(2.0 * x / (1.0 - x)) / x
        above = np.log1p(2.0 / (x - 1.0)) / x
    out = np.where(x < 1.0, below, above)
    out = np.where(x == 0.0, 2.0, out)
    return np.where(x == 1.0, np.inf, out)


def _s_of_log(u):
    """``s(exp(u))`` for ``u != 0`` without forming ``1 - exp(u)`` by subtraction."""
    x = math.exp(u)
    if u < 0.0:
        return math.log1p(2.0 * x / -math.expm1(u)) / x
    return math.log1p(2.0 / math.expm1(u)) / x


def _bisect_decreasing(g, lo, hi):
    # g(lo+) > 0 > g(hi-); the endpoints themselves are never evaluated
    for _ in range(MAX_BISECTION):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@functools.lru_cache(maxsize=1)
def _log_t_infinity():
    return _bisect_decreasing(lambda u: _s_of_log(u) - 2.0, 0.0, math.log(10.0))


def t_infinity():
    """The unique ``t > 1`` with ``s(t) = 2`` (about 1.199678)."""
    return math.exp(_log_t_infinity())


def _log_t_star(r):
    if r >= R_INF:
        return _log_t_infinity()
    big_l = math.log(r)
    return _bisect_decreasing(lambda u: _s_of_log(u) - _s_of_log(u - big_l), 0.0, big_l)


def t_star(r):
    """The unique ``1 <= t <= r`` with ``s(t) = s(t/r)``; ``1`` for ``r = 1``."""
    _check_ratio(r)
    if r == 1.0:
        return 1.0
    return math.exp(_log_t_star(r))


def _check_ratio(r):
    if not r >= 1.0:
        raise ThermoSepError(f"spectral ratio must be >= 1, got {r!r}")


def sigma(r):
    """``sigma(r) = t s(t)`` at the equal-branch point ``t = t_star(r)``.

    ``sigma(1) = inf`` (a degenerate spectrum is separable at every
    temperature) and ``sigma(inf) = 2 t_infinity() = 2.399357...``.
    """
    _check_ratio(r)
    if r == 1.0:
        return math.inf
    u = _log_t_star(r)
    # t s(t) = ln((t+1)/(t-1)) for t > 1
    return math.log1p(2.0 / math.expm1(u))


# -- critical temperature ----------------------------------------------------------


@dataclass(frozen=True)
class CriticalResult:
    beta_crit: float
    sigma_r: float
    t_star: float
    omega0_star: float
    exact: bool
    method: Method

    def temperature(self, k_B=1.0):
        """Critical temperature ``1/(k_B beta_crit)``; zero when separable at all T."""
        if math.isinf(self.beta_crit):
            return 0.0
        return 1.0 / (k_B * self.beta_crit)


def beta_of_omega0(spectrum, omega0, hbar=1.0):
    """Largest ``beta`` certified separable by the comparator frequency ``omega0``.

    ``(1/(hbar omega0)) min{s(w_min/omega0), s(w_max/omega0)}``; the singular
    branch at ``omega0 = w_min`` or ``w_max`` is taken as ``+inf`` so the min
    picks the other one. Vectorised over ``omega0``.
    """
    w0 = np.asarray(omega0, dtype=float)
    if np.any(~(w0 > 0)):
        raise ThermoSepError("comparator frequency must be positive")
    lo = _s(spectrum.omega_min / w0)
    hi = _s(spectrum.omega_max / w0)
    out = np.minimum(lo, hi) / (hbar * w0)
    return out if out.ndim else float(out)


def critical_beta(spectrum, symmetric_exact=False, hbar=1.0):
    """Inverse critical temperature ``sigma(r) / (hbar w_max)`` and its optimal comparator.

    ``symmetric_exact`` is the caller's certificate that the Hamiltonian has
    kinetic-plus-potential form with a transitive site symmetry; only then is
    the value exact rather than a bound.
    """
    if spectrum.n == 0:
        raise ThermoSepError("empty spectrum")
    if spectrum.omega_max == 0.0:
        raise ZeroModeError("all normal-mode frequencies vanish")
    method = Method.SYMMETRIC_EXACT if symmetric_exact else Method.SYMMETRIC_BOUND
    r = spectrum.ratio
    if r == 1.0:
        return CriticalResult(math.inf, math.inf, 1.0, spectrum.omega_min, bool(symmetric_exact), method)
    u = _log_t_star(r)
    sig = math.log1p(2.0 / math.expm1(u))
    t = math.exp(u)
    return CriticalResult(
        sig / (hbar * spectrum.omega_max),
        sig,
        t,
        spectrum.omega_max / t,
        bool(symmetric_exact),
        method,
    )


def rough_bound(lambda0, omega_max, hbar=1.0):
    """Coarse separability bound ``ln((2 l + 1)/(2 l - 1)) / (hbar w_max)``.

    ``lambda0`` is the largest eigenvalue of the unit-free comparator in the
    normal-mode frame and must exceed 1/2.
    """
    if not lambda0 > 0.5:
        raise ThermoSepError(f"lambda0 must exceed 1/2, got {lambda0!r}")
    if not omega_max > 0:
        raise ThermoSepError("omega_max must be positive")
    return math.log1p(2.0 / (2.0 * lambda0 - 1.0)) / (hbar * omega_max)


def comparator_lambda0(spectrum, omega0):
    """Largest eigenvalue of the unit-free image of ``(+) eta(omega0)`` in the normal-mode frame."""
    w = spectrum.frequencies
    if w[0] <= 0:
        raise ZeroModeError("zero-frequency mode")
    return 0.5 * float(max(np.max(w / omega0), np.max(omega0 / w)))


def rough_critical(spectrum, omega0=None, hbar=1.0):
    """Coarse bound packaged as a :class:`CriticalResult` (comparator ``omega0``, default ``w_max``)."""
    w0 = spectrum.omega_max if omega0 is None else float(omega0)
    lam = comparator_lambda0(spectrum, w0)
    if lam <= 0.5:
        beta = math.inf
    else:
        beta = rough_bound(lam, spectrum.omega_max, hbar)
    return CriticalResult(beta, beta * hbar * spectrum.omega_max, spectrum.omega_max / w0, w0, False, Method.ROUGH_BOUND)


# -- separability search -----------------------------------------------------------


@dataclass(frozen=True)
class SeparabilityVerdict:
    """Outcome of a separability check.

    ``margin`` is the best ``psd_margin(gamma - (+) eta)`` found. A product
    state is certified with one comparator frequency per mode, reported in
    ``mode_witnesses``; otherwise ``witness_omega0`` is the common comparator.
    """

    status: Status
    witness_omega0: Optional[float]
    margin: float
    mode_witnesses: tuple = field(default=())
    beta_crit: Optional[float] = None


def _offsite_max(g, n):
    site = np.concatenate([np.arange(n), np.arange(n)])
    mask = site[:, None] != site[None, :]
    return float(np.max(np.abs(g[mask]))) if n > 1 else 0.0


def _product_verdict(gamma, mass):
    """Per-mode witnesses for a covariance matrix without inter-site correlations."""
    hbar = gamma.hbar
    margins, witnesses = [], []
    for j in range(gamma.n_modes):
        b = gamma.mode_block(j)
        det = float(np.linalg.det(b))
        if not (det > 0 and b[0, 0] > 0):
            return None
        nu = math.sqrt(det)
        # the pure state hbar/(2 nu) * b is dominated by b whenever nu >= hbar/2
        eta = (0.5 * hbar / nu) * b
        margins.append(psd_margin(b - eta))
        witnesses.append(math.sqrt(eta[1, 1] / eta[0, 0]) / mass)
    return min(margins), tuple(witnesses)


def _comparator_margins(g, n, omega0, hbar, mass):
    w0 = np.atleast_1d(np.asarray(omega0, dtype=float))
    a = hbar / (2.0 * mass * w0)
    b = 0.5 * mass * hbar * w0
    diag = np.concatenate([np.repeat(a[:, None], n, 1), np.repeat(b[:, None], n, 1)], axis=1)
    stack = g[None, :, :] - diag[:, :, None] * np.eye(2 * n)[None, :, :]
    return np.linalg.eigvalsh(stack)[:, 0]


def _golden_max(f, lo, hi, iters=120):
    """Maximise a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
    return (c, fc) if fc >= fd else (d, fd)


def check_full_separability(gamma, spectrum, t, exact=False, mass=1.0, grid_points=GRID_POINTS):
    """Search for a comparator ``(+) eta(omega0)`` dominated by ``gamma``.

    A covariance matrix without inter-site correlations is certified with one
    witness per mode. Otherwise ``omega0`` runs over a log-spaced grid on
    ``[w_min, w_max]`` (the smallest qualifying grid index wins), followed by a
    golden-section refinement around the best grid point. The margin is a
    concave function of ``omega0``, so the refinement finds its maximum.

    The search can only ever certify separability. ``ENTANGLED_CERTIFIED`` is
    returned when no witness exists, ``exact`` is set and ``t.beta`` exceeds
    the critical value of ``spectrum``; otherwise the verdict is ``UNKNOWN``.
    """
    n = gamma.n_modes
    if n != spectrum.n:
        raise DimensionMismatchError(f"covariance matrix has {n} modes, spectrum has {spectrum.n}")
    g = reorder(gamma, Ordering.XXPP).matrix
    scale = max(1.0, float(np.max(np.abs(g))))

    if _offsite_max(g, n) <= _PRODUCT_TOL * scale:
        res = _product_verdict(gamma, mass)
        if res is not None and res[0] >= -TOL_PSD:
            return SeparabilityVerdict(Status.SEPARABLE_CERTIFIED, None, res[0], res[1])

    if spectrum.omega_min <= 0.0:
        raise ZeroModeError("comparator search needs a strictly positive spectrum")
    hbar = gamma.hbar
    beta_crit = critical_beta(spectrum, exact, hbar).beta_crit
    lo, hi = math.log(spectrum.omega_min), math.log(spectrum.omega_max)
    npts = 1 if hi == lo else int(grid_points)
    logs = np.linspace(lo, hi, npts)
    margins = _comparator_margins(g, n, np.exp(logs), hbar, mass)
    ok = np.nonzero(margins >= -TOL_PSD)[0]
    if ok.size:
        k = int(ok[0])
        return SeparabilityVerdict(
            Status.SEPARABLE_CERTIFIED, float(np.exp(logs[k])), float(margins[k]), beta_crit=beta_crit
        )
    best, best_margin = float(np.exp(logs[0])), float(margins[0])
    if npts > 1:
        k = int(np.argmax(margins))
        a, b = logs[max(k - 1, 0)], logs[min(k + 1, npts - 1)]
        u, m = _golden_max(lambda u: float(_comparator_margins(g, n, math.exp(u), hbar, mass)[0]), a, b)
        best, best_margin = (math.exp(u), m) if m > margins[k] else (float(np.exp(logs[k])), float(margins[k]))
    if best_margin >= -TOL_PSD:
        return SeparabilityVerdict(Status.SEPARABLE_CERTIFIED, best, best_margin, beta_crit=beta_crit)
    status = Status.ENTANGLED_CERTIFIED if exact and t.beta > beta_crit else Status.UNKNOWN
    return SeparabilityVerdict(status, None, best_margin, beta_crit=beta_crit)
