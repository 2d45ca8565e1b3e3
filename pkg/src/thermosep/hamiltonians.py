"""
Quadratic Hamiltonians and their normal-mode spectra.

Three descriptions are supported: a potential matrix ``V`` with a common mass
(``H = sum p^2/2m + m/2 x^T V x``), a general coefficient matrix ``C`` with
``H = R^T C R``, and the nearest-neighbour harmonic ring.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NotPSDError, SpecFormatError, ThermoSepError
from .gaussian_core import TOL_CLAMP, Ordering, _as_square, _check_symmetric, _readonly, symplectic_spectrum

TOL_SHIFT = 1e-10


@dataclass(frozen=True)
class FrequencySpectrum:
    """Normal-mode frequencies, stored in ascending order (multiplicities kept)."""

    frequencies: np.ndarray

    def __post_init__(self):
        w = np.sort(np.asarray(self.frequencies, dtype=float).ravel())
        if w.size == 0:
            raise ThermoSepError("frequency spectrum is empty")
        if not np.all(np.isfinite(w)) or w[0] < 0:
            raise ThermoSepError("frequencies must be finite and nonnegative")
        object.__setattr__(self, "frequencies", _readonly(w))

    def __len__(self):
        return self.frequencies.size

    @property
    def n(self):
        return self.frequencies.size

    @property
    def omega_min(self):
        return float(self.frequencies[0])

    @property
    def omega_max(self):
        return float(self.frequencies[-1])

    @property
    def ratio(self):
        """Spectral ratio ``omega_max / omega_min``; ``inf`` with a zero mode."""
        if self.omega_min == 0.0:
            return math.inf
        return self.omega_max / self.omega_min


@dataclass(frozen=True)
class PotentialMatrix:
    """Potential matrix ``V`` (frequency^2 units) and common mass ``m``."""

    v: np.ndarray
    mass: float = 1.0

    def __post_init__(self):
        v = _as_square(self.v, "V")
        if v.shape[0] == 0:
            raise ThermoSepError("potential matrix is empty")
        _check_symmetric(v, "V")
        v = 0.5 * (v + v.T)
        if not self.mass > 0:
            raise ThermoSepError("mass must be positive")
        w = np.linalg.eigvalsh(v)
        if w[0] < -TOL_CLAMP * max(1.0, float(np.max(np.abs(w)))):
            raise NotPSDError(w[0], f"potential matrix is not positive semi-definite (min eigenvalue {w[0]:.6g})")
        object.__setattr__(self, "v", _readonly(v))

    @property
    def n(self):
        return self.v.shape[0]


@dataclass(frozen=True)
class QuadraticCoefficients:
    """Coefficient matrix ``C`` of ``H = R^T C R`` (no linear terms)."""

    c: np.ndarray
    ordering: Ordering = Ordering.XXPP

    def __post_init__(self):
        c = _as_square(self.c, "C")
        if c.shape[0] == 0 or c.shape[0] % 2:
            raise ThermoSepError(f"coefficient matrix must be 2n x 2n, got {c.shape}")
        _check_symmetric(c, "C")
        object.__setattr__(self, "c", _readonly(0.5 * (c + c.T)))

    @property
    def n_modes(self):
        return self.c.shape[0] // 2


@dataclass(frozen=True)
class RingParams:
    """Ring of ``n`` equal oscillators with coupling ``omega`` and on-site trap ``delta``."""

    n: int
    omega: float
    delta: float = 0.0
    mass: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ThermoSepError(f"ring size must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        # omega == 0 describes decoupled traps and is accepted
        if not (self.omega >= 0 and math.isfinite(self.omega)):
            raise ThermoSepError("coupling omega must be finite and nonnegative")
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise ThermoSepError("on-site frequency delta must be finite and nonnegative")
        if not self.mass > 0:
            raise ThermoSepError("mass must be positive")


def ring_potential(p):
    """Potential matrix of the ring.

    Built by summing ``delta^2 x_j^2`` and ``omega^2 (x_{j+1} - x_j)^2`` over
    sites (indices mod n), so the degenerate rings ``n = 1`` (no coupling) and
    ``n = 2`` (doubled bond) come out consistently.
    """
    n = p.n
    v = np.eye(n) * p.delta**2
    w2 = p.omega**2
    for j in range(n):
        k = (j + 1) % n
        if k == j:
            continue
        v[j, j] += w2
        v[k, k] += w2
        v[j, k] -= w2
        v[k, j] -= w2
    return PotentialMatrix(v, p.mass)


def _ring_frequencies(p):
    j = np.arange(p.n)
    return np.sqrt(4.0 * p.omega**2 * np.sin(np.pi * j / p.n) ** 2 + p.delta**2)


def ring_dispersion(p):
    """Normal-mode frequencies ``2 omega sqrt(sin^2(pi j/n) + (delta/2omega)^2)``."""
    return FrequencySpectrum(_ring_frequencies(p))


def ring_normal_modes(p):
    """Real orthogonal Fourier basis diagonalising the ring potential.

    Returns
    -------
    modes : numpy.ndarray
        ``n x n`` orthogonal matrix; row ``k`` is a normal mode.
    frequencies : numpy.ndarray
        Frequency of each row of ``modes``.
    """
    n = p.n
    j = np.arange(n)
    rows = [np.full(n, 1.0 / math.sqrt(n))]
    ks = [0]
    for k in range(1, (n - 1) // 2 + 1):
        rows.append(math.sqrt(2.0 / n) * np.cos(2 * np.pi * k * j / n))
        rows.append(math.sqrt(2.0 / n) * np.sin(2 * np.pi * k * j / n))
        ks += [k, k]
    if n % 2 == 0 and n > 1:
        rows.append((-1.0) ** j / math.sqrt(n))
        ks.append(n // 2)
    ks = np.array(ks)
    freqs = np.sqrt(4.0 * p.omega**2 * np.sin(np.pi * ks / n) ** 2 + p.delta**2)
    return np.array(rows), freqs


def spectrum_from_potential(pot):
    """Frequencies ``sqrt(eig(V))``; tiny negative eigenvalues are clamped to zero."""
    w = np.linalg.eigvalsh(pot.v)
    if w[0] < -TOL_CLAMP * max(1.0, float(np.max(np.abs(w)))):
        raise NotPSDError(w[0])
    return FrequencySpectrum(np.sqrt(np.clip(w, 0.0, None)))


def quadratic_from_potential(pot):
    """Embed ``sum p^2/2m + m/2 x^T V x`` as ``C = (m/2) V (+) (1/2m) I`` in XXPP order."""
    n = pot.n
    zero = np.zeros((n, n))
    c = np.block([[0.5 * pot.mass * pot.v, zero], [zero, np.eye(n) / (2.0 * pot.mass)]])
    return QuadraticCoefficients(c, Ordering.XXPP)


def spectrum_from_quadratic(q):
    """Normal-mode frequencies of ``H = R^T C R``: twice the symplectic eigenvalues of ``C``."""
    return FrequencySpectrum(2.0 * symplectic_spectrum(q.c, q.ordering))


def is_shift_invariant(pot, tol=TOL_SHIFT):
    """True iff ``V`` commutes with the cyclic site shift.

    A cyclic symmetry acts transitively on the sites, so ``True`` certifies that
    the critical temperature is exact; ``False`` says nothing about other symmetries.
    """
    v = pot.v
    shifted = np.roll(np.roll(v, 1, axis=0), 1, axis=1)
    scale = max(1.0, float(np.max(np.abs(v))))
    return bool(np.max(np.abs(shifted - v)) <= tol * scale)


# -- spec files ---------------------------------------------------------------

_RING_KEYS = {"n", "omega", "delta", "mass"}
_POTENTIAL_KEYS = {"mass", "v"}
_SPECTRUM_KEYS = {"frequencies"}


def _number(obj, key, section, default=None):
    if key not in obj:
        if default is None:
            raise SpecFormatError(f"'{section}' is missing required key '{key}'")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise SpecFormatError(f"'{section}.{key}' must be a number")
    return val


def _check_keys(obj, allowed, section):
    if not isinstance(obj, dict):
        raise SpecFormatError(f"'{section}' must be an object")
    extra = set(obj) - allowed
    if extra:
        raise SpecFormatError(f"unknown key(s) in '{section}': {', '.join(sorted(extra))}")


def parse_spec(obj):
    """Turn a decoded spec document into ``RingParams``, ``PotentialMatrix`` or ``FrequencySpectrum``.

    Structural problems raise :class:`SpecFormatError`; a well-formed but
    non-PSD potential raises :class:`NotPSDError`.
    """
    if not isinstance(obj, dict) or len(obj) != 1:
        raise SpecFormatError("spec must be an object with exactly one of 'ring', 'potential', 'spectrum'")
    (kind, body), = obj.items()
    try:
        if kind == "ring":
            _check_keys(body, _RING_KEYS, kind)
            n = _number(body, "n", kind)
            if int(n) != n:
                raise SpecFormatError("'ring.n' must be an integer")
            return RingParams(
                int(n),
                float(_number(body, "omega", kind)),
                float(_number(body, "delta", kind, 0.0)),
                float(_number(body, "mass", kind, 1.0)),
            )
        if kind == "potential":
            _check_keys(body, _POTENTIAL_KEYS, kind)
            if "v" not in body:
                raise SpecFormatError("'potential' is missing required key 'v'")
            try:
                v = np.array(body["v"], dtype=float)
            except (TypeError, ValueError):
                raise SpecFormatError("'potential.v' must be a square array of numbers") from None
            if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] == 0:
                raise SpecFormatError("'potential.v' must be a non-empty square array")
            return PotentialMatrix(v, float(_number(body, "mass", kind, 1.0)))
        if kind == "spectrum":
            _check_keys(body, _SPECTRUM_KEYS, kind)
            if "frequencies" not in body:
                raise SpecFormatError("'spectrum' is missing required key 'frequencies'")
            try:
                w = np.array(body["frequencies"], dtype=float)
            except (TypeError, ValueError):
                raise SpecFormatError("'spectrum.frequencies' must be a list of numbers") from None
            if w.ndim != 1:
                raise SpecFormatError("'spectrum.frequencies' must be a flat list")
            return FrequencySpectrum(w)
    except (SpecFormatError, NotPSDError):
        raise
    except ThermoSepError as exc:
        raise SpecFormatError(str(exc)) from None
    raise SpecFormatError(f"unknown spec kind '{kind}'")


def load_spec(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecFormatError(f"cannot read spec file: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"spec file is not valid JSON: {exc}") from None
    return parse_spec(obj)


def spectrum_of(system):
    """Frequency spectrum of any parsed spec object."""
    if isinstance(system, FrequencySpectrum):
        return system
    if isinstance(system, RingParams):
        return ring_dispersion(system)
    if isinstance(system, PotentialMatrix):
        return spectrum_from_potential(system)
    if isinstance(system, QuadraticCoefficients):
        return spectrum_from_quadratic(system)
    raise TypeError(f"cannot take the spectrum of {type(system).__name__}")
