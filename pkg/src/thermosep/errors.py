"""Exception hierarchy shared by all modules."""


class ThermoSepError(ValueError):
    """Base class for all errors raised by thermosep."""


class NotSymmetricError(ThermoSepError):
    pass


class NotPositiveDefiniteError(ThermoSepError):
    pass


class NotPSDError(ThermoSepError):
    """A potential matrix has an eigenvalue below the PSD tolerance."""

    def __init__(self, min_eigenvalue, message=None):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(
            message or f"matrix is not positive semi-definite (min eigenvalue {self.min_eigenvalue:.6g})"
        )


class SingularSpectrumError(ThermoSepError):
    """A matrix function is undefined on one of the eigenvalues."""

    def __init__(self, eigenvalue, message=None):
        self.eigenvalue = float(eigenvalue)
        super().__init__(message or f"function undefined at eigenvalue {self.eigenvalue:.6g}")


class ZeroModeError(ThermoSepError):
    """The Hamiltonian has a free (zero-frequency) mode; no thermal state exists."""


class DimensionMismatchError(ThermoSepError):
    pass


class SymmetryCertificateError(ThermoSepError):
    """Exactness was requested for a Hamiltonian that cannot be certified shift-invariant."""


class SpecFormatError(ThermoSepError):
    """A Hamiltonian spec file could not be parsed."""
