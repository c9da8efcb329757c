"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CocycleLabError(Exception):
    """Base class for all library errors."""


class SpecError(CocycleLabError, ValueError):
    """A group/measure/representation/cocycle spec string or document is malformed."""


class InvalidElementError(CocycleLabError, ValueError):
    """An element encoding does not belong to the given group model."""


class ModelMismatchError(CocycleLabError, ValueError):
    """Two objects built over different group models were combined."""


class UnsupportedFamilyError(CocycleLabError):
    """The operation needs a finite presentation the family does not have."""


class BudgetExceededError(CocycleLabError):
    """A support or ball grew past the element budget.

    Carries how far the computation got so partial results stay usable.
    """

    def __init__(self, message: str, *, largest_feasible: int | None = None,
                 partial_radius: int | None = None, sizes: list[int] | None = None):
        super().__init__(message)
        self.largest_feasible = largest_feasible
        self.partial_radius = partial_radius
        self.sizes = sizes


class PreconditionError(CocycleLabError, ValueError):
    """A documented precondition of an operation was violated."""


class ConsistencyError(CocycleLabError):
    """Two independent computations of the same quantity disagree beyond tolerance."""


class NumericError(CocycleLabError):
    """A numerical routine failed to converge; carries the residual."""

    def __init__(self, message: str, *, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class EmptyBandError(CocycleLabError):
    """A requested spectral band contains no spectrum; names the nearest eigenvalues."""

    def __init__(self, message: str, *, nearest: tuple[float, ...] = ()):
        super().__init__(message)
        self.nearest = nearest


class CocycleConsistencyError(CocycleLabError, ValueError):
    """Generator values violate a relator; names the violated relator."""

    def __init__(self, message: str, *, relator: str = "", residual: float = 0.0):
        super().__init__(message)
        self.relator = relator
        self.residual = residual
