"""Exception types shared across the package.

Every domain failure raises a subclass of TransasymError so callers (and the
CLI) can distinguish "the mathematics said no" from programming errors.
"""

from __future__ import annotations


class TransasymError(Exception):
    """Base class for domain errors."""


class DegreeCapExceeded(TransasymError):
    """A germ term (or requested monomial) exceeds the germ's degree cap."""


class ResonantOrder(TransasymError):
    """An order-k coefficient solve is singular and inconsistent.

    The offending order is stored in ``order``.
    """

    def __init__(self, order: int, message: str | None = None):
        self.order = int(order)
        super().__init__(message or f"resonant order k={order}: singular and inconsistent")


class UnknownLabel(TransasymError):
    """No builtin system registered under the requested label."""


class OnBranchCut(TransasymError):
    """A coordinate map was evaluated on (or too close to) its branch cut."""


class InsufficientCoefficients(TransasymError):
    """Too few usable Taylor coefficients for a ratio-based estimate."""


class OscillatoryCoefficients(TransasymError):
    """Coefficient ratios oscillate (conjugate-pair singularities).

    ``modulus`` carries the modulus-only radius estimate; the phase of the
    dominant singularity is undetermined.
    """

    def __init__(self, modulus: float, message: str | None = None):
        self.modulus = float(modulus)
        super().__init__(message or f"oscillatory coefficient ratios; modulus-only radius {modulus:.6g}")


class SingularApproach(TransasymError):
    """Analytic continuation ran into a singularity; location in ``where``."""

    def __init__(self, where: complex, message: str | None = None):
        self.where = complex(where)
        super().__init__(message or f"singular approach near {where:.8g}")


class OutsideReliableDisk(TransasymError):
    """|xi(x)| is too close to (or beyond) the Taylor reliability radius."""


class ScalePastBranch(TransasymError):
    """|xi(x)| exceeds the declared continuation radius of the expansion."""


class NewtonDiverged(TransasymError):
    """Newton refinement failed to meet tolerance; index in ``index``."""

    def __init__(self, index, message: str | None = None):
        self.index = index
        super().__init__(message or f"Newton refinement diverged at entry {index}")


class ZeroC(TransasymError):
    """Array prediction requested with C = 0 (no singularity array exists)."""


class StepUnderflow(TransasymError):
    """The integrator's step collapsed below the floor; location in ``where``."""

    def __init__(self, where: complex, message: str | None = None):
        self.where = complex(where)
        super().__init__(message or f"step underflow near x = {where:.8g}")


class NoBlowup(TransasymError):
    """A trajectory tail shows no blow-up to fit a singularity model to."""


class ChartAmbiguous(TransasymError):
    """Local-model branch selection could not be decided; both in ``candidates``."""

    def __init__(self, candidates, message: str | None = None):
        self.candidates = tuple(candidates)
        super().__init__(message or f"ambiguous chart branch: candidates {self.candidates}")


class NotConverging(TransasymError):
    """A stabilized limit (Richardson ladder) failed its convergence check."""


class PoleOfOracle(TransasymError):
    """A closed-form oracle was evaluated at one of its poles."""


class SheetUnreachable(TransasymError):
    """Requested Riemann-sheet data could not be reached from available seeds."""
