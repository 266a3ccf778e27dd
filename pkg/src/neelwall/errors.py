"""Exception and warning types shared across the package."""


class GridMismatch(ValueError):
    """Binary operation between fields living on different grids."""


class RangeViolation(ValueError):
    """Phase field left the admissible range around (-pi/2, pi/2)."""


class CenterViolation(ValueError):
    """Variation does not vanish at the center node."""


class OrthogonalityViolation(ValueError):
    """Field is not orthogonal to the translation mode within tolerance."""


class NoConvergence(RuntimeError):
    """Descent iteration hit the iteration cap before reaching tolerance.

    Carries the last iterate and the residual history for post-mortem use.
    """

    def __init__(self, message, iterate=None, residual_history=None):
        super().__init__(message)
        self.iterate = iterate
        self.residual_history = residual_history if residual_history is not None else []


class SymmetryDefect(RuntimeError):
    """Assembled operator failed the symmetry-defect bound."""


class EigenFailure(RuntimeError):
    """Dense eigensolver did not converge."""


class GapViolation(RuntimeError):
    """A non-translation block eigenvalue violates the spectral-gap bound."""


class SolveFailure(RuntimeError):
    """Linear system solve failed (near-singular shifted operator)."""


class NoBracket(RuntimeError):
    """Shift extraction found no interior minimum in the search interval."""


class DegenerateFit(RuntimeError):
    """Decay distances underflowed the roundoff floor inside the fit window."""


class CflViolation(ValueError):
    """Requested time step exceeds the explicit stability limit."""


class BlowUp(RuntimeError):
    """Evolution norm grew past the blow-up guard (instability or CFL bug)."""


class ConfigError(ValueError):
    """Run configuration failed validation."""


class FarFieldViolation(UserWarning):
    """Field does not decay at the box ends; wrap-around contamination likely."""
