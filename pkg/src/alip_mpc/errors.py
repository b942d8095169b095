"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A physical parameter violates its invariant (e.g. non-positive mass)."""


class SingularGeometryError(ArithmeticError):
    """The CoM sits on the degenerate slope line z_c = 0; the implicit
    velocity system is singular."""


class DegenerateGeometryError(ArithmeticError):
    """Ground-reaction-force ratios are undefined (non-positive normal height)."""


class SlipBoundInfeasibleError(ValueError):
    """Effective friction does not exceed the slope; standing still already slips."""


class RiccatiDivergenceError(ArithmeticError):
    """The Riccati fixed-point iteration failed to converge."""


class ScenarioError(ValueError):
    """A scenario file failed to parse or violates a schema invariant."""
