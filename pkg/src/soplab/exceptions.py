"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A model object (parameters, OCV table, SOA box) violates its invariants."""


class InputError(ValueError):
    """Malformed external input: profile rows, data files, CLI arguments."""


class AnalyticDomainError(ArithmeticError):
    """A closed form was evaluated outside its domain (non-positive denominator,
    zero ohmic resistance for a CV hold, perturbation past a pole)."""


class InfeasibleStateError(RuntimeError):
    """The rested state is already outside the safe operation area, so no
    feasibility bracket exists."""


class PowerInfeasibleError(RuntimeError):
    """A requested constant power cannot be delivered at the current step
    (quadratic discriminant negative or wrong sign for the direction)."""
