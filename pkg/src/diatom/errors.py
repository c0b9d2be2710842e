"""Exception hierarchy.

Configuration problems derive from :class:`ConfigError`; failures detected
while computing (resonances, degenerate denominators, lost state tracking,
norm drift) derive from :class:`NumericalError`. The CLI maps the two
families onto distinct exit codes.
"""


class DiatomError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DiatomError, ValueError):
    """Invalid model, field or scenario definition."""


class DomainError(ConfigError):
    """Argument outside the domain of an operation (e.g. R <= 0)."""


class ExtrapolationError(DomainError):
    """Tabulated data queried outside its tabulated range."""


class SelectionRuleError(ConfigError):
    """Dipole component forbidden by the electronic symmetry of a pair."""


class NumericalError(DiatomError, ArithmeticError):
    """A computation was attempted but its result cannot be trusted."""


class DegeneracyError(NumericalError):
    def __init__(self, state, other, gap):
        self.state = state
        self.other = other
        self.gap = gap
        super().__init__(
            f"degenerate denominator between states {state} and {other} "
            f"(|gap| = {gap:.3e} Ha)"
        )


class ResonanceError(NumericalError):
    def __init__(self, state, other, omega, transition):
        self.state = state
        self.other = other
        self.omega = float(omega)
        self.transition = float(transition)
        super().__init__(
            f"omega_L = {self.omega!r} Ha is resonant with transition {state}->{other} "
            f"(|omega_{state}{other}| = {self.transition!r} Ha)"
        )


class TrackingError(NumericalError):
    """Adiabatic/Floquet state tracking is ambiguous."""


class PropagationError(NumericalError):
    """Wavepacket propagation left its accuracy contract (norm, basis truncation)."""
