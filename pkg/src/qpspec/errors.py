"""Exception types shared across the toolbox.

Measurement routines distinguish three failure families: domain problems
(bad arguments, unusable precision), violated hypotheses (a named input
condition does not hold, reported with a witness), and violated conclusions
(a bound the artifact asserts was exceeded, reported with the slack).
"""


class QpspecError(Exception):
    """Base class for all toolbox errors."""


class DomainError(QpspecError, ValueError):
    """Argument outside the documented domain."""


class PrecisionExhausted(QpspecError):
    """Requested output cannot be certified at the given bit budget."""


class InsufficientDepth(QpspecError):
    """Too few continued-fraction convergents stored for the request."""


class RealnessViolated(QpspecError):
    """Imaginary residue of a nominally real evaluation exceeded tolerance."""


class DecayViolated(QpspecError):
    """Stored Fourier decay envelope fails; carries the offending modes."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = list(offending) if offending is not None else []


class DegenerateFit(QpspecError):
    """A scaling fit was requested on data with no usable variation.

    Carries the raw per-parameter measurements so callers can report them.
    """

    def __init__(self, message, measures=None, rows=None):
        super().__init__(message)
        self.measures = measures
        self.rows = rows


class HypothesisFailed(QpspecError):
    """A named hypothesis of a conditional statement fails at some index."""

    def __init__(self, condition, index=None, detail=""):
        self.condition = condition
        self.index = index
        msg = f"hypothesis '{condition}' fails"
        if index is not None:
            msg += f" at index {index}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class IdentityViolated(QpspecError):
    """An exact algebraic identity failed beyond numerical tolerance."""


class SingularEnergy(QpspecError):
    """Energy too close to an eigenvalue for a resolvent quantity."""


class ConvergenceFailure(QpspecError):
    """Iteration stalled; carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class PreconditionNotMet(QpspecError):
    """Caller-checkable precondition of a verification routine is false."""


class BoundViolated(QpspecError):
    """An asserted quantitative conclusion failed; carries a witness."""

    def __init__(self, message, witness=None, slack=None):
        super().__init__(message)
        self.witness = witness
        self.slack = slack


class NotNearSpectrum(QpspecError):
    """No eigenvalue branch close enough to the requested energy."""


class PairingFailed(QpspecError):
    """No large-window eigenvector both close in energy and correlated."""


class Refusal(QpspecError):
    """A certificate search failed; carries the phase where it failed."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class EmptySet(QpspecError):
    """Operation requires a nonempty set."""


class ConfigError(QpspecError):
    """Experiment configuration failed validation; names the field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"config field '{field}': {message}")
