"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition (shape, range, kind)."""


class InvalidWindowError(InvalidInputError):
    """Requested burn-in/window slice does not fit inside the trajectory horizon."""


class NumericalOverflowError(FloatingPointError):
    """A state or intermediate quantity became non-finite (e.g. chaotic blowup)."""


class TrainingDivergedError(RuntimeError):
    """A training loss became non-finite; carries the failing iteration."""

    def __init__(self, iteration: int, message: str = ""):
        self.iteration = iteration
        super().__init__(message or f"training loss non-finite at outer iteration {iteration}")


class WindowNotReadyError(RuntimeError):
    """The observation window has not yet accumulated enough observations."""


class DegenerateWeightsError(RuntimeError):
    """All particle weights underflowed to zero; the likelihood is degenerate."""
