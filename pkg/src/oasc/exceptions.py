"""Exception types raised by the clustering engine."""


class ValidationError(ValueError):
    """Invalid parameters or inputs."""


class NumericalBlowupError(FloatingPointError):
    """A center update produced a non-finite value.

    ``index`` is the 0-based Gaussian index; ``step`` is the 1-based stream
    step when the error surfaced inside a run (``None`` otherwise).
    """

    def __init__(self, index, step=None):
        self.index = index
        self.step = step
        msg = f"non-finite center update for Gaussian {index}"
        if step is not None:
            msg += f" at step {step}"
        super().__init__(msg)


class EmptyAccumulatorError(RuntimeError):
    """Correlations requested from an accumulator that holds no samples."""

    def __init__(self, step=None):
        self.step = step
        msg = "empty accumulator: no samples were accumulated"
        if step is not None:
            msg += f" (at step {step})"
        super().__init__(msg)
