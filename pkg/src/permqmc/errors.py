"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A numerical routine produced a result outside its guaranteed range."""


class PredictorError(RuntimeError):
    """An external predictor subprocess violated the wire protocol or failed."""
