class HedgeBenchError(Exception):
    pass


class ConfigurationError(HedgeBenchError):
    pass


class ContractError(HedgeBenchError):
    pass


class NonStationaryError(HedgeBenchError):
    pass


class CalibrationError(HedgeBenchError):
    pass


class CheckpointError(HedgeBenchError):
    pass


class TrainingDivergenceError(HedgeBenchError):
    """
    Raised when a loss or gradient becomes non-finite during training.

    The partially filled training trace is attached as ``trace`` (``None`` if
    the divergence happened outside of a training loop, e.g. in a single
    optimizer step).
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class PlottingError(HedgeBenchError):
    pass


class NonStationaryWarning(UserWarning):
    pass


class CalibrationWarning(UserWarning):
    pass
