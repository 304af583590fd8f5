"""Exception hierarchy shared by every stage of the pipeline."""


class AmrpError(Exception):
    """Base class for all errors raised by this package."""


# --- ingestion -------------------------------------------------------------

class MissingFileError(AmrpError, FileNotFoundError):
    pass


class MalformedRowError(AmrpError, ValueError):
    def __init__(self, row, message):
        self.row = row
        super().__init__(f"row {row}: {message}")


class ChannelMismatchError(AmrpError, ValueError):
    pass


class OutOfRangeLabelError(AmrpError, ValueError):
    pass


class DuplicateFoodIndexError(AmrpError, ValueError):
    pass


class NonPositiveCaloriesError(AmrpError, ValueError):
    pass


class EmptySlotsError(AmrpError, ValueError):
    pass


class DuplicateIdError(AmrpError, ValueError):
    pass


class InvalidProfileError(AmrpError, ValueError):
    pass


class RecordingTooShortError(AmrpError, ValueError):
    pass


# --- signal processing -----------------------------------------------------

class InvalidBandEdgesError(AmrpError, ValueError):
    pass


class SignalTooShortError(AmrpError, ValueError):
    pass


class TooManyLevelsError(AmrpError, ValueError):
    pass


class EpochLongerThanTrialError(AmrpError, ValueError):
    pass


class UnknownChannelError(AmrpError, KeyError):
    pass


class WindowTooLongError(AmrpError, ValueError):
    pass


class InconsistentStructureError(AmrpError, ValueError):
    pass


class MissingChannelError(AmrpError, ValueError):
    pass


class NonFiniteFeatureError(AmrpError, ValueError):
    pass


# --- learning and evaluation -----------------------------------------------

class EmptyClassError(AmrpError, ValueError):
    pass


class DimensionMismatchError(AmrpError, ValueError):
    pass


class MissingMethodError(AmrpError, ValueError):
    pass


class MisalignedRowsError(AmrpError, ValueError):
    pass


class SingleClassTrainingSetWarning(UserWarning):
    """Training labels contain one class; the model degenerates to a constant."""


class LengthMismatchError(AmrpError, ValueError):
    pass


class EmptyInputError(AmrpError, ValueError):
    pass


class UndefinedF1Error(AmrpError, ZeroDivisionError):
    pass


class SingleClassError(AmrpError, ValueError):
    pass


# --- ranking and planning --------------------------------------------------

class ZeroColumnError(AmrpError, ValueError):
    pass


class WeightDimensionMismatchError(AmrpError, ValueError):
    pass


class NonPositiveWeightError(AmrpError, ValueError):
    pass


class ItemExceedsCapacityError(AmrpError, ValueError):
    pass


class InfeasiblePlanError(AmrpError):
    def __init__(self, message, diagnosis=None):
        self.diagnosis = diagnosis or {}
        super().__init__(message)


class ConfigError(AmrpError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
