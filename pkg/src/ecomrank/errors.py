"""Shared exception types."""


class DataError(ValueError):
    """Input data is insufficient or inconsistent for the requested operation."""


class EmptyQueryError(ValueError):
    """No usable tokens survived query preprocessing."""


class UndefinedMetricError(ValueError):
    """A metric's denominator is zero for the given instance."""


class StoreFormatError(ValueError):
    """A persisted store file is corrupt; names the first bad record."""


class ModelFormatError(ValueError):
    """A model file is truncated or dimensionally inconsistent."""


class TrainingDiverged(RuntimeError):
    """Training produced a non-finite loss; reports the offending epoch."""
