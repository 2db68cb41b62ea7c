"""Exception types raised across the toolkit."""


class SkinCalError(Exception):
    """Base class for all toolkit errors."""


class InvalidGeometryError(SkinCalError, ValueError):
    pass


class DatasetError(SkinCalError, ValueError):
    """A dataset or frame violates its shape or value contract."""


class ProtocolError(DatasetError):
    """Sample pressures decrease; calibration accepts the loading branch only."""


class DegenerateRangeError(SkinCalError, ValueError):
    pass


class InvalidDataError(SkinCalError, ValueError):
    pass


class RankDeficientError(SkinCalError, ValueError):
    pass


class EmptyDataError(SkinCalError, ValueError):
    pass


class InsufficientDataError(SkinCalError, ValueError):
    pass


class EmptyModelError(SkinCalError, ValueError):
    """Every taxel was excluded during calibration."""


class FrameShapeError(SkinCalError, ValueError):
    pass


class ExcludedTaxelError(SkinCalError, ValueError):
    pass


class InvalidPatchError(SkinCalError, ValueError):
    pass


class FormatError(SkinCalError, ValueError):
    """A file does not follow the expected layout."""


class IncompatibleModelError(FormatError):
    """A model file was written by an unsupported format version."""
