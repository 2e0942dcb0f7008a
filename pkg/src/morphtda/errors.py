"""Exception hierarchy shared by every module of the package."""


class MorphTdaError(ValueError):
    """Base class for all domain errors raised by morphtda."""


class UnsupportedFormat(MorphTdaError):
    pass


class CorruptImage(MorphTdaError):
    pass


class InvalidTarget(MorphTdaError):
    pass


class ImageTooSmall(MorphTdaError):
    pass


class EmptyCloud(MorphTdaError):
    pass


class CloudTooLarge(MorphTdaError):
    pass


class BlockTooSmall(MorphTdaError):
    pass


class SizeMismatch(MorphTdaError):
    pass


class DimensionMismatch(MorphTdaError):
    pass


class SingleClass(MorphTdaError):
    pass


class NonFiniteFeature(MorphTdaError):
    pass


class MissingClass(MorphTdaError):
    pass


class TooFewMorphs(MorphTdaError):
    pass


class KindMismatch(MorphTdaError):
    pass


class AlphaOutOfRange(MorphTdaError):
    pass


class ParseError(MorphTdaError):
    pass
