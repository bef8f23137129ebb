"""Exception hierarchy shared by every module in the package."""


class SoftbitError(ValueError):
    """Base class for all format, layout and parameter errors."""


class InvalidSoftbit(SoftbitError):
    def __init__(self, message, frame_index=None, word_index=None):
        self.frame_index = frame_index
        self.word_index = word_index
        where = []
        if frame_index is not None:
            where.append(f"frame {frame_index}")
        if word_index is not None:
            where.append(f"word {word_index}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class TruncatedStream(SoftbitError):
    pass


class ConfigMismatch(SoftbitError):
    pass


class LengthMismatch(SoftbitError):
    pass


class NotCanonical(SoftbitError):
    pass


class NotEmbedded(SoftbitError):
    pass


class EmptyStream(SoftbitError):
    pass


class SequenceGap(SoftbitError):
    pass


class LayoutMismatch(SoftbitError):
    pass


class InvalidParams(SoftbitError):
    pass
