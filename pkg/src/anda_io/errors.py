from typing import Optional


class AndaErrorMeta(type):
    """
    This metaclass adds a default __init__ method that takes an optional `message: str` and
    an optional `cause: Exception` to subclasses of `AndaError`.
    """

    def __new__(cls, name, bases, attrs):
        if name != "AndaError":
            if not any(issubclass(base, AndaError) for base in bases):
                raise TypeError(
                    f"Class {name} must inherit from {AndaError.__name__}. "
                    f"Do not use this metaclass directly. Inherit from {AndaError.__name__} instead."
                )

        return super().__new__(cls, name, bases, attrs)

    def __init__(cls, name, bases, attrs):
        if "__init__" not in attrs:

            def __init__(
                self,
                message: Optional[str] = None,
                cause: Optional[Exception] = None,
                **kwargs,
            ):
                super(cls, self).__init__(message, cause, **kwargs)

            setattr(cls, "__init__", __init__)
        super().__init__(name, bases, attrs)


class AndaError(Exception, metaclass=AndaErrorMeta):
    """
    Base class for all anda_io errors. EXIT_CODE is what the CLI exits with.
    """

    EXIT_CODE = 1

    def __init__(
        self, message: Optional[str] = None, cause: Optional[Exception] = None
    ):
        super().__init__(message)
        self.message = message
        self.cause = cause

    def __str__(self) -> str:
        if self.cause is not None and self.message:
            return f"{self.message} ({self.cause})"
        return self.message or self.__class__.__name__


class ValidationFailure(AndaError):
    EXIT_CODE = 2


class UsageError(ValidationFailure):
    pass


class InvalidParams(ValidationFailure):
    pass


class NonFiniteInput(ValidationFailure):
    pass


class ShapeMismatch(ValidationFailure):
    pass


class LengthMismatch(ValidationFailure):
    pass


class GroupTooWide(ValidationFailure):
    pass


class PlaneCountMismatch(ValidationFailure):
    pass


class ContainerError(ValidationFailure):
    pass


class BadMagic(ContainerError):
    pass


class VersionUnsupported(ContainerError):
    pass


class TruncatedStream(ContainerError):
    pass


class DtypeUnsupported(ContainerError):
    pass


class RankUnsupported(DtypeUnsupported):
    pass


class AccumulatorOverflow(AndaError):
    pass


class TileExceedsBuffer(AndaError):
    EXIT_CODE = 4


class InfeasibleSearch(AndaError):
    EXIT_CODE = 3


class OracleFailure(AndaError):
    def __init__(
        self,
        message: Optional[str] = None,
        cause: Optional[Exception] = None,
        combination=None,
    ):
        super().__init__(message, cause)
        self.combination = combination

    def __str__(self) -> str:
        text = super().__str__()
        if self.combination is not None:
            return f"{text} [combination {self.combination}]"
        return text


class OracleTimeout(OracleFailure):
    pass


class MalformedResponse(OracleFailure):
    pass


class NonFiniteScore(OracleFailure):
    pass
