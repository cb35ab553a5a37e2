"""Exception types shared across the package.

The class names double as the error identifiers printed by the CLI, so
they are kept short and stable.
"""


class GroupError(Exception):
    """Base class for every domain error raised by this package."""

    @property
    def name(self) -> str:
        return type(self).__name__


class PresentationSyntaxError(GroupError):
    def __init__(self, position: int, expected: str, text: str = ""):
        self.position = position
        self.expected = expected
        self.text = text
        super().__init__(f"at position {position}: expected {expected}")


class UnknownGenerator(GroupError):
    def __init__(self, generator: str):
        self.generator = generator
        super().__init__(f"undeclared generator {generator!r}")


class EmptyAlphabet(GroupError):
    pass


class IndexOutOfRange(GroupError):
    pass


class AlphabetMismatch(GroupError):
    pass


class ResourceBudgetExceeded(GroupError):
    pass


class SeparationImpossible(GroupError):
    pass


class NotFiniteIndex(GroupError):
    pass


class WindowExhausted(GroupError):
    pass


class ConjugateDuplicate(GroupError):
    pass


class InvalidClassification(GroupError):
    pass


class NotABijection(GroupError):
    pass


class WindowMismatch(GroupError):
    pass


class EmptySet(GroupError):
    pass


class InsufficientFixedPoints(GroupError):
    pass


class NoFolnerInOrbit(GroupError):
    pass


class UnsupportedFormat(GroupError):
    pass
