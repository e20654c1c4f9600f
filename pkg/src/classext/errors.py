"""Exception hierarchy. The CLI maps ``ClassExtError`` to exit code 2."""


class ClassExtError(Exception):
    """Base class for all library errors."""


class InvalidDiscriminant(ClassExtError, ValueError):
    pass


class DiscriminantMismatch(ClassExtError, ValueError):
    pass


class InconsistentPresentation(ClassExtError, ValueError):
    pass


class InvalidMorphism(ClassExtError, ValueError):
    pass


class UnsupportedRing(ClassExtError):
    pass


class UnsupportedExtension(ClassExtError):
    pass


class UnsupportedShape(ClassExtError):
    pass


class SizeBoundExceeded(ClassExtError):
    pass


class EnumerationImpossible(ClassExtError):
    pass


class ElementNotInAmbient(ClassExtError, ValueError):
    pass


class ParentMismatch(ClassExtError, ValueError):
    pass


class ZeroModule(ClassExtError, ValueError):
    pass


class NotIntermediate(ClassExtError, ValueError):
    pass


class NotInvertible(ClassExtError):
    pass


class NoRetraction(ClassExtError):
    pass


class MaximalIdealListInvalid(ClassExtError, ValueError):
    pass
