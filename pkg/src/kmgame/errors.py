"""Exception hierarchy shared by every kmgame module."""


class KMGameError(Exception):
    """Base class for all errors raised by kmgame."""


class InvalidCollapseMap(KMGameError, ValueError):
    pass


class InvalidSignMap(KMGameError, ValueError):
    pass


class InadmissibleTree(KMGameError, ValueError):
    pass


class MoveNotAcceptable(KMGameError, ValueError):
    """A signed KM move or wild move was requested outside its domain."""


class NotTamed(KMGameError, ValueError):
    pass


class NotReference(KMGameError, ValueError):
    pass


class DomainError(KMGameError, ValueError):
    pass


class ResourceLimitError(KMGameError):
    """The requested size exceeds a configured cap."""


class KernelShapeError(KMGameError, ValueError):
    pass


class SymmetryError(KMGameError, ValueError):
    """A kernel that must be a symmetric density is not one."""
