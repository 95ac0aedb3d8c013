"""Exception hierarchy shared by every solver."""


class PricingError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class InvalidInstance(PricingError):
    pass


class NegativeValue(InvalidInstance):
    pass


class NonMonotoneMarginals(InvalidInstance):
    pass


class NonConcaveStorage(InvalidInstance):
    pass


class DimensionMismatch(InvalidInstance):
    pass


class PeriodOutOfRange(PricingError):
    pass


class PeriodBeforeContour(PricingError):
    pass


class ConcaveNotSupported(PricingError):
    pass


class InstanceTooLarge(PricingError):
    pass


class StateSpaceTooLarge(PricingError):
    pass


class MultiBuyerNotSupported(PricingError):
    pass


class SingleBuyerNotSupported(PricingError):
    pass


class InfeasibleAction(PricingError):
    pass


class InventoryBoundExceeded(PricingError):
    pass


class ParameterOutOfRange(PricingError):
    pass
