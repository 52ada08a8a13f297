"""Exception types shared across the package."""


class JsrlabError(Exception):
    """Base class for all package errors."""


class SpecError(JsrlabError, ValueError):
    """Malformed distribution or certificate input.

    ``field`` names the offending entry of the input document.
    """

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class AssumptionViolated(JsrlabError):
    """Neither the even-degree (A1) nor the cone-invariance (A2) assumption holds."""


class DimensionCapError(JsrlabError):
    """A dense Kronecker power would exceed the configured side length."""


class EigensolverFailure(JsrlabError):
    pass


class BudgetExceeded(JsrlabError):
    pass


class GammaTooSmall(JsrlabError):
    """The requested rate does not exceed the p-radius."""


class DegenerateFit(JsrlabError):
    pass
