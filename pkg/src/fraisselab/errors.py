"""Exception hierarchy. Every error carries a short machine-readable ``code``."""


class WorkbenchError(ValueError):
    code = "error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details

    def __str__(self):
        base = super().__str__()
        return f"{self.code}: {base}" if base != self.code else base


class SignatureMismatch(WorkbenchError):
    code = "signature-mismatch"


class CapExceeded(WorkbenchError):
    code = "cap-exceeded"


class NoAmalgamationStrategy(WorkbenchError):
    code = "no-amalgamation-strategy"


class NotReasonableWitness(WorkbenchError):
    code = "not-reasonable-witness"


class EmptyPattern(WorkbenchError):
    code = "empty-pattern"


class InsufficientSaturation(WorkbenchError):
    code = "insufficient-saturation"


class SupportTooLarge(WorkbenchError):
    code = "support-too-large"


class InvalidInput(WorkbenchError):
    code = "invalid-input"
