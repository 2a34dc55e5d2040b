"""Exception hierarchy shared by all modules."""


class HyperscatterError(Exception):
    """Base class; ``where`` names the (module, operation) that raised."""

    def __init__(self, message, where=None):
        self.where = where
        if where:
            message = f"[{where}] {message}"
        super().__init__(message)


class PoleAtPoint(HyperscatterError):
    pass


class OverlappingArcs(HyperscatterError):
    pass


class PingPongViolation(HyperscatterError):
    pass


class BudgetExceeded(HyperscatterError):
    pass


class PointInLimitSet(HyperscatterError):
    pass


class NoConvergence(HyperscatterError):
    pass


class StencilOutOfDomain(HyperscatterError):
    pass


class WeightMismatch(HyperscatterError):
    pass


class PoleAtInteger(HyperscatterError):
    pass


class SymbolVanishes(HyperscatterError):
    pass


class FoldFailure(HyperscatterError):
    pass


class NearSingular(HyperscatterError):
    def __init__(self, message, sigma_min=None, where=None):
        self.sigma_min = sigma_min
        super().__init__(message, where)


class EvenK(HyperscatterError):
    pass


class DegeneratePresentation(HyperscatterError):
    pass


class InternalInconsistency(HyperscatterError):
    pass


class ConfigError(HyperscatterError):
    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class TaskError(HyperscatterError):
    pass


class IoError(HyperscatterError):
    pass
