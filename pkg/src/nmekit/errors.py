"""Exception hierarchy."""


class NmeError(Exception):
    """Base class for every error raised by nmekit."""


class LevelOutOfRange(NmeError, IndexError):
    pass


class SpaceMismatch(NmeError, ValueError):
    pass


class DegenerateProfile(NmeError, ValueError):
    """Profile with empty support; the box reduces to ``{0}``."""


class InvalidDirection(NmeError, ValueError):
    pass


class NetTooLarge(NmeError, RuntimeError):
    def __init__(self, required, cap):
        super().__init__(f"epsilon-net needs {required} points, cap is {cap}")
        self.required = required
        self.cap = cap


class PremiseViolation(NmeError, ValueError):
    """Inputs fail a hypothesis the operation relies on."""


class ContractViolation(NmeError, RuntimeError):
    """A user oracle broke its declared contract."""


class TameBoundViolation(ContractViolation):
    def __init__(self, levels, lhs, rhs):
        lv = ", ".join(str(n) for n in levels)
        super().__init__(f"tame bound violated at levels [{lv}]")
        self.levels = list(levels)
        self.lhs = list(lhs)
        self.rhs = list(rhs)


class DomainError(NmeError, ValueError):
    """Query outside the region where an oracle is valid."""


class OrbitIndeterminate(NmeError, RuntimeError):
    def __init__(self, msg, trace):
        super().__init__(msg)
        self.trace = trace


class NoProgress(NmeError, RuntimeError):
    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class BudgetExceeded(NmeError, RuntimeError):
    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial
