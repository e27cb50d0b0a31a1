"""Exception hierarchy shared by all modules."""


class Hm2RbmError(Exception):
    pass


class InputError(Hm2RbmError, ValueError):
    """Arguments outside the documented domain (bad index, bad range...)."""


class ResourceError(Hm2RbmError, RuntimeError):
    """Exact computation refused because it would not fit (v too large)."""


class PrecisionError(Hm2RbmError, ArithmeticError):
    """A requested accuracy cannot be met with the given omega."""


class RegionError(Hm2RbmError, ValueError):
    """Target coefficients outside the attainable edge-pair region."""


class PlanError(Hm2RbmError, ValueError):
    def __init__(self, message, varset=None):
        super().__init__(message)
        self.varset = varset


class DomainError(Hm2RbmError, ValueError):
    """Support violation in a divergence (q = 0 where p > 0)."""


class RangeError(Hm2RbmError, OverflowError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
