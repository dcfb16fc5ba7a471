"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Arguments violate a documented precondition (bad range, non-coprime modulus, ...)."""


class ResourceError(RuntimeError):
    """A request exceeds a configured resource cap (e.g. the statevector qubit limit)."""


class ContractError(RuntimeError):
    """An operation was used outside its contract or an internal invariant failed."""
