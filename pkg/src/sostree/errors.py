"""Exception hierarchy shared by the solver, classifier and oracle modules."""


class SOSError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 1


class DomainError(SOSError, ValueError):
    """An argument lies outside the mathematical domain of a formula."""


class ContractError(SOSError, ValueError):
    """Inputs are individually valid but inconsistent with each other."""


class RegimeError(SOSError):
    """The requested quantity does not exist in the current parameter regime."""

    exit_code = 3


class DegenerateError(RegimeError):
    """A threshold is undefined (e.g. division by a vanishing root h*)."""


class ScanWindowError(SOSError):
    """A root that must exist was not found inside the scan window."""

    exit_code = 3


class BudgetError(SOSError):
    """Exact enumeration would exceed the configured vertex budget."""

    exit_code = 5
