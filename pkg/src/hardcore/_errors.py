class NodeBudgetExceeded(RuntimeError):
    """A tree or walk enumeration hit its node budget."""


class StateCapExceeded(RuntimeError):
    """A branching-matrix construction hit its state cap."""
