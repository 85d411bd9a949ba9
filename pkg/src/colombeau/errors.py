class NumericalFailure(RuntimeError):
    """A numerical procedure could not meet its accuracy contract."""
