"""Shared exception types."""


class InputError(Exception):
    """Invalid user-supplied data: model files, records, CLI flags."""


class ConvergenceError(RuntimeError):
    """An iterative stage exhausted its budget without converging."""
