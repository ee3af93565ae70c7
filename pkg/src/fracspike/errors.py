"""Exception taxonomy: configuration problems vs solver breakdowns.

The CLI maps ConfigError to exit status 2 and SolverDivergence to 3, so
everything user-facing should raise one of these rather than bare ValueError
once inputs have been validated.
"""


class FracspikeError(Exception):
    """Base class for package errors."""


class ConfigError(FracspikeError):
    """Invalid scenario, option, or parameter combination."""


class SolverDivergence(FracspikeError):
    """An iterative solver failed to converge or left its basin."""
