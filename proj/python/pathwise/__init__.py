"""Python interface to the pathwise C++ library."""

from ._core import (
    ConfigError,
    ContractError,
    DomainError,
    Error,
    InsufficientDataError,
    InternalError,
    NumericalError,
    ParameterError,
    SamplePath,
    __version__,
    chen_check,
    experiment_names,
    f_families,
    g_families,
    holder_coefficient,
    initial_families,
    refine,
    run_experiment,
    sample_path,
    second_level,
    solve_fd,
    validate_config,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
