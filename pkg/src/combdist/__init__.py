"""Conway-Maxwell Binomial, Poisson and Multinomial distributions."""

from .comb import (
    CombNatural,
    CombParams,
    generating_function,
    log_normalizer,
    moments,
    pmf,
    pmf_natural,
    sample,
)
from .errors import (
    CapExceededError,
    CombError,
    DivergentSeriesError,
    DomainError,
    NumericError,
    OptimizationError,
)
from .inference import FrequencyTable, Hyperparams, map_estimate

__version__ = "0.1.0"
