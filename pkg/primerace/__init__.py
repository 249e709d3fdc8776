"""
PRIMERACE - Chebyshev bias and prime number races

Logarithmic densities of races pi(x;q,a_1) > ... > pi(x;q,a_r) from the
zeros of Dirichlet L-functions, checked against sieved prime counts.

Quick Start:
    from primerace import SpectralContext, RaceTuple, evaluate

    ctx = SpectralContext.build(101)
    report = evaluate(ctx, RaceTuple.of(101, [2, 5, 11]), method="series")
    print(report.delta, report.error_budget)

Full Import Guide:
    # Core
    from primerace import Config, SpectralContext, RaceTuple, evaluate

    # Coefficients and constructions
    from primerace.simplex import coefficient_table, mc_estimate
    from primerace.bias import classify_bias, construct_biased_tuple

    # Empirical races
    from primerace.race import race_counts, ordering_measures

    # Logging
    from primerace.logging import get_logger
"""

__version__ = "0.1.0"


from primerace.config import Config, DevConfig, ProdConfig
from primerace.errors import (
    ConfigurationError,
    ConstructionError,
    DegenerateContextError,
    DomainError,
    PrimeRaceError,
    PreconditionError,
)

_LAZY = {
    "SpectralContext": "primerace.spectral",
    "RaceTuple": "primerace.densities",
    "DensityReport": "primerace.densities",
    "evaluate": "primerace.densities",
    "all_orderings": "primerace.densities",
    "coefficient_table": "primerace.simplex",
    "classify_bias": "primerace.bias",
    "construct_biased_tuple": "primerace.bias",
    "race_counts": "primerace.race",
    "ordering_measures": "primerace.race",
}


def __getattr__(name: str):
    """Lazy import of the numeric modules (numpy/scipy/sympy load on first use)."""
    module = _LAZY.get(name)
    if module is not None:
        import importlib

        return getattr(importlib.import_module(module), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "__version__",
    "Config",
    "DevConfig",
    "ProdConfig",
    "PrimeRaceError",
    "DomainError",
    "PreconditionError",
    "ConstructionError",
    "DegenerateContextError",
    "ConfigurationError",
    *_LAZY,
]
