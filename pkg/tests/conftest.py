"""
Pytest Configuration for primerace Tests

Puts the project root on sys.path, isolates the on-disk cache and provides
shared spectral contexts.
"""

import sys
from pathlib import Path

import pytest

# Add the parent directory to sys.path to ensure proper imports
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))


@pytest.fixture(scope="session", autouse=True)
def isolated_cache(tmp_path_factory):
    """Every test session writes its cache files to a temporary directory."""
    cache_dir = tmp_path_factory.mktemp("primerace-cache")
    with pytest.MonkeyPatch.context() as mp:
        mp.setenv("PRIMERACE_CACHE_DIR", str(cache_dir))
        mp.setenv("HOME", str(tmp_path_factory.mktemp("home")))
        yield cache_dir


@pytest.fixture(scope="session")
def ctx_4():
    from primerace.spectral import SpectralContext
    return SpectralContext.build(4)


@pytest.fixture(scope="session")
def ctx_12():
    from primerace.spectral import SpectralContext
    return SpectralContext.build(12)


@pytest.fixture(scope="session")
def ctx_101():
    from primerace.spectral import SpectralContext
    return SpectralContext.build(101)


@pytest.fixture(scope="session")
def ctx_101_char():
    from primerace.spectral import SpectralContext
    return SpectralContext.build(101, route="char")


@pytest.fixture(scope="session")
def coeffs3():
    from primerace.simplex import coefficient_table
    return coefficient_table(3)


@pytest.fixture(scope="session")
def ctx_420():
    from primerace.spectral import SpectralContext
    return SpectralContext.build(420)


@pytest.fixture(scope="session")
def ctx_10007():
    from primerace.spectral import SpectralContext
    return SpectralContext.build(10007)
