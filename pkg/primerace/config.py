"""
PRIMERACE Configuration

Central configuration for primerace computations.
"""
from __future__ import annotations

import os
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from primerace.errors import ConfigurationError

# Optional dotenv support (install with: pip install python-dotenv)
try:
    from dotenv import load_dotenv
    DOTENV_AVAILABLE = True
except ImportError:
    DOTENV_AVAILABLE = False

logger = logging.getLogger(__name__)

ENV_PREFIX = "PRIMERACE_"
CALIBRATION_PREFIX = "CALIBRATION_"
VALID_LOG_LEVELS = {'DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'}


class Config:
    """
    Computation settings.

    Organized into:
    - Internal: file formats and hard limits (DO NOT MODIFY)
    - Env: Environment file configuration
    - Calibration: the implied constants of the asymptotic estimates
    - User Settings: Configurable per run
    """

    class Internal:
        """
        PRIMERACE Internal Configuration

        WARNING: THESE SETTINGS ARE PROTECTED AND CANNOT BE MODIFIED.
        Cache and trace readers depend on them.
        """
        # Binary formats
        CACHE_MAGIC = b"PRCS"
        CACHE_FORMAT_VERSION = 2
        TRACE_MAGIC = b"PRTR"
        TRACE_FORMAT_VERSION = 1

        # Desk-scale limits
        MAX_RACE_X = 10 ** 10
        MIN_SEGMENT_SIZE = 2 ** 16
        MIN_SIMPLEX_R = 2
        MAX_SIMPLEX_R = 8
        MIN_MC_SAMPLES = 10 ** 4

        # CSV headers (versioned with the trace format)
        B_MATRIX_HEADER = ("a", "b", "B", "route", "error_budget")

    class Env:
        """Environment file configuration"""
        file = ".env"  # Path to .env file (can be ".env.prod", ".env.dev", etc.)
        auto_load = True  # Automatically load .env file
        override = True  # Override existing environment variables

    class Calibration:
        """
        Constants hidden behind O(...) in the estimates.

        Calibrated once against the test moduli and frozen; every report
        echoes them.
        """
        SMOOTHING_TAIL_C = 1.0  # c in c*log(q)/sqrt(y) for smoothed L'/L sums
        RESIDUE_ROUTE_C = 1.0  # c in c*(|a|+|b|)*log(q)^2/q
        CROSS_ROUTE_C0 = 20.0  # |char - residue| <= C0*loglog(q) + budgets
        B_PHI_C = 4.0  # |B_q(a,b)| <= c*phi(q)
        DENSITY_BUDGET_C = 1.0  # series evaluator error budget constant
        TWO_WAY_BUDGET_C = 1.0  # two-way evaluator error budget constant
        EXTREME_TAU = 0.01  # q-extreme threshold tau/log(q)
        SMALL_B_C = 30.0  # |E| <= c*log(q)^2 for the small-residue predictor

    # Logging
    LOG_LEVEL = "INFO"
    VERBOSE_LOGGING = False

    # Cache
    CACHE_ENABLED = True
    CACHE_DIR = str(Path.home() / ".primerace" / "cache")

    # Parallelism and sieving
    WORKERS = min(8, os.cpu_count() or 1)
    SEGMENT_SIZE = 2 ** 22

    # Smoothed sums: default y = min(max(q^2, SMOOTHING_Y_MIN), SMOOTHING_Y_CAP)
    SMOOTHING_Y_MIN = 10 ** 6
    SMOOTHING_Y_CAP = 4 * 10 ** 6
    TRUNCATION_FACTOR = 2.0  # sums run over n <= factor * y * log(y)

    # Arithmetic tables
    SPF_TABLE_LIMIT = 10 ** 8
    SQRT_ENUMERATION_LIMIT = 10 ** 6

    # Monte Carlo
    MC_SAMPLES = 10 ** 6
    MC_CHUNK = 2 ** 18
    SEED = 20240601

    # Spectral route used by density evaluators ("residue" or "char")
    B_ROUTE = "residue"

    # Subtract log(pi) per character in the zero sums (classical explicit formula)
    ZERO_SUM_LOG_PI = False

    # Simplex quadrature
    SIMPLEX_PRECISION = 1e-10

    # Race traces
    CHECKPOINTS_PER_DECADE = 10

    def __init_subclass__(cls, **kwargs):
        """
        Validate that child classes don't override protected attributes.

        This hook is called automatically when a class inherits from Config.
        """
        super().__init_subclass__(**kwargs)

        if 'Internal' in cls.__dict__:
            raise TypeError(
                f"Cannot override Config.Internal in {cls.__name__}. "
                "Config.Internal holds file-format and limit settings."
            )

    @classmethod
    def cache_path(cls) -> Path:
        """Resolved cache directory (PRIMERACE_CACHE_DIR wins over the class default)."""
        override = os.environ.get(f"{ENV_PREFIX}CACHE_DIR")
        return Path(override or cls.CACHE_DIR).expanduser()

    @classmethod
    def calibration_snapshot(cls) -> Dict[str, float]:
        """All calibration constants as a plain dict."""
        return {
            name: getattr(cls.Calibration, name)
            for name in dir(cls.Calibration)
            if name.isupper()
        }

    @classmethod
    def apply_calibration(cls, overrides: Dict[str, float]) -> None:
        """Set calibration constants by name; unknown names are rejected."""
        known = cls.calibration_snapshot()
        for name, value in overrides.items():
            key = name.upper()
            if key not in known:
                raise ConfigurationError(
                    f"Unknown calibration constant: {name}",
                    suggestion=f"Known constants: {', '.join(sorted(known))}",
                )
            setattr(cls.Calibration, key, float(value))

    @classmethod
    def derive(cls, name: str = "RunConfig", calibration: Optional[Dict[str, float]] = None, **settings: Any):
        """
        Build a throwaway subclass with its own Calibration copy.

        Overrides applied here never leak into the parent class.
        """
        calibration_cls = type("Calibration", (cls.Calibration,), {})
        derived = type(name, (cls,), {"Calibration": calibration_cls, **settings})
        if calibration:
            derived.apply_calibration(calibration)
        return derived

    @classmethod
    def load_from_env(cls, env_file: Optional[str] = None):
        """
        Load configuration from .env file and environment variables.

        All environment variables must be prefixed with PRIMERACE_*;
        PRIMERACE_CALIBRATION_<NAME> sets Config.Calibration.<NAME>.

        Example .env file:
            PRIMERACE_LOG_LEVEL=DEBUG
            PRIMERACE_WORKERS=4
            PRIMERACE_CACHE_DIR=/scratch/primerace
            PRIMERACE_CALIBRATION_EXTREME_TAU=0.02

        Example usage:
            Config.load_from_env()  # Uses Config.Env.file
            Config.load_from_env(".env.prod")  # Custom file
        """
        env_file_path = env_file or cls.Env.file

        if DOTENV_AVAILABLE and cls.Env.auto_load:
            env_path = Path(env_file_path)
            if env_path.exists():
                load_dotenv(env_path, override=cls.Env.override)
                if cls.VERBOSE_LOGGING:
                    logger.info(f"Loaded environment from: {env_path}")
            elif cls.VERBOSE_LOGGING:
                logger.info(f".env file not found: {env_path}")
        elif not DOTENV_AVAILABLE and cls.Env.auto_load:
            if cls.VERBOSE_LOGGING:
                logger.warning("python-dotenv not installed. Install with: pip install python-dotenv")

        protected = {name for name in dir(cls.Internal) if name.isupper()}

        for env_key, env_value in os.environ.items():
            if not env_key.startswith(ENV_PREFIX):
                continue

            attr_name = env_key[len(ENV_PREFIX):]

            if attr_name in protected:
                logger.warning(f"Cannot override internal setting: {env_key}")
                continue

            try:
                parsed_value = _auto_detect(env_value)

                if attr_name.startswith(CALIBRATION_PREFIX):
                    cls.apply_calibration({attr_name[len(CALIBRATION_PREFIX):]: parsed_value})
                    continue

                if attr_name == 'LOG_LEVEL':
                    if not isinstance(parsed_value, str) or parsed_value.upper() not in VALID_LOG_LEVELS:
                        logger.warning(
                            f"Invalid LOG_LEVEL: {env_value}. "
                            f"Must be one of: {', '.join(sorted(VALID_LOG_LEVELS))}. "
                            f"Using default value."
                        )
                        continue
                    parsed_value = parsed_value.upper()

                setattr(cls, attr_name, parsed_value)

                if cls.VERBOSE_LOGGING:
                    logger.info(f"Auto-set {attr_name} = {parsed_value} (from {env_key})")

            except (ValueError, TypeError, ConfigurationError) as e:
                logger.warning(
                    f"Failed to parse {env_key}: {e}. "
                    f"Environment variable will be ignored."
                )

        return cls

    @classmethod
    def validate(cls) -> bool:
        """
        Validate configuration settings.

        Returns:
            True if configuration is valid

        Raises:
            ConfigurationError: on the first invalid setting
        """
        if cls.LOG_LEVEL.upper() not in VALID_LOG_LEVELS:
            raise ConfigurationError(f"LOG_LEVEL must be one of: {', '.join(sorted(VALID_LOG_LEVELS))}")

        if int(cls.WORKERS) < 1:
            raise ConfigurationError("WORKERS must be at least 1")

        if int(cls.SEGMENT_SIZE) < cls.Internal.MIN_SEGMENT_SIZE:
            raise ConfigurationError(
                f"SEGMENT_SIZE must be >= {cls.Internal.MIN_SEGMENT_SIZE}",
                suggestion="Use a power of two such as 4194304",
            )

        if cls.SMOOTHING_Y_CAP < cls.SMOOTHING_Y_MIN:
            raise ConfigurationError("SMOOTHING_Y_CAP must not be below SMOOTHING_Y_MIN")

        if cls.B_ROUTE not in ("residue", "char"):
            raise ConfigurationError("B_ROUTE must be 'residue' or 'char'")

        if not 0 < cls.Calibration.CROSS_ROUTE_C0 <= 25:
            raise ConfigurationError("Calibration.CROSS_ROUTE_C0 must lie in (0, 25]")

        if cls.Calibration.EXTREME_TAU <= 0:
            raise ConfigurationError("Calibration.EXTREME_TAU must be positive")

        return True


def _auto_detect(env_value: str) -> Any:
    """Auto-detect the type of an environment value."""
    if env_value.lower() in ('null', 'none', '~', ''):
        return None

    if env_value.lower() in ('true', 'false', 'yes', 'no', 'on', 'off'):
        return env_value.lower() in ('true', 'yes', 'on')

    if env_value.lstrip('-').isdigit():
        return int(env_value)

    if ',' in env_value:
        return [item.strip() for item in env_value.split(',') if item.strip()]

    try:
        return float(env_value)
    except ValueError:
        return env_value


class DevConfig(Config):
    """Development configuration: verbose logs, small Monte Carlo budgets."""

    class Env:
        """Development environment configuration"""
        file = ".env.dev"
        auto_load = True
        override = True

    VERBOSE_LOGGING = True
    LOG_LEVEL = "DEBUG"
    MC_SAMPLES = 10 ** 5
    SMOOTHING_Y_CAP = 10 ** 6


class ProdConfig(Config):
    """Long-run configuration for acceptance-size computations."""

    class Env:
        """Production environment configuration"""
        file = ".env.prod"
        auto_load = True
        override = False  # Don't override system env vars

    VERBOSE_LOGGING = False
    LOG_LEVEL = "WARNING"
    MC_SAMPLES = 10 ** 7


# Default configuration
DEFAULT_CONFIG = Config
