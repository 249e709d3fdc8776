"""
PRIMERACE Schemas

Pydantic models for run configuration and for the JSON reports the CLI
emits. ``primerace schema <name>`` prints ``model_json_schema()`` of any
model in ``REPORT_MODELS``.
"""

from __future__ import annotations

import math
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from primerace.config import Config

OutputFormat = Literal["json", "csv", "table"]


class RunConfig(BaseModel):
    """Validated command options, checked before any computation starts."""

    model_config = ConfigDict(extra="forbid")

    command: str
    q: Optional[int] = Field(default=None, description="Modulus q >= 3")
    entries: List[int] = Field(default_factory=list, description="Race tuple residues")
    r: Optional[int] = Field(default=None, description="Number of competitors")
    y: Optional[float] = Field(default=None, description="Smoothing parameter for character sums")
    x: Optional[float] = Field(default=None, description="Smoothing parameter for the residue route")
    samples: Optional[int] = Field(default=None, description="Monte Carlo sample count")
    seed: Optional[int] = Field(default=None, description="Monte Carlo seed")
    x_max: Optional[int] = Field(default=None, description="Sieve limit for empirical races")
    output: OutputFormat = "json"
    calibration: Dict[str, float] = Field(default_factory=dict, description="Calibration constant overrides")

    @field_validator("q")
    @classmethod
    def _modulus(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 3:
            raise ValueError(f"q must be >= 3, got {v}")
        return v

    @field_validator("r")
    @classmethod
    def _r(cls, v: Optional[int]) -> Optional[int]:
        lo, hi = Config.Internal.MIN_SIMPLEX_R, Config.Internal.MAX_SIMPLEX_R
        if v is not None and not lo <= v <= hi:
            raise ValueError(f"r must be in [{lo}, {hi}], got {v}")
        return v

    @field_validator("y", "x")
    @classmethod
    def _positive(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not (v > 0 and math.isfinite(v)):
            raise ValueError(f"smoothing parameter must be positive and finite, got {v}")
        return v

    @field_validator("samples")
    @classmethod
    def _samples(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < Config.Internal.MIN_MC_SAMPLES:
            raise ValueError(f"samples must be >= {Config.Internal.MIN_MC_SAMPLES}, got {v}")
        return v

    @field_validator("seed")
    @classmethod
    def _seed(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 0:
            raise ValueError(f"seed must be non-negative, got {v}")
        return v

    @field_validator("x_max")
    @classmethod
    def _x_max(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and not 3 <= v <= Config.Internal.MAX_RACE_X:
            raise ValueError(f"X must be in [3, {Config.Internal.MAX_RACE_X}], got {v}")
        return v

    @field_validator("calibration")
    @classmethod
    def _calibration(cls, v: Dict[str, float]) -> Dict[str, float]:
        known = Config.calibration_snapshot()
        v = {name.upper(): value for name, value in v.items()}
        for name, value in v.items():
            if name not in known:
                raise ValueError(f"unknown calibration constant {name}; known: {', '.join(sorted(known))}")
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"calibration constant {name} must be positive")
        if v.get("CROSS_ROUTE_C0", 0.0) > 25:
            raise ValueError("CROSS_ROUTE_C0 must be <= 25")
        return v

    @model_validator(mode="after")
    def _tuple(self) -> "RunConfig":
        if self.entries:
            if self.q is None:
                raise ValueError("a tuple needs a modulus q")
            reduced = [a % self.q for a in self.entries]
            if len(set(reduced)) != len(reduced):
                raise ValueError(f"tuple entries {self.entries} are not distinct mod {self.q}")
            bad = [a for a in self.entries if math.gcd(a, self.q) != 1]
            if bad:
                raise ValueError(f"entries {bad} are not units mod {self.q}")
            if self.r is not None and self.r != len(self.entries):
                raise ValueError(f"r={self.r} does not match the tuple length {len(self.entries)}")
        return self


class DensityTermsModel(BaseModel):
    baseline: float
    alpha_term: float
    beta_term: float
    c2_term: float


class DensityReportModel(BaseModel):
    q: int
    tuple: List[int]
    r: int
    method: str
    delta: float
    terms: DensityTermsModel
    error_budget: float
    degenerate: bool
    seed: Optional[int] = None
    samples: Optional[int] = None
    std_error: Optional[float] = None
    closed_form: Optional[float] = None
    coefficient_errors: Optional[float] = None
    calibration: Dict[str, float]
    notes: List[str] = Field(default_factory=list)


class DensitySetModel(BaseModel):
    """All r! orderings of one tuple."""

    reports: List[DensityReportModel]
    sum: float


class CoefficientEntry(BaseModel):
    j: int
    k: Optional[int] = None
    value: float
    error: float


class SimplexTableModel(BaseModel):
    r: int
    method: str
    precision: float
    alpha: List[CoefficientEntry]
    lambda_: List[CoefficientEntry] = Field(alias="lambda")
    beta: List[CoefficientEntry]

    model_config = ConfigDict(populate_by_name=True)


class SmallResidualModel(BaseModel):
    predicted: float
    residual: float
    bound: float = Field(description="SMALL_B_C * log(q)^2")
    within_bound: bool


class BValueModel(BaseModel):
    q: int
    a: int
    b: int
    value: float
    route: str
    error_budget: float
    predicted_small: Optional[float] = None
    small_residual: Optional[SmallResidualModel] = None


class WitnessModel(BaseModel):
    kind: str
    indices: List[int]
    permutation: List[int]
    value: float


class BiasVerdictModel(BaseModel):
    classification: Literal["symmetric-unbiased-candidate", "biased", "q-extreme-predicted", "unbiased"]
    witness: Optional[WitnessModel] = None
    threshold: float
    margin: Optional[float] = None
    reasons: List[str] = Field(default_factory=list)


class ConstructionModel(BaseModel):
    q: int
    r: int
    variant: str
    tuple: List[int]
    signed: List[int]
    predicted_sign: int
    swapped: List[int]
    swapped_sign: int
    adjustments: List[str] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)


class OrderingMeasureModel(BaseModel):
    ordering: List[int]
    measure: float
    lead_changes: int


class RaceSummaryModel(BaseModel):
    q: int
    classes: List[int]
    x_max: int
    orderings: List[OrderingMeasureModel]
    ties: float
    total: float
    notes: List[str] = Field(default_factory=list)


REPORT_MODELS = {
    "run-config": RunConfig,
    "density": DensityReportModel,
    "density-set": DensitySetModel,
    "simplex": SimplexTableModel,
    "bq": BValueModel,
    "classify": BiasVerdictModel,
    "construct": ConstructionModel,
    "race": RaceSummaryModel,
}


__all__ = [
    "OutputFormat",
    "RunConfig",
    "DensityTermsModel",
    "DensityReportModel",
    "DensitySetModel",
    "CoefficientEntry",
    "SimplexTableModel",
    "BValueModel",
    "WitnessModel",
    "BiasVerdictModel",
    "ConstructionModel",
    "OrderingMeasureModel",
    "RaceSummaryModel",
    "REPORT_MODELS",
]
