"""Data models and schemas for diamondnet."""

import math
from enum import Enum
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from diamondnet.exceptions import InvalidNetworkError

# Corollary constants: additive gap 1 + log2(3)/2, multiplicative ratio 4/ln(4/3).
ADDITIVE_GAP_BOUND = 1.0 + 0.5 * math.log2(3.0)
MULTIPLICATIVE_RATIO_BOUND = 4.0 / math.log(4.0 / 3.0)


class Regime(str, Enum):
    """Parameter regimes of the symmetric lower and upper bounds, in case order."""

    HIGH = "HIGH"
    BC_LIMITED = "BC_LIMITED"
    PRODUCT_HIGH = "PRODUCT_HIGH"
    PRODUCT_LOW = "PRODUCT_LOW"
    MAC_LIMITED = "MAC_LIMITED"


def _check_gain(value: float, name: str) -> float:
    if math.isnan(value) or value <= 0:
        raise ValueError(f"{name} must be positive (got {value})")
    return value


class SymmetricNetwork(BaseModel):
    """N relays sharing the source gain g and destination gain h.

    Either gain may be ``math.inf``; that sentinel is only accepted by the
    single-cut bounds used inside the asymmetric relaxations.
    """

    model_config = ConfigDict(frozen=True)

    n_relays: int = Field(ge=1)
    g: float
    h: float

    @field_validator("g", "h")
    @classmethod
    def _positive(cls, value: float, info) -> float:
        return _check_gain(value, info.field_name)

    @model_validator(mode="after")
    def _one_infinite_at_most(self) -> "SymmetricNetwork":
        if math.isinf(self.g) and math.isinf(self.h):
            raise ValueError("at most one of g, h may be infinite")
        return self

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.g) and math.isfinite(self.h)

    def require_finite(self) -> "SymmetricNetwork":
        """Return self, or raise if either gain is the infinite sentinel."""
        if not self.is_finite:
            raise InvalidNetworkError(
                f"finite gains required (got g={self.g}, h={self.h})"
            )
        return self


class AsymmetricNetwork(BaseModel):
    """Per-relay gain vectors (g_n), (h_n)."""

    model_config = ConfigDict(frozen=True)

    gains_g: list[float] = Field(min_length=1)
    gains_h: list[float] = Field(min_length=1)

    @field_validator("gains_g", "gains_h")
    @classmethod
    def _positive_finite(cls, values: list[float], info) -> list[float]:
        for i, value in enumerate(values):
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{info.field_name}[{i}] must be positive and finite ({value})")
        return values

    @model_validator(mode="after")
    def _same_length(self) -> "AsymmetricNetwork":
        if len(self.gains_g) != len(self.gains_h):
            raise ValueError(
                f"gain vectors differ in length ({len(self.gains_g)} vs {len(self.gains_h)})"
            )
        return self

    @property
    def n_relays(self) -> int:
        return len(self.gains_g)


class Config(BaseSettings):
    """Numeric settings for searches, oracles, simulation and sweeps."""

    model_config = SettingsConfigDict(env_prefix="DIAMONDNET_")

    # Duty cycle search: log-uniform grid then golden-section refinement
    delta_grid_points: int = 256
    delta_grid_min: float = 1e-12
    delta_rel_tol: float = 1e-10

    # Correlation search: uniform grid on [0, rho_cap] then golden-section refinement
    rho_grid_points: int = 1024
    rho_cap: float = 1.0 - 1e-6
    rho_tol: float = 1e-9
    rho_chunk_elements: int = 1 << 22  # grid rows x cut indices evaluated at once

    # Linear algebra oracle
    pinv_rcond: float = 1e-12
    negative_clamp: float = 1e-9
    max_oracle_relays: int = 20
    oracle_batch_size: int = 16384

    # Certification
    ordering_slack: float = 1e-9
    ratio_rel_slack: float = 1e-6

    # Monte Carlo
    sim_shard_symbols: int = 65536

    # Default sweep grid
    sweep_n_list: list[int] = [2, 4, 8, 16, 32, 64, 128, 256, 512, 1024]
    sweep_gain_min: float = 1e-8
    sweep_gain_max: float = 1e8
    sweep_points_per_decade: int = 2
    workers: Optional[int] = None


class SearchResolution(BaseModel):
    """Resolution of the numeric searches behind a report."""

    delta_grid_points: int
    delta_grid_min: float
    delta_rel_tol: float
    rho_grid_points: int
    rho_cap: float
    rho_tol: float
    pinv_rcond: float
    notes: list[str] = Field(default_factory=list)

    @classmethod
    def from_config(cls, config: Config, notes: Optional[list[str]] = None) -> "SearchResolution":
        return cls(
            delta_grid_points=config.delta_grid_points,
            delta_grid_min=config.delta_grid_min,
            delta_rel_tol=config.delta_rel_tol,
            rho_grid_points=config.rho_grid_points,
            rho_cap=config.rho_cap,
            rho_tol=config.rho_tol,
            pinv_rcond=config.pinv_rcond,
            notes=notes or [],
        )


CSV_COLUMNS = [
    "n",
    "g",
    "h",
    "regime",
    "r_af",
    "r_bursty_best",
    "delta_star",
    "thm1_lower",
    "df_rate",
    "bc_mac",
    "independent_cuts",
    "simplified_cutset",
    "rho_cutset",
    "rho_star",
    "thm2_upper",
    "additive_gap",
    "mult_ratio",
]


class BoundReport(BaseModel):
    """All symmetric lower/upper bounds and gaps for one network."""

    n_relays: int
    g: float
    h: float
    regime: Regime
    r_af: float
    r_bursty_best: Optional[float] = None
    delta_star: Optional[float] = None
    thm1_lower: float
    df_rate: float
    bc_mac: float
    independent_cuts: float
    simplified_cutset: float
    rho_cutset: Optional[float] = None
    rho_star: Optional[float] = None
    thm2_upper: float
    additive_gap: float
    multiplicative_ratio: float
    search_resolution: SearchResolution

    def csv_row(self) -> dict:
        """Flatten into the CSV column order."""
        return {
            "n": self.n_relays,
            "g": self.g,
            "h": self.h,
            "regime": self.regime.value,
            "r_af": self.r_af,
            "r_bursty_best": self.r_bursty_best,
            "delta_star": self.delta_star,
            "thm1_lower": self.thm1_lower,
            "df_rate": self.df_rate,
            "bc_mac": self.bc_mac,
            "independent_cuts": self.independent_cuts,
            "simplified_cutset": self.simplified_cutset,
            "rho_cutset": self.rho_cutset,
            "rho_star": self.rho_star,
            "thm2_upper": self.thm2_upper,
            "additive_gap": self.additive_gap,
            "mult_ratio": self.multiplicative_ratio,
        }


def log_grid(minimum: float, maximum: float, points_per_decade: int) -> list[float]:
    """Log-spaced grid from minimum upward in steps of 1/points_per_decade decades."""
    lo, hi = math.log10(minimum), math.log10(maximum)
    count = int(math.floor((hi - lo) * points_per_decade + 1e-9)) + 1
    return [float(v) for v in 10.0 ** (lo + np.arange(count) / points_per_decade)]


class SweepSpec(BaseModel):
    """A (N, g, h) certification sweep."""

    n_list: list[int] = Field(min_length=1)
    g_min: float = Field(gt=0)
    g_max: float = Field(gt=0)
    h_min: float = Field(gt=0)
    h_max: float = Field(gt=0)
    points_per_decade: int = Field(ge=1)
    output: Path
    format: Literal["json", "csv"] = "csv"

    @field_validator("n_list")
    @classmethod
    def _relay_counts(cls, values: list[int]) -> list[int]:
        if any(n < 1 for n in values):
            raise ValueError("relay counts must be >= 1")
        return values

    @model_validator(mode="after")
    def _nonempty_grids(self) -> "SweepSpec":
        if self.g_min > self.g_max or self.h_min > self.h_max:
            raise ValueError("empty gain grid (min exceeds max)")
        return self

    def g_grid(self) -> list[float]:
        return log_grid(self.g_min, self.g_max, self.points_per_decade)

    def h_grid(self) -> list[float]:
        return log_grid(self.h_min, self.h_max, self.points_per_decade)

    def points(self) -> list[tuple[int, float, float]]:
        """All (N, g, h) points in deterministic grid order."""
        return [(n, g, h) for n in self.n_list for g in self.g_grid() for h in self.h_grid()]
