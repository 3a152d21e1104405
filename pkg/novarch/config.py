"""
Config - Runtime settings for novarch, read from NOVARCH_* environment variables.
"""

import os
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator


ENV_PREFIX = "NOVARCH_"


def to_fraction(value: Any) -> Fraction:
    """Parse "3/7", "0.25", 2 or a Fraction into an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not exponents")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # floats only enter through python literals in tests and scripts
        return Fraction(str(value))
    text = str(value).strip()
    if not text:
        raise ValueError("empty rational")
    return Fraction(text)


class Settings(BaseModel):
    """Working parameters shared by every module."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    precision: Fraction = Field(default=Fraction(10), description="Working precision E")
    slack: Fraction = Field(default=Fraction(1), description="Exponents within slack of E count as +inf")
    threads: int = Field(default=1, ge=1, description="Maximum worker threads")
    seed: int = Field(default=0, description="Default fuzz seed")
    hausdorff_threshold: Fraction = Field(default=Fraction(2), description="DIVERGES threshold on val_M growth")
    max_series_terms: int = Field(default=1000, ge=1, description="Guard on geometric series length")
    log_level: str = Field(default="WARNING", description="Logging level name")
    strict_schema: bool = Field(default=True, description="Reject unknown document fields")

    @field_validator("precision", "slack", "hausdorff_threshold", mode="before")
    @classmethod
    def _parse_fraction(cls, value: Any) -> Fraction:
        return to_fraction(value)

    @field_validator("precision")
    @classmethod
    def _positive_precision(cls, value: Fraction) -> Fraction:
        if value <= 0:
            raise ValueError("precision must be positive")
        return value

    @field_validator("log_level", mode="before")
    @classmethod
    def _upper_level(cls, value: Any) -> str:
        return str(value).upper()

    @property
    def trusted_horizon(self) -> Fraction:
        """Largest exponent still distinguishable from +inf."""
        return self.precision - self.slack

    def with_overrides(self, **overrides: Any) -> "Settings":
        """Copy with the non-None overrides applied (CLI flags win over env)."""
        data = self.model_dump()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return Settings(**data)

    @classmethod
    def from_env(cls) -> "Settings":
        """Build settings from the environment after loading .env."""
        load_dotenv()
        values: Dict[str, Any] = {}
        for name in cls.model_fields:
            raw = os.getenv(ENV_PREFIX + name.upper())
            if raw is not None and raw != "":
                values[name] = raw
        return cls(**values)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Process-wide settings instance."""
    return Settings.from_env()


def reset_settings() -> None:
    """Forget the cached settings (tests change the environment)."""
    get_settings.cache_clear()
