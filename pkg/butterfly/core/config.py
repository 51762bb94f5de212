from __future__ import annotations

from pathlib import Path
from typing import ClassVar, Literal

from pydantic import BaseModel, Field, model_validator
from pydantic_settings import BaseSettings


class LimitsConfig(BaseModel):
    """Resource caps for generation, rank computation and exhaustive search."""

    max_r: int = 20
    rank_caps: dict[str, int] = Field(default_factory=dict)
    search_max_candidates: int = 5_000_000
    search_max_seconds: float = 60.0

    FIELD_RANK_CAPS: ClassVar[dict[str, int]] = {
        "q": 8,
        "gf2": 12,
        "gf3": 8,
    }

    @model_validator(mode="after")
    def fill_rank_caps(self):
        """Use the built-in cap for every field that was not configured explicitly."""
        for name, cap in self.FIELD_RANK_CAPS.items():
            self.rank_caps.setdefault(name, cap)
        return self

    def rank_cap(self, field_name: str) -> int:
        if field_name in self.rank_caps:
            return self.rank_caps[field_name]
        # other prime fields share the gf3 budget
        return self.rank_caps["gf3"]


class AppConfig(BaseSettings):
    """Base configuration for the toolkit."""

    memory_cap_mb: int = 2048
    default_fields: list[str] = Field(default_factory=lambda: ["gf2"])
    jobs: int = 1
    cache_dir: Path | None = None
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    http_port: int = 8000
    limits: LimitsConfig = Field(default_factory=LimitsConfig)

    model_config = {
        "env_prefix": "BUTTERFLY_",
        "env_nested_delimiter": "__",
        "extra": "ignore",
        "env_file": ".env",
    }

    @property
    def memory_cap_bytes(self) -> int:
        return self.memory_cap_mb * 1024 * 1024
