from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Engine settings"""
    service_name: str = Field("perkh", description="Service name")

    # Logging settings
    log_level: str = Field("INFO", description="Logging level")

    # Cube and parallelism
    max_crossings: int = Field(16, description="Largest cube (number of crossings) accepted")
    threads: int = Field(0, description="Worker threads for per-block work, 0 = available parallelism")
    dense_column_threshold: int = Field(
        512, description="Matrices with fewer columns are reduced densely with numpy"
    )

    # Symmetry checks
    symmetry_sample_bound: int = Field(
        10, description="Check circle triviality on all 2^n resolutions when n is at most this"
    )

    # Moduli counting
    poset_index_bound: int = Field(12, description="Largest index accepted by build_poset")
    order_check_index: int = Field(
        5, description="count_pi0_chains compares every surgery order up to this index"
    )

    # Periodicity search
    search_node_cap: int = Field(10_000_000, description="Node budget of the decomposition search")

    # Bundled corpus
    corpus_dir: Optional[Path] = Field(
        None, validate_default=True, description="Directory of bundled diagram files"
    )

    @field_validator("log_level", mode="before")
    @classmethod
    def upper_level(cls, v):
        return str(v).upper()

    @field_validator("max_crossings")
    @classmethod
    def positive_cap(cls, v):
        if v <= 0:
            raise ValueError("max_crossings must be positive")
        return v

    @field_validator("corpus_dir", mode="before")
    @classmethod
    def set_corpus_dir(cls, v):
        """Default to the corpus shipped next to the package"""
        if v is None:
            return Path(__file__).resolve().parents[2] / "corpus"
        return v

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="PERKH_"
    )


@lru_cache
def get_settings() -> Settings:
    return Settings()
