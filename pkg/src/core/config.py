from pathlib import Path

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    # App Settings
    APP_NAME: str = "Stanley Sequence Toolkit"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Enumeration cache (JSON-lines, append-only, re-verified on load)
    STANLEY_CACHE: Path = Field(Path("data/modular_sets.jsonl"), alias="STANLEY_CACHE")

    # Modular set enumeration
    ENUMERATION_MAX_MODULUS: int = 60

    # Independence detection and character search
    SEARCH_K_MAX: int = 8
    ANALYZE_K_MAX: int = 10
    SEARCH_MAX_GENERATOR_SETS: int = 250_000
    # A certificate must hold on at least this many doubling levels.
    MIN_VERIFIED_LEVELS: int = 2

    # Character prover budgets
    PROVER_BOUND_FACTOR: int = 4
    PROVER_MAX_DEPTH: int = 40
    PROVER_MAX_NODES: int = 1_000_000
    PROVER_MAX_SECONDS: float = 120.0

    # Dispatch to the concrete greedy sequence
    DISPATCH_PREFIX_TERMS: int = 4096
    DISPATCH_L_MAX: int = 4
    CONCRETIZE_WINDOW: int = 256

    # Process fan-out for enumeration and search
    WORKERS: int = 1

    # Config for Pydantic V2
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",  # Ignore extra env vars not defined here
        populate_by_name=True,
    )


# Singleton instance to be imported across the app
settings = Settings()
