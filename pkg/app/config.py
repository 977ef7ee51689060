import os
from typing import Dict, Mapping, Optional

from dotenv import load_dotenv

from app.exceptions import ConfigError

load_dotenv()

DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///./data/processed/verification.db")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
API_HOST = os.getenv("API_HOST", "0.0.0.0")
API_PORT = int(os.getenv("API_PORT", "8000"))
OUTPUT_DIR = os.getenv("OUTPUT_DIR", "data/processed")
TETRA_SEED = int(os.getenv("TETRA_SEED", "0"))

DEFAULT_TOLERANCES: Dict[str, float] = {
    "tol_sym": 1e-10,
    "tol_unit": 1e-10,
    "tol_contour": 1e-8,
    "eps_den": 1e-6,
    "tol_fix": 1e-11,
    "tol_eq": 1e-7,
    "tol_boundary": 1e-9,
    "tol_singular": 1e-12,
    "tol_degenerate": 1e-12,
}


def _env_tolerances() -> Dict[str, float]:
    values = dict(DEFAULT_TOLERANCES)
    for name in DEFAULT_TOLERANCES:
        raw = os.getenv(f"TETRA_TOL_{name.upper()}")
        if raw is not None:
            try:
                values[name] = float(raw)
            except ValueError as e:
                raise ConfigError(f"TETRA_TOL_{name.upper()} is not a number: {raw!r}") from e
    return values


TOLERANCES = _env_tolerances()


def resolve_tolerances(overrides: Optional[Mapping[str, float]] = None) -> Dict[str, float]:
    """Merge tolerance overrides on top of the environment defaults"""
    resolved = dict(TOLERANCES)
    for name, value in (overrides or {}).items():
        if name not in DEFAULT_TOLERANCES:
            raise ConfigError(f"Unknown tolerance name: {name}")
        value = float(value)
        if not value > 0:
            raise ConfigError(f"Tolerance {name} must be positive, got {value}")
        resolved[name] = value
    return resolved


def default_seed() -> int:
    """Seed fallback read at call time so TETRA_SEED set after import still counts"""
    raw = os.getenv("TETRA_SEED")
    if raw is None:
        return TETRA_SEED
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"TETRA_SEED is not an integer: {raw!r}") from e
