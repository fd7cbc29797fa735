"""
Settings read from the environment
"""

import logging
import os
from functools import lru_cache
from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

# Load environment variables
load_dotenv()

_ENV = {
    "port": "PORT",
    "max_classes": "ITA_MAX_CLASSES",
    "max_exprs": "ITA_MAX_EXPRS",
    "max_states": "ITA_MAX_STATES",
    "depth": "ITA_DEPTH",
    "tctl_depth": "ITA_TCTL_DEPTH",
    "max_constraints": "ITA_MAX_CONSTRAINTS",
    "jobs": "ITA_JOBS",
    "storage_type": "STORAGE_TYPE",
    "sqlite_db_path": "SQLITE_DB_PATH",
    "cache_ttl": "ITA_CACHE_TTL",
    "log_level": "LOG_LEVEL",
}


class Settings(BaseModel):
    port: int = Field(8080, ge=1, le=65535)
    max_classes: int = Field(200000, ge=1)
    max_exprs: int = Field(5000, ge=1)
    max_states: int = Field(20000, ge=1)
    depth: int = Field(64, ge=1)
    tctl_depth: int = Field(12, ge=1)
    max_constraints: int = Field(50000, ge=1)
    jobs: int = Field(1, ge=1)
    storage_type: Literal["sqlite", "memory"] = "memory"
    sqlite_db_path: str = "data/results.db"
    cache_ttl: int = Field(3600, ge=1)
    log_level: str = "INFO"


class SettingsError(ValueError):
    """An environment variable holds an invalid value"""


@lru_cache()
def get_settings() -> Settings:
    """Process-wide settings; `get_settings.cache_clear()` re-reads the environment"""
    values = {
        field: os.environ[variable]
        for field, variable in _ENV.items()
        if os.environ.get(variable, "") != ""
    }
    try:
        return Settings(**values)
    except ValidationError as e:
        names = sorted({_ENV[str(err["loc"][0])] for err in e.errors() if err["loc"]})
        raise SettingsError(f"invalid value for {', '.join(names)}: {e}") from e


def configure_logging(level: Optional[str] = None) -> None:
    level = (level or get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
