"""Configuration management utilities."""
import logging
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    """Process-level settings, read from HYBRID_MTC_* environment variables."""

    model_config = SettingsConfigDict(env_prefix="HYBRID_MTC_", extra="ignore")

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    # Execution
    WORKERS: int = 1
    OUTPUT_DIR: str = "results"

    # Numerics
    TAIL_TOLERANCE: float = 1e-5
    QUAD_REL_TOL_1D: float = 1e-8
    QUAD_REL_TOL_2D: float = 1e-6
    OSC_CUTOFF: float = 1e-9
    QUAD_MAX_SUBDIVISIONS: int = 200

    def check_ranges(self) -> bool:
        """Validate numeric settings, logging every problem found."""
        problems = []
        if not isinstance(logging.getLevelName(self.LOG_LEVEL.upper()), int):
            problems.append(f"LOG_LEVEL={self.LOG_LEVEL}")
        if self.WORKERS < 1:
            problems.append(f"WORKERS={self.WORKERS}")
        if not 0.0 < self.TAIL_TOLERANCE < 1.0:
            problems.append(f"TAIL_TOLERANCE={self.TAIL_TOLERANCE}")
        for name in ("QUAD_REL_TOL_1D", "QUAD_REL_TOL_2D", "OSC_CUTOFF"):
            if getattr(self, name) <= 0.0:
                problems.append(f"{name}={getattr(self, name)}")
        if self.QUAD_MAX_SUBDIVISIONS < 1:
            problems.append(f"QUAD_MAX_SUBDIVISIONS={self.QUAD_MAX_SUBDIVISIONS}")

        if problems:
            logger.error(f"Invalid configuration: {', '.join(problems)}")
            return False

        logger.info("Configuration validated successfully")
        return True


@lru_cache(maxsize=1)
def get_config() -> Settings:
    """Get configuration instance."""
    return Settings()


def configure_logging(log_level: str = "INFO", log_file: Optional[str] = None):
    """Configure logging for the application."""
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )
