"""Utility functions package."""
from .config import Settings, configure_logging, get_config
from .errors import AccuracyError, DomainError, ScenarioError

__all__ = [
    'Settings',
    'configure_logging',
    'get_config',
    'AccuracyError',
    'DomainError',
    'ScenarioError',
]
