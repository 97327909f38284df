"""Configuration and report records."""

from .config import Construction, SuiteConfig
from .report import REPORT_SCHEMA, ExperimentReport

__all__ = [
    "Construction",
    "ExperimentReport",
    "REPORT_SCHEMA",
    "SuiteConfig",
]
