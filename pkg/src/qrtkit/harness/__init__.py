"""Verification harness: property suites, configuration, I/O and the CLI."""

from .config import SUITES, SuiteConfig
from .suites import Record, SuiteReport, run_suite

__all__ = ["SUITES", "SuiteConfig", "Record", "SuiteReport", "run_suite"]
