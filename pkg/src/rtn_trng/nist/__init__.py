"""Statistical test battery for binary sequences."""

from .battery import ROWS, BatteryReport, InputTooShort, TestParams, run_battery
from .sts import TestResult

__all__ = ["ROWS", "BatteryReport", "InputTooShort", "TestParams", "TestResult", "run_battery"]
