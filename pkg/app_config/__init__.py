"""
Configuration package for the hypergeometric monodromy toolkit.
Centralizes all tunable parameters and constants.
"""

from .constants import (
    CLIConfig,
    ExactConfig,
    FCConfig,
    GHGConfig,
    NumericsConfig,
    OracleConfig,
    ParamsConfig,
    SuiteConfig,
)

__all__ = [
    'CLIConfig',
    'ExactConfig',
    'FCConfig',
    'GHGConfig',
    'NumericsConfig',
    'OracleConfig',
    'ParamsConfig',
    'SuiteConfig',
]
