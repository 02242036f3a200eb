# src/shared/__init__.py
"""
Shared modules for wittkit

This package contains shared utilities, configuration, and common functionality:
- Config / GammaConfig: environment configuration and the Γ document
- Exceptions: Custom exception classes
- Utils: Report formatting and structlog setup
- Validators: Γ and window validation, residual summaries of verification sweeps
"""

from .config import Config, GammaConfig
from .exceptions import (
    WittkitError,
    InputError,
    VerificationError,
    DivisionByZero,
    InvalidGammaConfig,
    InvalidScaleMap,
    LevelOutOfRange,
    CentralTermPresent,
    EmptyComponent,
    ZeroElement,
    ZeroGamma,
    BetaInSupport,
    MissingImage,
    NotADerivation,
    InconsistentAdditivity,
    TruncationTooShallow,
    OutOfWindow,
    MissingUnit,
    InconsistentC,
    NotACocycle,
    ExpressionSyntaxError,
    UnknownGenerator
)
from .utils import ReportFormatter, Logger
from .validators import GammaValidator, WindowValidator, ValidationResult, ResidualSummary

__all__ = [
    'Config',
    'GammaConfig',
    'WittkitError',
    'InputError',
    'VerificationError',
    'DivisionByZero',
    'InvalidGammaConfig',
    'InvalidScaleMap',
    'LevelOutOfRange',
    'CentralTermPresent',
    'EmptyComponent',
    'ZeroElement',
    'ZeroGamma',
    'BetaInSupport',
    'MissingImage',
    'NotADerivation',
    'InconsistentAdditivity',
    'TruncationTooShallow',
    'OutOfWindow',
    'MissingUnit',
    'InconsistentC',
    'NotACocycle',
    'ExpressionSyntaxError',
    'UnknownGenerator',
    'ReportFormatter',
    'Logger',
    'GammaValidator',
    'WindowValidator',
    'ValidationResult',
    'ResidualSummary'
]

__version__ = '1.0.0'
