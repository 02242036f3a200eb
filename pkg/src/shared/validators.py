# src/shared/validators.py
import itertools
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import sympy

from .utils import Logger

logger = Logger.setup_logger(__name__)

GENERATOR_NAME = re.compile(r'^[A-Za-z_][A-Za-z0-9_]*$')
RESERVED_NAMES = {'L', 'C'}
RATIONAL_TEXT = re.compile(r'^\s*-?\d+\s*(/\s*\d+\s*)?$')

@dataclass
class ValidationResult:
    """Result of validation operation"""
    success: bool
    error: str = ""
    details: Dict[str, Any] = None


@dataclass
class ResidualSummary:
    """Outcome of an exact verification sweep"""
    checked: int = 0
    nonzero: int = 0
    samples: List[Dict[str, Any]] = field(default_factory=list)
    worst: Optional[Dict[str, Any]] = None
    max_samples: int = 10

    def record(self, label: Any, residual: Any, is_zero: bool, size: int = 1) -> None:
        """Record one check; size ranks nonzero residuals (support size for elements)"""
        self.checked += 1
        if is_zero:
            return
        self.nonzero += 1
        entry = {'at': label, 'residual': residual, 'size': size}
        if len(self.samples) < self.max_samples:
            self.samples.append(entry)
        if self.worst is None or size > self.worst['size']:
            self.worst = entry

    @property
    def is_zero(self) -> bool:
        return self.nonzero == 0

    @property
    def failing_labels(self) -> List[Any]:
        return [entry['at'] for entry in self.samples]


class GammaValidator:
    """Validator for Γ documents"""

    MAX_RANK = 8

    @staticmethod
    def validate_document(document: Dict[str, Any]) -> ValidationResult:
        """Validate a Γ document against its invariants"""
        try:
            if not isinstance(document, dict):
                return ValidationResult(False, "Γ document must be a JSON object")

            rank = document.get('rank')
            if not isinstance(rank, int) or isinstance(rank, bool) or rank < 1:
                return ValidationResult(False, f"rank must be a positive integer, got {rank!r}")
            if rank > GammaValidator.MAX_RANK:
                return ValidationResult(False, f"rank {rank} exceeds the supported maximum {GammaValidator.MAX_RANK}")

            generators = document.get('generators')
            if not isinstance(generators, list) or len(generators) != rank:
                return ValidationResult(False, f"generators must list exactly {rank} names")
            for name in generators:
                if not isinstance(name, str) or not GENERATOR_NAME.match(name) or name in RESERVED_NAMES:
                    return ValidationResult(False, f"Invalid generator name: {name!r}")
            if len(set(generators)) != rank:
                return ValidationResult(False, f"Generator names must be distinct: {generators}")

            order = document.get('order') or {}
            priority = order.get('priority', list(range(1, rank + 1)))
            signs = order.get('signs', [1] * rank)
            if sorted(priority) != list(range(1, rank + 1)):
                return ValidationResult(False, f"order.priority must be a permutation of 1..{rank}, got {priority}")
            if len(signs) != rank or any(s not in (1, -1) for s in signs):
                return ValidationResult(False, f"order.signs must be {rank} values in {{1, -1}}, got {signs}")

            values = None
            specialization = document.get('specialization')
            if specialization is not None:
                result = GammaValidator._validate_specialization(specialization, generators)
                if not result.success:
                    return result
                values = result.details['values']
                check_window = document.get('check_window', 6)
                if not isinstance(check_window, int) or check_window < 1:
                    return ValidationResult(False, f"check_window must be a positive integer, got {check_window!r}")
                result = GammaValidator._validate_injective(values, check_window)
                if not result.success:
                    return result

            unit = document.get('unit')
            if unit is not None:
                if (not isinstance(unit, list) or len(unit) != rank
                        or any(not isinstance(n, int) or isinstance(n, bool) for n in unit)):
                    return ValidationResult(False, f"unit must be a list of {rank} integers, got {unit!r}")
                if values is None:
                    return ValidationResult(False, "unit needs a specialization: a symbolic degree never evaluates to 1")
                unit_value = sum(n * v for n, v in zip(unit, values))
                if unit_value != 1:
                    return ValidationResult(False, f"unit {unit} evaluates to {unit_value}, not 1")

            return ValidationResult(True)

        except Exception as e:
            return ValidationResult(False, f"Γ validation error: {str(e)}")

    @staticmethod
    def _validate_specialization(specialization: Any, generators: List[str]) -> ValidationResult:
        if not isinstance(specialization, dict) or set(specialization) != set(generators):
            return ValidationResult(False, "specialization must map every generator to a rational")
        values = []
        for name in generators:
            raw = specialization[name]
            if isinstance(raw, bool) or not RATIONAL_TEXT.match(str(raw)):
                return ValidationResult(False, f"specialization of {name} is not a rational: {raw!r}")
            try:
                value = sympy.Rational(str(raw).replace(' ', ''))
            except (TypeError, ValueError, ZeroDivisionError):
                return ValidationResult(False, f"specialization of {name} is not a rational: {specialization[name]!r}")
            if value == 0:
                return ValidationResult(False, f"specialization of {name} must be nonzero")
            values.append(value)
        return ValidationResult(True, details={'values': values})

    @staticmethod
    def _validate_injective(values: List[sympy.Rational], bound: int) -> ValidationResult:
        """No two distinct window degrees may evaluate to the same number"""
        seen: Dict[sympy.Rational, tuple] = {}
        for coords in itertools.product(range(-bound, bound + 1), repeat=len(values)):
            value = sum(n * v for n, v in zip(coords, values))
            if value in seen:
                return ValidationResult(
                    False,
                    f"specialization is not injective on the check window: {seen[value]} and {coords} both evaluate to {value}"
                )
            seen[value] = coords
        logger.debug("Specialization injective on check window", bound=bound, degrees=len(seen))
        return ValidationResult(True)


class WindowValidator:
    """Validator for verification windows"""

    @staticmethod
    def validate_bounds(degree_bound: int, level_bound: int) -> ValidationResult:
        if degree_bound < 1:
            return ValidationResult(False, f"Window degree bound must be positive, got {degree_bound}")
        if level_bound < 0:
            return ValidationResult(False, f"Window level bound must be nonnegative, got {level_bound}")
        return ValidationResult(True)
