# src/shared/config.py
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from .exceptions import InputError, InvalidGammaConfig


class Config:
    """Centralized configuration management"""

    def __init__(self):
        self.ENVIRONMENT = os.getenv('WITTKIT_ENVIRONMENT', 'dev')
        self.GAMMA_PATH = os.getenv('WITTKIT_GAMMA')
        self.LOG_LEVEL = os.getenv('WITTKIT_LOG_LEVEL', 'WARNING')
        self.LOG_FORMAT = os.getenv('WITTKIT_LOG_FORMAT', 'json' if self.ENVIRONMENT == 'prod' else 'console')
        self.ORDER_PADDING = self._int_env('WITTKIT_ORDER_PADDING', 4)
        self.LEVEL_SLACK = self._int_env('WITTKIT_LEVEL_SLACK', 1)
        self.C_CHECKS = self._int_list_env('WITTKIT_C_CHECKS', (3,))
        small = [k for k in self.C_CHECKS if abs(k) < 2]
        if small:
            raise InputError(f"WITTKIT_C_CHECKS multiples must satisfy |k| >= 2 (φ₀ vanishes on ±u, 0), got {small}")

    def require_gamma_path(self, flag_value: Optional[str]) -> str:
        """Resolve the Γ document path; there is no implicit default"""
        path = flag_value or self.GAMMA_PATH
        if not path:
            raise InputError("Missing Γ configuration: pass --gamma FILE or set WITTKIT_GAMMA")
        return path

    @staticmethod
    def _int_env(key: str, default: int) -> int:
        raw = os.getenv(key)
        if raw is None or raw == '':
            return default
        try:
            return int(raw)
        except ValueError:
            raise InputError(f"{key} must be an integer, got {raw!r}")

    @staticmethod
    def _int_list_env(key: str, default: Tuple[int, ...]) -> Tuple[int, ...]:
        raw = os.getenv(key)
        if not raw:
            return default
        try:
            return tuple(int(part) for part in raw.split(',') if part.strip())
        except ValueError:
            raise InputError(f"{key} must be a comma separated list of integers, got {raw!r}")


@dataclass(frozen=True)
class GammaConfig:
    """The Γ document: rank, generator symbols, optional specialization, unit and order"""
    rank: int
    generator_names: Tuple[str, ...]
    specialization: Optional[Tuple[Tuple[str, str], ...]] = None
    unit: Optional[Tuple[int, ...]] = None
    order_priority: Tuple[int, ...] = ()
    order_signs: Tuple[int, ...] = ()
    check_window: int = 6
    document: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def from_document(cls, document: Dict[str, Any]) -> 'GammaConfig':
        """Build and validate a GammaConfig from its JSON document"""
        from .validators import GammaValidator

        result = GammaValidator.validate_document(document)
        if not result.success:
            raise InvalidGammaConfig(result.error)

        rank = int(document['rank'])
        order = document.get('order') or {}
        specialization = document.get('specialization')
        unit = document.get('unit')
        return cls(
            rank=rank,
            generator_names=tuple(document['generators']),
            specialization=(tuple((name, str(specialization[name])) for name in document['generators'])
                            if specialization else None),
            unit=tuple(int(n) for n in unit) if unit is not None else None,
            order_priority=tuple(order.get('priority', range(1, rank + 1))),
            order_signs=tuple(order.get('signs', [1] * rank)),
            check_window=int(document.get('check_window', 6)),
            document=dict(document),
        )

    @classmethod
    def load(cls, path: str) -> 'GammaConfig':
        try:
            with open(path, 'r', encoding='utf-8') as handle:
                document = json.load(handle)
        except OSError as e:
            raise InputError(f"Cannot read Γ document {path}: {e}")
        except json.JSONDecodeError as e:
            raise InvalidGammaConfig(f"Γ document {path} is not valid JSON: {e}")
        return cls.from_document(document)

    @classmethod
    def integers(cls) -> 'GammaConfig':
        """Γ = ℤ: one generator specialized to 1, which is also the unit"""
        return cls.from_document({
            'rank': 1, 'generators': ['g1'], 'specialization': {'g1': '1'},
            'unit': [1], 'order': {'priority': [1], 'signs': [1]},
        })

    def to_document(self) -> Dict[str, Any]:
        document: Dict[str, Any] = {
            'rank': self.rank,
            'generators': list(self.generator_names),
            'order': {'priority': list(self.order_priority), 'signs': list(self.order_signs)},
        }
        if self.specialization:
            document['specialization'] = dict(self.specialization)
        if self.unit is not None:
            document['unit'] = list(self.unit)
        return document

    @property
    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_document(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]
