# src/services/linalg_service.py
"""
Exact linear algebra over the scalar field.

Ranks and nullspaces go through sympy's DomainMatrix (sparse, field domain). Linear systems
whose inconsistency must be explained use SparseEchelon, which records how every reduced
row was combined from the input equations.
"""
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from sympy.polys.matrices import DomainMatrix

from shared.utils import Logger

from .gamma_service import Scalar, ScalarField
from .lie_service import Element

logger = Logger.setup_logger(__name__)

Row = Dict[Hashable, Scalar]


class LinearAlgebraService:
    """Rank, span membership and nullspaces of sparse exact vectors"""

    def __init__(self, scalars: ScalarField):
        self.scalars = scalars
        self.domain = scalars.field.to_domain()

    def _matrix(self, rows: Sequence[Row]) -> Tuple[DomainMatrix, List[Hashable]]:
        columns: Dict[Hashable, int] = {}
        data: Dict[int, Dict[int, Scalar]] = {}
        for i, row in enumerate(rows):
            entries = {}
            for key, value in row.items():
                if value:
                    j = columns.setdefault(key, len(columns))
                    entries[j] = self.domain.convert(value)
            if entries:
                data[i] = entries
        shape = (len(rows), max(len(columns), 1))
        return DomainMatrix(data, shape, self.domain), list(columns)

    def rank(self, rows: Sequence[Row]) -> int:
        if not rows:
            return 0
        matrix, columns = self._matrix(rows)
        if not columns:
            return 0
        return matrix.rank()

    def element_rank(self, elements: Sequence[Element]) -> int:
        return self.rank([dict(x.terms) for x in elements])

    def in_span(self, target: Element, elements: Sequence[Element]) -> bool:
        """Exact rank comparison"""
        base = self.element_rank(elements)
        return self.element_rank(list(elements) + [target]) == base

    def nullspace(self, rows: Sequence[Row], unknowns: Sequence[Hashable]) -> List[Row]:
        """Basis of {v : Σ_k row[k]·v[k] = 0 for every row} over the listed unknowns"""
        index = {key: j for j, key in enumerate(unknowns)}
        data: Dict[int, Dict[int, Scalar]] = {}
        for i, row in enumerate(rows):
            entries = {index[key]: self.domain.convert(value) for key, value in row.items() if value}
            if entries:
                data[i] = entries
        if not data:
            return [{key: self.scalars.one} for key in unknowns]
        matrix = DomainMatrix(data, (len(rows), len(unknowns)), self.domain)
        reduced, pivots = matrix.rref()
        dense = reduced.to_list()
        pivot_rows = {column: r for r, column in enumerate(pivots)}
        basis = []
        for free in range(len(unknowns)):
            if free in pivot_rows:
                continue
            vector = {unknowns[free]: self.scalars.one}
            for column, r in pivot_rows.items():
                value = dense[r][free]
                if value:
                    vector[unknowns[column]] = -value
            basis.append(vector)
        return basis


@dataclass
class EchelonRow:
    entries: Dict[int, Scalar]
    rhs: Scalar
    combination: Dict[int, Scalar] = field(default_factory=dict)


class SparseEchelon:
    """Incremental elimination of equations Σ a_k u_k = rhs with provenance tracking"""

    def __init__(self, scalars: ScalarField):
        self.scalars = scalars
        self._columns: Dict[Hashable, int] = {}
        self._keys: List[Hashable] = []
        self._pivots: Dict[int, EchelonRow] = {}
        self.labels: List[Hashable] = []
        self.equations: List[Tuple[Row, Scalar]] = []
        self.conflict: Optional[Dict[int, Scalar]] = None

    def _column(self, key: Hashable) -> int:
        if key not in self._columns:
            self._columns[key] = len(self._keys)
            self._keys.append(key)
        return self._columns[key]

    @property
    def rank(self) -> int:
        return len(self._pivots)

    @property
    def consistent(self) -> bool:
        return self.conflict is None

    def add(self, coefficients: Row, rhs: Scalar, label: Hashable) -> bool:
        """Add one equation; returns False once the system has become inconsistent"""
        position = len(self.labels)
        self.labels.append(label)
        self.equations.append((dict(coefficients), rhs))
        row = EchelonRow(
            {self._column(key): value for key, value in coefficients.items() if value},
            self.scalars(rhs),
            {position: self.scalars.one},
        )
        self._reduce(row)
        if row.entries:
            pivot = min(row.entries)
            inverse = self.scalars.one / row.entries[pivot]
            row.entries = {c: v * inverse for c, v in row.entries.items()}
            row.rhs = row.rhs * inverse
            row.combination = {e: v * inverse for e, v in row.combination.items()}
            self._pivots[pivot] = row
            return self.consistent
        if row.rhs and self.conflict is None:
            self.conflict = {e: v for e, v in row.combination.items() if v}
            logger.debug("Inconsistent equation", label=label, combined=len(self.conflict))
        return self.consistent

    def _reduce(self, row: EchelonRow) -> None:
        while True:
            shared = [c for c in row.entries if c in self._pivots]
            if not shared:
                return
            column = min(shared)
            factor = row.entries[column]
            pivot = self._pivots[column]
            for c, v in pivot.entries.items():
                value = row.entries.get(c, self.scalars.zero) - factor * v
                if value:
                    row.entries[c] = value
                else:
                    row.entries.pop(c, None)
            row.rhs = row.rhs - factor * pivot.rhs
            for e, v in pivot.combination.items():
                value = row.combination.get(e, self.scalars.zero) - factor * v
                if value:
                    row.combination[e] = value
                else:
                    row.combination.pop(e, None)

    def solution(self) -> Dict[Hashable, Scalar]:
        """One solution with free unknowns set to zero"""
        values: Dict[int, Scalar] = {}
        for pivot in sorted(self._pivots, reverse=True):
            row = self._pivots[pivot]
            total = row.rhs
            for c, v in row.entries.items():
                if c != pivot and c in values:
                    total = total - v * values[c]
            if total:
                values[pivot] = total
        return {self._keys[c]: v for c, v in values.items()}

    def minimal_conflict(self) -> List[int]:
        """Positions of an inclusion-minimal inconsistent subsystem"""
        if self.conflict is None:
            return []
        subset = sorted(self.conflict)
        for position in list(subset):
            trial = [p for p in subset if p != position]
            if trial and not self._subsystem_consistent(trial):
                subset = trial
        return subset

    def _subsystem_consistent(self, positions: Sequence[int]) -> bool:
        probe = SparseEchelon(self.scalars)
        for p in positions:
            coefficients, rhs = self.equations[p]
            if not probe.add(coefficients, rhs, self.labels[p]):
                return False
        return True
