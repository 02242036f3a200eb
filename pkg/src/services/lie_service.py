# src/services/lie_service.py
"""
Lie core: basis indices L(α,i) and C, sparse exact elements, the bracket rules of W(Γ),
its central extension, the Witt-type comparison algebra and the level subquotients.
"""
import itertools
import re
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

from shared.exceptions import CentralTermPresent, EmptyComponent, InputError, LevelOutOfRange
from shared.utils import Logger
from shared.validators import ResidualSummary, WindowValidator

from .gamma_service import GammaLattice, GroupElement, Scalar

logger = Logger.setup_logger(__name__)


@dataclass(frozen=True)
class BasisIndex:
    """L(degree, level), or the central element C when degree is None"""
    degree: Optional[GroupElement]
    level: int = 0

    def __post_init__(self):
        if self.level < 0:
            raise InputError(f"Basis level must be nonnegative, got {self.level}")

    @classmethod
    def basic(cls, degree: GroupElement, level: int) -> 'BasisIndex':
        return cls(degree, level)

    @classmethod
    def central(cls) -> 'BasisIndex':
        return CENTRAL

    @property
    def is_central(self) -> bool:
        return self.degree is None

    def __str__(self) -> str:
        return 'C' if self.is_central else f"L({self.degree},{self.level})"


CENTRAL = BasisIndex(None, 0)


class Element:
    """Finite exact linear combination of basis indices; zero coefficients are never stored"""

    __slots__ = ('_terms', '_hash')

    def __init__(self, terms: Optional[Mapping[BasisIndex, Scalar]] = None):
        self._terms = {index: value for index, value in (terms or {}).items() if value}
        self._hash = None

    @classmethod
    def zero(cls) -> 'Element':
        return cls()

    @property
    def terms(self) -> Mapping[BasisIndex, Scalar]:
        return MappingProxyType(self._terms)

    def coefficient(self, index: BasisIndex) -> Optional[Scalar]:
        return self._terms.get(index)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __add__(self, other: 'Element') -> 'Element':
        terms = dict(self._terms)
        for index, value in other._terms.items():
            terms[index] = terms[index] + value if index in terms else value
        return Element(terms)

    def __neg__(self) -> 'Element':
        return Element({index: -value for index, value in self._terms.items()})

    def __sub__(self, other: 'Element') -> 'Element':
        return self + (-other)

    def scale(self, factor) -> 'Element':
        if not factor:
            return Element()
        return Element({index: factor * value for index, value in self._terms.items()})

    def __repr__(self) -> str:
        inner = ', '.join(f"{index}: {value}" for index, value in self._terms.items())
        return f"Element({{{inner}}})"

    # -- views ------------------------------------------------------------------------------

    @property
    def central(self) -> Optional[Scalar]:
        return self._terms.get(CENTRAL)

    @property
    def has_central(self) -> bool:
        return CENTRAL in self._terms

    def without_central(self) -> 'Element':
        return Element({index: value for index, value in self._terms.items() if not index.is_central})

    def basic_terms(self) -> Iterator[Tuple[BasisIndex, Scalar]]:
        return ((index, value) for index, value in self._terms.items() if not index.is_central)

    def support(self) -> List[GroupElement]:
        """Degrees with a nonzero homogeneous component, in coordinate order"""
        return sorted({index.degree for index in self._terms if not index.is_central})

    @property
    def depth(self) -> int:
        return len(self.support())

    def levels(self) -> List[int]:
        return sorted({index.level for index in self._terms if not index.is_central})

    def homogeneous_component(self, gamma: GroupElement) -> 'Element':
        return Element({index: value for index, value in self._terms.items() if index.degree == gamma})

    def _component_levels(self, gamma: GroupElement) -> List[int]:
        levels = sorted(index.level for index in self._terms if index.degree == gamma)
        if not levels:
            raise EmptyComponent(f"Element has no component at degree {gamma}")
        return levels

    def length(self, gamma: GroupElement) -> int:
        levels = self._component_levels(gamma)
        return levels[-1] - levels[0] + 1

    def first_term(self, gamma: GroupElement) -> 'Element':
        index = BasisIndex(gamma, self._component_levels(gamma)[0])
        return Element({index: self._terms[index]})

    def last_term(self, gamma: GroupElement) -> 'Element':
        index = BasisIndex(gamma, self._component_levels(gamma)[-1])
        return Element({index: self._terms[index]})

    @property
    def is_basis_multiple(self) -> bool:
        return len(self._terms) == 1 and not self.has_central

    def single_term(self) -> Tuple[BasisIndex, Scalar]:
        (index, value), = self._terms.items()
        return index, value


@dataclass(frozen=True)
class BracketRule:
    """One of wgamma, wgammahat, witt or subquotient(m, n)"""
    kind: str
    m: int = 0
    n: int = 0

    KINDS = ('wgamma', 'wgammahat', 'witt', 'subquotient')

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InputError(f"Unknown bracket rule {self.kind!r}; expected one of {self.KINDS}")
        if self.kind == 'subquotient' and not 0 <= self.m <= self.n:
            raise InputError(f"Subquotient requires 0 <= m <= n, got ({self.m}, {self.n})")

    @classmethod
    def subquotient(cls, m: int, n: int) -> 'BracketRule':
        return cls('subquotient', m, n)

    @classmethod
    def parse(cls, text: str) -> 'BracketRule':
        """Accepts wgamma, wgammahat, witt, subquotient:M,N or subquotient(M,N)"""
        normalized = text.strip().lower()
        match = re.fullmatch(r'subquotient[:(]\s*(\d+)\s*,\s*(\d+)\s*\)?', normalized)
        if match:
            return cls.subquotient(int(match.group(1)), int(match.group(2)))
        aliases = {'w': 'wgamma', 'what': 'wgammahat', 'hat': 'wgammahat', 'wittype': 'witt', 'witttype': 'witt'}
        return cls(aliases.get(normalized, normalized))

    @property
    def allows_central(self) -> bool:
        return self.kind == 'wgammahat'

    def __str__(self) -> str:
        return f"subquotient({self.m},{self.n})" if self.kind == 'subquotient' else self.kind


WGAMMA = BracketRule('wgamma')
WGAMMA_HAT = BracketRule('wgammahat')
WITT_TYPE = BracketRule('witt')


@dataclass(frozen=True)
class Window:
    """Degrees with every coordinate in [-A, A] and levels in [0, I]"""
    degree_bound: int
    level_bound: int

    def __post_init__(self):
        result = WindowValidator.validate_bounds(self.degree_bound, self.level_bound)
        if not result.success:
            raise InputError(result.error)

    def contains_degree(self, alpha: GroupElement) -> bool:
        return alpha.height <= self.degree_bound

    def contains(self, index: BasisIndex) -> bool:
        return not index.is_central and self.contains_degree(index.degree) and index.level <= self.level_bound

    def degrees(self, lattice: GammaLattice) -> List[GroupElement]:
        return list(lattice.degrees(self.degree_bound))

    def basis(self, lattice: GammaLattice, min_level: int = 0, max_level: Optional[int] = None) -> List[BasisIndex]:
        top = self.level_bound if max_level is None else min(max_level, self.level_bound)
        return [BasisIndex(alpha, i) for alpha in self.degrees(lattice) for i in range(min_level, top + 1)]

    def grown(self, degree_factor: int = 2, extra_levels: int = 1) -> 'Window':
        return Window(degree_factor * self.degree_bound, degree_factor * self.level_bound + extra_levels)

    def __str__(self) -> str:
        return f"Window(A={self.degree_bound}, I={self.level_bound})"


class LieService:
    """Brackets and sweeps over one Γ"""

    def __init__(self, lattice: GammaLattice):
        self.lattice = lattice
        self.scalars = lattice.scalars
        self._cache: Dict[Tuple[BasisIndex, BasisIndex, BracketRule], Dict[BasisIndex, Scalar]] = {}

    # -- constructors -----------------------------------------------------------------------

    def L(self, alpha, level: int, coeff=None) -> Element:
        degree = self.lattice.element(alpha)
        value = self.scalars.one if coeff is None else self.scalars(coeff)
        return Element({BasisIndex(degree, level): value})

    def C(self, coeff=None) -> Element:
        value = self.scalars.one if coeff is None else self.scalars(coeff)
        return Element({CENTRAL: value})

    def basis_element(self, index: BasisIndex) -> Element:
        return Element({index: self.scalars.one})

    # -- brackets ---------------------------------------------------------------------------

    def bracket_basis(self, a: BasisIndex, b: BasisIndex, rule: BracketRule) -> Dict[BasisIndex, Scalar]:
        key = (a, b, rule)
        cached = self._cache.get(key)
        if cached is None:
            cached = self._compute_basis_bracket(a, b, rule)
            self._cache[key] = cached
        return cached

    def _compute_basis_bracket(self, a: BasisIndex, b: BasisIndex, rule: BracketRule) -> Dict[BasisIndex, Scalar]:
        if a.is_central or b.is_central:
            return {}
        alpha, beta, i, j = a.degree, b.degree, a.level, b.level
        ea, eb = self.lattice.embed(alpha), self.lattice.embed(beta)
        gamma = alpha + beta
        result: Dict[BasisIndex, Scalar] = {}

        def put(level: int, value) -> None:
            if value and level >= 0:
                index = BasisIndex(gamma, level)
                total = result.get(index, self.scalars.zero) + value
                if total:
                    result[index] = total
                else:
                    result.pop(index, None)

        if rule.kind == 'witt':
            put(i + j, ea - eb)
            put(i + j - 1, self.scalars(j - i))
            return result

        put(i + j, eb - ea)
        put(i + j + 1, self.scalars(j - i))

        if rule.kind == 'subquotient':
            return {index: value for index, value in result.items() if index.level <= rule.n}
        if rule.kind == 'wgammahat' and gamma.is_zero and i + j == 0:
            central = (ea ** 3 - ea) / 12
            if central:
                result[CENTRAL] = central
        return result

    def _check_operand(self, x: Element, rule: BracketRule) -> None:
        if x.has_central and not rule.allows_central:
            raise CentralTermPresent(f"Central term C is not part of the {rule} algebra")
        if rule.kind == 'subquotient':
            for index, _ in x.basic_terms():
                if not rule.m <= index.level <= rule.n:
                    raise LevelOutOfRange(
                        f"{index} lies outside the levels [{rule.m}, {rule.n}] of {rule}"
                    )

    def bracket(self, x: Element, y: Element, rule: BracketRule = WGAMMA) -> Element:
        """Bilinear, antisymmetric bracket under the chosen rule"""
        self._check_operand(x, rule)
        self._check_operand(y, rule)
        terms: Dict[BasisIndex, Scalar] = {}
        for a, ca in x.basic_terms():
            for b, cb in y.basic_terms():
                product = ca * cb
                for index, value in self.bracket_basis(a, b, rule).items():
                    terms[index] = terms[index] + product * value if index in terms else product * value
        return Element(terms)

    def ad_power(self, x: Element, y: Element, k: int, rule: BracketRule = WGAMMA) -> Element:
        for _ in range(k):
            y = self.bracket(x, y, rule)
        return y

    def jacobi_residual(self, x: Element, y: Element, z: Element, rule: BracketRule = WGAMMA) -> Element:
        """[x,[y,z]] + [y,[z,x]] + [z,[x,y]]"""
        return (self.bracket(x, self.bracket(y, z, rule), rule)
                + self.bracket(y, self.bracket(z, x, rule), rule)
                + self.bracket(z, self.bracket(x, y, rule), rule))

    def jacobi_sweep(self, window: Window, rule: BracketRule = WGAMMA) -> ResidualSummary:
        """Jacobi on every unordered triple of distinct window basis elements"""
        if rule.kind == 'subquotient':
            basis = window.basis(self.lattice, min_level=rule.m, max_level=rule.n)
        else:
            basis = window.basis(self.lattice)
        elements = [self.basis_element(index) for index in basis]
        summary = ResidualSummary()
        Logger.log_processing_step(logger, "Jacobi sweep", {'window': str(window), 'rule': str(rule), 'basis': len(basis)})
        for p, q, s in itertools.combinations(range(len(basis)), 3):
            residual = self.jacobi_residual(elements[p], elements[q], elements[s], rule)
            summary.record(f"{basis[p]}, {basis[q]}, {basis[s]}", residual, not residual, len(residual))
        if summary.is_zero:
            Logger.log_success(logger, "Jacobi holds on window", {'checked': summary.checked, 'rule': str(rule)})
        else:
            logger.warning("Jacobi fails on window", rule=str(rule), nonzero=summary.nonzero,
                           first=summary.failing_labels[:1])
        return summary

    # -- views ------------------------------------------------------------------------------

    def sorted_terms(self, x: Element) -> List[Tuple[BasisIndex, Scalar]]:
        """Terms ordered by degree under the group order, then level; C last"""
        basic = sorted(x.basic_terms(), key=lambda item: (self.lattice.sort_key(item[0].degree), item[0].level))
        if x.has_central:
            basic.append((CENTRAL, x.central))
        return basic

    def element_views(self, x: Element) -> Dict[str, object]:
        """Support, depth and per-degree length, first and last terms"""
        support = sorted(x.support(), key=self.lattice.sort_key)
        components = []
        for gamma in support:
            first, last = x.first_term(gamma), x.last_term(gamma)
            components.append({
                'degree': gamma,
                'length': x.length(gamma),
                'first_term': first,
                'last_term': last,
                'component': x.homogeneous_component(gamma),
            })
        return {'support': support, 'depth': len(support), 'components': components}
