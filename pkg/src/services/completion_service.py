# src/services/completion_service.py
"""
Completion of W: finitely many degrees, each carrying a level series known exactly up to a
valid order (or known to terminate).
"""
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple

from shared.exceptions import InputError, TruncationTooShallow
from shared.utils import Logger

from .gamma_service import GammaLattice, GroupElement, Scalar
from .lie_service import BasisIndex, Element

logger = Logger.setup_logger(__name__)


@dataclass(frozen=True)
class CompletionComponent:
    """Coefficients c_0..c_N of one degree; exact means every coefficient above N is zero"""
    coefficients: Tuple[Scalar, ...]
    valid_order: int
    exact: bool

    def coefficient(self, level: int) -> Optional[Scalar]:
        """None when the level is beyond what the truncation knows"""
        if level < len(self.coefficients):
            return self.coefficients[level]
        if self.exact:
            return None if level < 0 else 0
        return None

    @property
    def is_zero(self) -> bool:
        return self.exact and not any(self.coefficients)


class CompletionElement:
    """Immutable map degree -> CompletionComponent"""

    __slots__ = ('_components',)

    def __init__(self, components: Optional[Dict[GroupElement, CompletionComponent]] = None):
        cleaned = {}
        for gamma, component in (components or {}).items():
            if component.valid_order < 0:
                raise InputError(f"valid_order must be nonnegative at degree {gamma}")
            if not component.exact and len(component.coefficients) != component.valid_order + 1:
                raise InputError(
                    f"Degree {gamma} lists {len(component.coefficients)} coefficients "
                    f"but declares valid_order {component.valid_order}"
                )
            if component.exact:
                component = _trim(component)
                if component.is_zero:
                    continue
            cleaned[gamma] = component
        self._components = cleaned

    @classmethod
    def from_element(cls, x: Element) -> 'CompletionElement':
        if x.has_central:
            raise InputError("Completion elements carry no central term")
        by_degree: Dict[GroupElement, Dict[int, Scalar]] = {}
        for index, value in x.basic_terms():
            by_degree.setdefault(index.degree, {})[index.level] = value
        components = {}
        for gamma, levels in by_degree.items():
            top = max(levels)
            zero = next(iter(levels.values())) * 0
            components[gamma] = CompletionComponent(
                tuple(levels.get(i, zero) for i in range(top + 1)), top, True
            )
        return cls(components)

    @property
    def components(self) -> Dict[GroupElement, CompletionComponent]:
        return dict(self._components)

    def items(self) -> Iterator[Tuple[GroupElement, CompletionComponent]]:
        return iter(self._components.items())

    def component(self, gamma: GroupElement) -> Optional[CompletionComponent]:
        return self._components.get(gamma)

    def degrees(self):
        return list(self._components)

    def __bool__(self) -> bool:
        return bool(self._components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CompletionElement):
            return NotImplemented
        return self._components == other._components

    def __hash__(self) -> int:
        return hash(frozenset(self._components.items()))

    def __repr__(self) -> str:
        return f"CompletionElement({self._components!r})"

    @property
    def is_exact(self) -> bool:
        return all(component.exact for component in self._components.values())

    @property
    def valid_order(self) -> Optional[int]:
        """Smallest valid order over the truncated degrees; None when every degree is exact"""
        orders = [c.valid_order for c in self._components.values() if not c.exact]
        return min(orders) if orders else None

    def coefficient(self, gamma: GroupElement, level: int, zero: Scalar) -> Scalar:
        component = self._components.get(gamma)
        if component is None:
            return zero
        value = component.coefficient(level)
        if value is None:
            raise TruncationTooShallow(
                f"Coefficient at ({gamma}, {level}) is beyond valid order {component.valid_order}"
            )
        return value if value else zero

    def to_element(self) -> Element:
        """The ordinary element; every component must be exact"""
        terms = {}
        for gamma, component in self._components.items():
            if not component.exact:
                raise TruncationTooShallow(f"Degree {gamma} is truncated at order {component.valid_order}")
            for level, value in enumerate(component.coefficients):
                if value:
                    terms[BasisIndex(gamma, level)] = value
        return Element(terms)

    def truncated_element(self) -> Element:
        """Every known coefficient as an ordinary element"""
        terms = {}
        for gamma, component in self._components.items():
            for level, value in enumerate(component.coefficients):
                if value:
                    terms[BasisIndex(gamma, level)] = value
        return Element(terms)

    # -- linear structure -------------------------------------------------------------------

    def __add__(self, other: 'CompletionElement') -> 'CompletionElement':
        components = dict(self._components)
        for gamma, component in other._components.items():
            components[gamma] = _add(components[gamma], component) if gamma in components else component
        return CompletionElement(components)

    def __neg__(self) -> 'CompletionElement':
        return self.scale(-1)

    def __sub__(self, other: 'CompletionElement') -> 'CompletionElement':
        return self + (-other)

    def scale(self, factor) -> 'CompletionElement':
        if not factor:
            return CompletionElement()
        return CompletionElement({
            gamma: CompletionComponent(tuple(factor * c for c in component.coefficients),
                                       component.valid_order, component.exact)
            for gamma, component in self._components.items()
        })


def _trim(component: CompletionComponent) -> CompletionComponent:
    coefficients = list(component.coefficients)
    while coefficients and not coefficients[-1]:
        coefficients.pop()
    return CompletionComponent(tuple(coefficients), max(len(coefficients) - 1, 0), True)


def _add(a: CompletionComponent, b: CompletionComponent) -> CompletionComponent:
    exact = a.exact and b.exact
    if exact:
        size = max(len(a.coefficients), len(b.coefficients))
        order = size - 1
    else:
        order = min(c.valid_order for c in (a, b) if not c.exact)
        size = order + 1
    coefficients = []
    for level in range(size):
        terms = [c.coefficients[level] for c in (a, b) if level < len(c.coefficients)]
        total = terms[0]
        for value in terms[1:]:
            total = total + value
        coefficients.append(total)
    return CompletionComponent(tuple(coefficients), max(order, 0), exact)


class CompletionService:
    """The W(Γ) bracket extended to completion elements"""

    def __init__(self, lattice: GammaLattice):
        self.lattice = lattice
        self.scalars = lattice.scalars

    def embed_element(self, x: Element) -> CompletionElement:
        return CompletionElement.from_element(x)

    def bracket(self, x: CompletionElement, y: CompletionElement) -> CompletionElement:
        """Degreewise WGamma bracket; coefficient at level m uses operand levels up to m only"""
        zero = self.scalars.zero
        accumulated: Dict[GroupElement, Tuple[Dict[int, Scalar], Optional[int], bool, int]] = {}

        for alpha, cx in x.items():
            ea = self.lattice.embed(alpha)
            for beta, cy in y.items():
                eb = self.lattice.embed(beta)
                gamma = alpha + beta
                exact = cx.exact and cy.exact
                if exact:
                    order = len(cx.coefficients) + len(cy.coefficients) - 1
                else:
                    order = min(c.valid_order for c in (cx, cy) if not c.exact)

                values: Dict[int, Scalar] = {}
                for i, xi in enumerate(cx.coefficients):
                    if not xi:
                        continue
                    for j, yj in enumerate(cy.coefficients):
                        if not yj:
                            continue
                        product = xi * yj
                        for level, factor in ((i + j, eb - ea), (i + j + 1, self.scalars(j - i))):
                            if level > order or not factor:
                                continue
                            values[level] = values.get(level, zero) + factor * product

                previous = accumulated.get(gamma)
                if previous is None:
                    accumulated[gamma] = (values, None if exact else order, exact, order)
                else:
                    old_values, old_order, old_exact, old_top = previous
                    for level, value in values.items():
                        old_values[level] = old_values.get(level, zero) + value
                    if exact:
                        new_order = old_order
                    else:
                        new_order = order if old_order is None else min(old_order, order)
                    accumulated[gamma] = (old_values, new_order, old_exact and exact, max(old_top, order))

        components = {}
        for gamma, (values, order, exact, top) in accumulated.items():
            size = (top if exact else order) + 1
            coefficients = tuple(values.get(level, zero) for level in range(size))
            components[gamma] = CompletionComponent(coefficients, size - 1, exact)
        return CompletionElement(components)
