# src/services/derivation_service.py
"""
Derivations of W(Γ): scalar derivations D_φ, inner derivations by completion elements,
Leibniz verification and the constructive decomposition D = ad_y + D_φ.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from shared.exceptions import (
    InconsistentAdditivity, InputError, MissingImage, NotADerivation, TruncationTooShallow
)
from shared.utils import Logger
from shared.validators import ResidualSummary

from .completion_service import CompletionComponent, CompletionElement, CompletionService
from .gamma_service import GammaLattice, GroupElement, Scalar
from .lie_service import BasisIndex, Element, LieService, Window
from .linalg_service import LinearAlgebraService

logger = Logger.setup_logger(__name__)


@dataclass(frozen=True)
class AdditiveMap:
    """φ ∈ Hom(Γ, field), stored by its values on the generators"""
    values: Tuple[Scalar, ...]

    def __call__(self, alpha: GroupElement) -> Scalar:
        total = self.values[0] * 0
        for n, value in zip(alpha.coefficients, self.values):
            if n:
                total = total + n * value
        return total

    def __add__(self, other: 'AdditiveMap') -> 'AdditiveMap':
        return AdditiveMap(tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: 'AdditiveMap') -> 'AdditiveMap':
        return AdditiveMap(tuple(a - b for a, b in zip(self.values, other.values)))

    def scale(self, factor) -> 'AdditiveMap':
        return AdditiveMap(tuple(factor * a for a in self.values))

    @property
    def is_zero(self) -> bool:
        return not any(self.values)


@dataclass
class DerivationSpec:
    """ad_y + D_φ (kind 'symbolic') or images of L(α,0), L(α,1) on a window (kind 'table')"""
    kind: str
    y: Optional[CompletionElement] = None
    phi: Optional[AdditiveMap] = None
    images: Dict[BasisIndex, CompletionElement] = field(default_factory=dict)

    @classmethod
    def symbolic(cls, y: CompletionElement, phi: AdditiveMap) -> 'DerivationSpec':
        return cls('symbolic', y=y, phi=phi)

    @classmethod
    def table(cls, images: Dict[BasisIndex, CompletionElement]) -> 'DerivationSpec':
        for index in images:
            if index.is_central or index.level > 1:
                raise InputError(f"Table derivations list images of L(α,0) and L(α,1) only, got {index}")
        return cls('table', images=dict(images))


@dataclass
class DecompositionResult:
    y: CompletionElement
    phi: AdditiveMap
    c: Scalar
    residual: ResidualSummary
    y_in_W: bool
    order: int
    details: Dict[str, object] = field(default_factory=dict)


class DerivationService:
    """Evaluation, Leibniz checks and decomposition of derivations"""

    def __init__(self, lie: LieService, completion: Optional[CompletionService] = None,
                 linalg: Optional[LinearAlgebraService] = None, order_padding: int = 4):
        self.lie = lie
        self.lattice: GammaLattice = lie.lattice
        self.scalars = lie.scalars
        self.completion = completion or CompletionService(self.lattice)
        self.linalg = linalg or LinearAlgebraService(self.scalars)
        self.order_padding = order_padding

    # -- maps -------------------------------------------------------------------------------

    def additive_map(self, values) -> AdditiveMap:
        values = tuple(self.scalars(v) for v in values)
        if len(values) != self.lattice.rank:
            raise InputError(f"An additive map needs {self.lattice.rank} generator values, got {len(values)}")
        return AdditiveMap(values)

    def zero_map(self) -> AdditiveMap:
        return AdditiveMap((self.scalars.zero,) * self.lattice.rank)

    def phi0(self) -> AdditiveMap:
        """α ↦ embed(α)"""
        return AdditiveMap(tuple(self.lattice.embed(self.lattice.generator(k)) for k in range(self.lattice.rank)))

    # -- application ------------------------------------------------------------------------

    def apply_D_phi(self, phi: AdditiveMap, x: Element) -> Element:
        """L(α,i) ↦ φ(α)L(α,i)"""
        return Element({index: phi(index.degree) * value for index, value in x.basic_terms()})

    def apply_ad(self, y: CompletionElement, x: Element) -> CompletionElement:
        return self.completion.bracket(y, CompletionElement.from_element(x))

    def evaluate(self, D: DerivationSpec, x: Element) -> CompletionElement:
        """D(x) for any element of W"""
        if x.has_central:
            raise InputError("Derivations act on W; remove the central term")
        if D.kind == 'symbolic':
            return self.apply_ad(D.y, x) + CompletionElement.from_element(self.apply_D_phi(D.phi, x))
        cache: Dict[BasisIndex, CompletionElement] = {}
        total = CompletionElement()
        for index, value in x.basic_terms():
            total = total + self._table_image(D, index, cache).scale(value)
        return total

    def _table_image(self, D: DerivationSpec, index: BasisIndex,
                     cache: Dict[BasisIndex, CompletionElement]) -> CompletionElement:
        """Images above level 1 from L(α,i+1) = ([L(0,0), L(α,i)] − αL(α,i)) / i"""
        if index.level <= 1:
            image = D.images.get(index)
            if image is None:
                raise MissingImage(f"Derivation table has no image for {index}")
            return image
        if index in cache:
            return cache[index]
        below = BasisIndex(index.degree, index.level - 1)
        i = below.level
        l00 = self.lie.L(self.lattice.zero, 0)
        d_l00 = self._table_image(D, BasisIndex(self.lattice.zero, 0), cache)
        d_below = self._table_image(D, below, cache)
        lower = CompletionElement.from_element(self.lie.basis_element(below))
        image = (self.completion.bracket(d_l00, lower)
                 + self.completion.bracket(CompletionElement.from_element(l00), d_below)
                 - d_below.scale(self.lattice.embed(index.degree)))
        image = image.scale(self.scalars.one / i)
        cache[index] = image
        return image

    def to_table(self, D: DerivationSpec, window: Window) -> DerivationSpec:
        """Images of the window generators"""
        images = {}
        for alpha in window.degrees(self.lattice):
            for i in (0, 1):
                index = BasisIndex(alpha, i)
                images[index] = self.evaluate(D, self.lie.basis_element(index))
        return DerivationSpec.table(images)

    # -- verification -----------------------------------------------------------------------

    def generator_pairs(self, window: Window) -> List[Tuple[BasisIndex, BasisIndex]]:
        """Pairs of L(α,0), L(α,1) whose degree sum stays in the window"""
        generators = [BasisIndex(alpha, i) for alpha in window.degrees(self.lattice) for i in (0, 1)]
        pairs = []
        for p, a in enumerate(generators):
            for b in generators[p + 1:]:
                if window.contains_degree(a.degree + b.degree):
                    pairs.append((a, b))
        return pairs

    def leibniz_check(self, D: DerivationSpec, window: Window) -> ResidualSummary:
        """D([a,b]) − [Da,b] − [a,Db] over generator pairs of the window"""
        summary = ResidualSummary()
        Logger.log_processing_step(logger, "Leibniz sweep", {'window': str(window), 'kind': D.kind})
        for a, b in self.generator_pairs(window):
            x, y = self.lie.basis_element(a), self.lie.basis_element(b)
            residual = (self.evaluate(D, self.lie.bracket(x, y))
                        - self.completion.bracket(self.evaluate(D, x), CompletionElement.from_element(y))
                        - self.completion.bracket(CompletionElement.from_element(x), self.evaluate(D, y)))
            known = known_terms(residual)
            summary.record((a, b), residual, not known, len(known))
        if not summary.is_zero:
            logger.warning("Leibniz rule fails", nonzero=summary.nonzero, first=str(summary.failing_labels[:1]))
        return summary

    # -- decomposition ----------------------------------------------------------------------

    def decompose_derivation(self, D: DerivationSpec, window: Window, order: Optional[int] = None) -> DecompositionResult:
        """Split D into ad_y + D_φ, recovering y up to the truncation order"""
        order = window.level_bound + self.order_padding if order is None else order
        if order < 2:
            raise TruncationTooShallow(f"Truncation order {order} cannot reach L(α,2)")
        Logger.log_processing_step(logger, "Decomposing derivation", {'window': str(window), 'order': order})

        leibniz = self.leibniz_check(D, window)
        if not leibniz.is_zero:
            raise NotADerivation(f"Leibniz rule fails on {leibniz.nonzero} generator pairs, first {leibniz.failing_labels[0]}")

        l00 = self.lie.L(self.lattice.zero, 0)
        y1 = self._inner_part(self.evaluate(D, l00), order)

        def d_prime(x: Element) -> CompletionElement:
            return self.evaluate(D, x) - self.apply_ad(y1, x)

        image = d_prime(l00)
        stray = [(gamma, level, value) for gamma, level, value in known_terms(image)
                 if not (gamma.is_zero and level in (0, 1))]
        if stray:
            raise NotADerivation(f"D(L(0,0)) − ad_y(L(0,0)) has terms outside L(0,0), L(0,1): {stray[0][:2]}")
        a0 = image.coefficient(self.lattice.zero, 0, self.scalars.zero)
        a1 = image.coefficient(self.lattice.zero, 1, self.scalars.zero)
        if a0 or a1:
            raise NotADerivation("Applying D to [L(0,0), L(α,0)] = αL(α,0) forces a0 = a1 = 0")

        b = {}
        for alpha in window.degrees(self.lattice):
            index = BasisIndex(alpha, 0)
            image = d_prime(self.lie.basis_element(index))
            value = image.coefficient(alpha, 0, self.scalars.zero)
            rest = [t for t in known_terms(image) if (t[0], t[1]) != (alpha, 0)]
            if rest:
                raise NotADerivation(f"D'(L({alpha},0)) is not a multiple of L({alpha},0)")
            b[alpha] = value
        if b[self.lattice.zero]:
            raise InconsistentAdditivity("b at degree 0 must vanish")
        phi = AdditiveMap(tuple(b[self.lattice.generator(k)] for k in range(self.lattice.rank)))
        for alpha, value in b.items():
            if phi(alpha) != value:
                raise InconsistentAdditivity(f"b is not additive at degree {alpha}")

        def d_second(x: Element) -> CompletionElement:
            return d_prime(x) - CompletionElement.from_element(self.apply_D_phi(phi, x))

        zero = self.lattice.zero
        c = d_second(self.lie.L(zero, 1)).coefficient(zero, 2, self.scalars.zero)
        for alpha in window.degrees(self.lattice):
            image = d_second(self.lie.L(alpha, 1))
            expected = CompletionElement.from_element(self.lie.L(alpha, 2, c))
            if known_terms(image - expected):
                raise NotADerivation(f"D''(L({alpha},1)) is not c·L({alpha},2)")

        shift = CompletionElement.from_element(self.lie.L(zero, 0, c)) if c else CompletionElement()
        candidates = [(y1 + shift, phi - self.phi0().scale(c), +1)]
        if c:
            candidates.append((y1 - shift, phi + self.phi0().scale(c), -1))
        for y, candidate_phi, sign in candidates:
            residual = self.residual(D, DerivationSpec.symbolic(y, candidate_phi), window)
            if residual.is_zero:
                break
        result = DecompositionResult(
            y=y, phi=candidate_phi, c=c, residual=residual, y_in_W=y.is_exact, order=order,
            details={'sign': sign, 'b': b},
        )
        if residual.is_zero:
            Logger.log_success(logger, "Derivation decomposed", {'y_in_W': result.y_in_W, 'sign': sign})
        else:
            logger.warning("Decomposition leaves a residual", nonzero=residual.nonzero)
        return result

    def _inner_part(self, a: CompletionElement, order: int) -> CompletionElement:
        """y₁ from the coefficients a_{α,j} of D(L(0,0)) by the b-induction"""
        components = {}
        zero = self.scalars.zero
        for alpha, component in a.items():
            needed = order + 1 if alpha.is_zero else order
            if not component.exact and component.valid_order < needed:
                raise TruncationTooShallow(
                    f"D(L(0,0)) is known to order {component.valid_order} at degree {alpha}; {needed} is needed"
                )

            def coefficient(j: int) -> Scalar:
                value = component.coefficient(j)
                return value if value else zero

            top = len(component.coefficients) - 1
            limit = max(order, top) if component.exact else order

            if alpha.is_zero:
                b = [zero] + [-coefficient(j + 1) / j for j in range(1, limit + 1)]
                if component.exact:
                    b = b[:max(top, 1)]
                    components[alpha] = CompletionComponent(tuple(b), max(len(b) - 1, 0), True)
                else:
                    components[alpha] = CompletionComponent(tuple(b), order, False)
                continue

            value = self.lattice.embed(alpha)
            b = []
            previous = zero
            for j in range(limit + 1):
                current = (-coefficient(j) - (j - 1) * previous) / value
                b.append(current)
                previous = current
            # beyond the top level b_j = −(j−1)b_{j−1}/α, so the series stops iff b_top = 0
            if component.exact and (top == 0 or not b[top]):
                components[alpha] = CompletionComponent(tuple(b[:top + 1]), top, True)
            else:
                components[alpha] = CompletionComponent(tuple(b), limit, False)
        return CompletionElement(components)

    def residual(self, D: DerivationSpec, E: DerivationSpec, window: Window) -> ResidualSummary:
        """D − E on the window generators"""
        summary = ResidualSummary()
        for alpha in window.degrees(self.lattice):
            for i in (0, 1):
                x = self.lie.L(alpha, i)
                difference = self.evaluate(D, x) - self.evaluate(E, x)
                known = known_terms(difference)
                summary.record(BasisIndex(alpha, i), difference, not known, len(known))
        return summary

    # -- directness -------------------------------------------------------------------------

    def direct_sum_check(self, window: Window) -> Dict[str, object]:
        """Kernel of (y, φ) ↦ ad_y + D_φ on the window generators, y ranging over window elements"""
        y_unknowns = [('y', index) for index in window.basis(self.lattice)]
        phi_unknowns = [('phi', k) for k in range(self.lattice.rank)]
        unknowns = y_unknowns + phi_unknowns
        rows: Dict[Tuple[BasisIndex, BasisIndex], Dict] = {}
        for alpha in window.degrees(self.lattice):
            for i in (0, 1):
                generator = BasisIndex(alpha, i)
                g = self.lie.basis_element(generator)
                for key in y_unknowns:
                    for output, value in self.lie.bracket(self.lie.basis_element(key[1]), g).terms.items():
                        rows.setdefault((generator, output), {})[key] = value
                for k, n in enumerate(alpha.coefficients):
                    if n:
                        rows.setdefault((generator, generator), {})[('phi', k)] = self.scalars(n)
        kernel = self.linalg.nullspace(list(rows.values()), unknowns)
        phi_free = all(not vector.get(key) for vector in kernel for key in phi_unknowns)
        logger.debug("Direct sum kernel", unknowns=len(unknowns), equations=len(rows), kernel=len(kernel))
        return {
            'direct': not kernel,
            'phi_forced_zero': phi_free,
            'kernel_dimension': len(kernel),
            'unknowns': len(unknowns),
            'equations': len(rows),
        }


def known_terms(x: CompletionElement) -> List[Tuple[GroupElement, int, Scalar]]:
    """Nonzero coefficients among those the truncation knows"""
    terms = []
    for gamma, component in x.items():
        for level, value in enumerate(component.coefficients):
            if value:
                terms.append((gamma, level, value))
    return terms
