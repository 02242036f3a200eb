# src/services/automorphism_service.py
"""
Automorphisms φ_{τ,c}: L(α,i) ↦ τ(α)c^{−i−1}L(cα,i) for a character τ and a scale map c,
with the semidirect group law (τ₁,c₁)·(τ₂,c₂) = (α ↦ τ₁(c₂α)τ₂(α), c₁c₂).
"""
import itertools
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

from shared.exceptions import CentralTermPresent, InputError, MissingImage
from shared.utils import Logger
from shared.validators import ResidualSummary

from .gamma_service import GammaLattice, GroupElement, ScaleMap, Scalar
from .lie_service import BasisIndex, Element, LieService, Window

logger = Logger.setup_logger(__name__)


@dataclass(frozen=True)
class Character:
    """τ: Γ → field*, stored by its values on the generators"""
    values: Tuple[Scalar, ...]

    def __call__(self, alpha: GroupElement) -> Scalar:
        total = self.values[0] ** 0
        for n, value in zip(alpha.coefficients, self.values):
            if n:
                total = total * value ** n
        return total


@dataclass(frozen=True)
class AutElement:
    tau: Character
    c: ScaleMap


class AutomorphismService:
    """Application, composition, inversion and verification of φ_{τ,c}"""

    def __init__(self, lie: LieService):
        self.lie = lie
        self.lattice: GammaLattice = lie.lattice
        self.scalars = lie.scalars

    # -- constructors -----------------------------------------------------------------------

    def character(self, values) -> Character:
        values = tuple(self.scalars(v) for v in values)
        if len(values) != self.lattice.rank:
            raise InputError(f"A character needs {self.lattice.rank} generator values, got {len(values)}")
        if any(not v for v in values):
            raise InputError("Character values must be nonzero")
        return Character(values)

    def identity(self) -> AutElement:
        return AutElement(Character((self.scalars.one,) * self.lattice.rank), self.lattice.scale_identity())

    def character_only(self, tau: Character) -> AutElement:
        return AutElement(tau, self.lattice.scale_identity())

    def scale_only(self, c: ScaleMap) -> AutElement:
        return AutElement(Character((self.scalars.one,) * self.lattice.rank), c)

    # -- group law --------------------------------------------------------------------------

    def aut_apply(self, a: AutElement, x: Element) -> Element:
        if x.has_central:
            raise CentralTermPresent("Automorphisms act on W; remove the central term")
        terms = {}
        for index, value in x.basic_terms():
            image = BasisIndex(self.lattice.scale_apply(a.c, index.degree), index.level)
            terms[image] = value * a.tau(index.degree) * a.c.value ** (-index.level - 1)
        return Element(terms)

    def aut_compose(self, a1: AutElement, a2: AutElement) -> AutElement:
        """τ(g_k) = τ₁(M₂ e_k)·τ₂(g_k), c = c₁c₂"""
        values = tuple(
            a1.tau(self.lattice.scale_apply(a2.c, self.lattice.generator(k))) * a2.tau.values[k]
            for k in range(self.lattice.rank)
        )
        return AutElement(Character(values), self.lattice.scale_compose(a1.c, a2.c))

    def aut_invert(self, a: AutElement) -> AutElement:
        """(τ′, c⁻¹) with τ′(α) = 1/τ(M⁻¹α)"""
        inverse = self.lattice.scale_invert(a.c)
        values = tuple(
            self.scalars.one / a.tau(self.lattice.scale_apply(inverse, self.lattice.generator(k)))
            for k in range(self.lattice.rank)
        )
        return AutElement(Character(values), inverse)

    def is_identity(self, a: AutElement) -> bool:
        return a == self.identity()

    # -- verification -----------------------------------------------------------------------

    def aut_verify(self, a: AutElement, window: Window,
                   apply_fn: Optional[Callable[[AutElement, Element], Element]] = None) -> ResidualSummary:
        """σ([x,y]) = [σx, σy] on every pair of window basis elements"""
        apply_fn = apply_fn or self.aut_apply
        basis = window.basis(self.lattice)
        summary = ResidualSummary()
        Logger.log_processing_step(logger, "Automorphism sweep", {'window': str(window), 'basis': len(basis)})
        for p, q in itertools.combinations(range(len(basis)), 2):
            x, y = self.lie.basis_element(basis[p]), self.lie.basis_element(basis[q])
            residual = (apply_fn(a, self.lie.bracket(x, y))
                        - self.lie.bracket(apply_fn(a, x), apply_fn(a, y)))
            summary.record((basis[p], basis[q]), residual, not residual, len(residual))
        if summary.is_zero:
            Logger.log_success(logger, "Automorphism preserves brackets", {'checked': summary.checked})
        else:
            logger.warning("Bracket not preserved", nonzero=summary.nonzero, first=str(summary.failing_labels[:1]))
        return summary

    def extend_from_generators(self, images: Dict[BasisIndex, Element], window: Window) -> Dict[BasisIndex, Element]:
        """σ on every window basis element from σ(L(α,0)), σ(L(α,1)) via L(α,i+1) = ([L(0,0),L(α,i)] − αL(α,i))/i"""
        l00 = BasisIndex(self.lattice.zero, 0)
        if l00 not in images:
            raise MissingImage("Extension needs the image of L(0,0)")
        extended = {}
        for alpha in window.degrees(self.lattice):
            for i in (0, 1):
                index = BasisIndex(alpha, i)
                if index not in images:
                    raise MissingImage(f"No image for generator {index}")
                extended[index] = images[index]
            for i in range(1, window.level_bound):
                below = extended[BasisIndex(alpha, i)]
                extended[BasisIndex(alpha, i + 1)] = (
                    self.lie.bracket(images[l00], below) - below.scale(self.lattice.embed(alpha))
                ).scale(self.scalars.one / i)
        return {index: x for index, x in extended.items() if index.level <= window.level_bound}

    def rigidity_check(self, window: Window, images: Optional[Dict[BasisIndex, Element]] = None) -> Dict[str, object]:
        """A bracket-preserving window map fixing every L(α,0), L(α,1) is the identity"""
        if images is None:
            images = {BasisIndex(alpha, i): self.lie.basis_element(BasisIndex(alpha, i))
                      for alpha in window.degrees(self.lattice) for i in (0, 1)}
        extended = self.extend_from_generators(images, window)
        fixes_generators = all(images[index] == self.lie.basis_element(index) for index in images)
        identity = all(x == self.lie.basis_element(index) for index, x in extended.items())
        preserving = ResidualSummary()
        for a, b in itertools.combinations(sorted(extended, key=lambda i: (self.lattice.sort_key(i.degree), i.level)), 2):
            bracket = self.lie.bracket(self.lie.basis_element(a), self.lie.basis_element(b))
            if not all(window.contains(index) for index, _ in bracket.basic_terms()):
                continue
            image = Element()
            for index, value in bracket.basic_terms():
                image = image + extended[index].scale(value)
            residual = image - self.lie.bracket(extended[a], extended[b])
            preserving.record((a, b), residual, not residual, len(residual))
        return {
            'fixes_generators': fixes_generators,
            'bracket_preserving': preserving,
            'identity': identity,
            'rigid': (not fixes_generators) or (not preserving.is_zero) or identity,
        }
