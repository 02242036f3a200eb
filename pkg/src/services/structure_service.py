# src/services/structure_service.py
"""
Filtration and ideals of W(Γ), the ad-local-finiteness probe, the independence witness against
finite gradings, and the level subquotients.
"""
import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from shared.exceptions import (
    BetaInSupport, CentralTermPresent, InputError, VerificationError, ZeroElement, ZeroGamma
)
from shared.utils import Logger
from shared.validators import ResidualSummary

from .gamma_service import GammaLattice, GroupElement, Scalar
from .lie_service import (
    BasisIndex, BracketRule, Element, LieService, WGAMMA, WGAMMA_HAT, Window
)
from .linalg_service import LinearAlgebraService

logger = Logger.setup_logger(__name__)


@dataclass(frozen=True)
class ReductionStep:
    """One replayable step of a witness chain.

    depth, length: current <- [operand, current]
    descend:       current <- [operand, generator] modulo W^modulo_level
    project:       current <- ([operand, current] - shift*current) / divisor modulo W^modulo_level
    scale:         current <- factor * current
    """
    operation: str
    operand: Element
    result: Element
    modulo_level: Optional[int] = None
    detail: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)


@dataclass
class IdealReport:
    generator: Element
    minimal_level: int
    witness_chain: List[ReductionStep]
    basis_element: BasisIndex
    classified_as: Optional[str] = None
    reduction_level: Optional[int] = None
    memberships: Optional[ResidualSummary] = None
    closure: Optional[ResidualSummary] = None

    @property
    def certified(self) -> bool:
        return (self.classified_as is not None
                and self.memberships is not None and self.memberships.is_zero
                and self.closure is not None and self.closure.is_zero)


@dataclass
class ProbeResult:
    dimensions: List[int]
    highest_terms: List[Optional[Dict[str, Any]]]
    powers: List[Element]

    @property
    def strictly_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.dimensions, self.dimensions[1:]))


def truncate_below(x: Element, level: int) -> Element:
    """Image of x modulo W^level"""
    return Element({index: value for index, value in x.terms.items()
                    if index.is_central or index.level < level})


class StructureService:
    """Ideals, filtration and growth of ad-powers"""

    def __init__(self, lie: LieService, linalg: Optional[LinearAlgebraService] = None, level_slack: int = 1):
        self.lie = lie
        self.lattice: GammaLattice = lie.lattice
        self.scalars = lie.scalars
        self.linalg = linalg or LinearAlgebraService(self.scalars)
        self.level_slack = level_slack

    # -- filtration -------------------------------------------------------------------------

    def filtration_level(self, x: Element) -> int:
        """Largest n with x in W^n"""
        if x.has_central:
            raise CentralTermPresent("Filtration is defined on W; remove the central term")
        if not x:
            raise ZeroElement("The zero element lies in every W^n")
        return min(x.levels())

    # -- reduction to a basis element -------------------------------------------------------

    def reduce_to_basis(self, x: Element, window: Optional[Window] = None) -> IdealReport:
        """Depth reduction y = [x_α, x], then length reduction y = [L(α, last), x]"""
        self._require_generator(x)
        steps: List[ReductionStep] = []
        current = x
        while current.depth > 1:
            alpha = min(current.support(), key=self.lattice.sort_key)
            operand = current.homogeneous_component(alpha)
            result = self.lie.bracket(operand, current)
            steps.append(ReductionStep('depth', operand, result, detail={'degree': alpha}))
            current = result
        while len(current) > 1:
            (alpha,) = current.support()
            last = current.last_term(alpha)
            (index, _), = last.terms.items()
            operand = self.lie.basis_element(index)
            result = self.lie.bracket(operand, current)
            steps.append(ReductionStep('length', operand, result, detail={'degree': alpha, 'level': index.level}))
            current = result
        index, _ = current.single_term()
        logger.debug("Reduced to a basis element", steps=len(steps), index=str(index))
        return IdealReport(
            generator=x, minimal_level=index.level, witness_chain=steps, basis_element=index,
            reduction_level=index.level,
        )

    def descend_minimal_level(self, x: Element, start: BasisIndex) -> Tuple[List[ReductionStep], BasisIndex]:
        """Lower the level of a basis element in the ideal of x down to the filtration level of x"""
        floor = self.filtration_level(x)
        steps: List[ReductionStep] = []
        index = start
        while index.level > floor:
            top = index.level
            reduced = truncate_below(x, top)
            beta = self._degree_outside(reduced.support())
            operand = self.lie.L(beta, top - floor - 1)
            current = truncate_below(self.lie.bracket(operand, x), top)
            steps.append(ReductionStep('descend', operand, current, modulo_level=top, detail={'degree': beta}))

            degrees = sorted(current.support(), key=self.lattice.sort_key)
            target = degrees[0]
            eigenvalue = self.lattice.embed(target)
            l00 = self.lie.L(self.lattice.zero, 0)
            for other in degrees[1:]:
                shift = self.lattice.embed(other)
                divisor = eigenvalue - shift
                current = truncate_below(
                    (self.lie.bracket(l00, current) - current.scale(shift)).scale(self.scalars.one / divisor), top
                )
                steps.append(ReductionStep('project', l00, current, modulo_level=top,
                                           detail={'shift': shift, 'divisor': divisor}))

            new_index, coeff = current.single_term()
            current = current.scale(self.scalars.one / coeff)
            steps.append(ReductionStep('scale', self.lie.basis_element(new_index), current,
                                       detail={'factor': self.scalars.one / coeff}))
            index = new_index
        return steps, index

    def replay_chain(self, start: Element, steps: Sequence[ReductionStep]) -> Element:
        """Re-execute a witness chain through the bracket engine"""
        current = start
        for position, step in enumerate(steps):
            if step.operation in ('depth', 'length'):
                current = self.lie.bracket(step.operand, current)
            elif step.operation == 'descend':
                current = self.lie.bracket(step.operand, start)
            elif step.operation == 'project':
                current = (self.lie.bracket(step.operand, current) - current.scale(step.detail['shift'])
                           ).scale(self.scalars.one / step.detail['divisor'])
            elif step.operation == 'scale':
                current = current.scale(step.detail['factor'])
            else:
                raise VerificationError(f"Unknown witness step {step.operation!r}")
            if step.modulo_level is not None:
                current = truncate_below(current, step.modulo_level)
            if current != step.result:
                raise VerificationError(f"Witness step {position} ({step.operation}) does not replay")
        return current

    # -- ideals -----------------------------------------------------------------------------

    def theta_apply(self, beta: GroupElement, gamma: GroupElement, x: Element) -> Element:
        """ad_{L(β−γ,0)}ad_{L(γ,0)} − 2 ad_{L(β,0)}ad_{L(0,0)} + ad_{L(β+γ,0)}ad_{L(−γ,0)}"""
        if gamma.is_zero:
            raise ZeroGamma("theta needs a nonzero γ")
        L = self.lie.L
        bracket = self.lie.bracket
        zero = self.lattice.zero
        return (bracket(L(beta - gamma, 0), bracket(L(gamma, 0), x))
                - bracket(L(beta, 0), bracket(L(zero, 0), x)).scale(2)
                + bracket(L(beta + gamma, 0), bracket(L(-gamma, 0), x)))

    def ideal_generated(self, x: Element, window: Window) -> IdealReport:
        """Classify the ideal generated by x as W^j on the window, with a replayable certificate"""
        self._require_generator(x)
        Logger.log_processing_step(logger, "Classifying ideal", {'window': str(window), 'terms': len(x)})
        report = self.reduce_to_basis(x, window)
        descent, index = self.descend_minimal_level(x, report.basis_element)
        chain = report.witness_chain + descent
        self.replay_chain(x, chain)

        level = index.level
        report.witness_chain = chain
        report.basis_element = index
        report.minimal_level = level
        report.memberships = self._certify_memberships(index, window)
        report.closure = self._certify_closure(x, level, window)
        report.classified_as = f"W^{level}"
        if report.certified:
            Logger.log_success(logger, "Ideal classified", {'classified_as': report.classified_as,
                                                            'steps': len(chain)})
        else:
            logger.warning("Ideal certificate incomplete", classified_as=report.classified_as,
                           memberships=report.memberships.nonzero, closure=report.closure.nonzero)
        return report

    def _certify_memberships(self, index: BasisIndex, window: Window) -> ResidualSummary:
        """Every window L(β, j), j ≥ level, follows from L(β₀, level) by θ and level raising"""
        summary = ResidualSummary()
        gamma = self.lattice.generator(0)
        factor = -4 * self.lattice.embed(gamma) ** 2
        beta0, level = index.degree, index.level
        for beta in window.degrees(self.lattice):
            image = self.theta_apply(beta - beta0, gamma, self.lie.basis_element(index))
            expected = self.lie.L(beta, level, factor)
            summary.record(f"theta -> L({beta},{level})", image - expected, image == expected)
        for j in range(level + 1, window.level_bound + 1):
            for beta in window.degrees(self.lattice):
                combination = self._raise_combination(beta, j)
                target = self.lie.L(beta, j)
                summary.record(f"raise -> L({beta},{j})", combination - target, combination == target)
        return summary

    def _raise_combination(self, beta: GroupElement, j: int) -> Element:
        """L(β,j) = ([L(β−δ₁,1), L(δ₁,j−1)] − [L(β−δ₂,1), L(δ₂,j−1)]) / (2(δ₁−δ₂))"""
        d1, d2 = self._deltas(beta)
        first = self.lie.bracket(self.lie.L(beta - d1, 1), self.lie.L(d1, j - 1))
        second = self.lie.bracket(self.lie.L(beta - d2, 1), self.lie.L(d2, j - 1))
        divisor = 2 * (self.lattice.embed(d1) - self.lattice.embed(d2))
        return (first - second).scale(self.scalars.one / divisor)

    def _deltas(self, beta: GroupElement) -> Tuple[GroupElement, GroupElement]:
        e1 = self.lattice.generator(0)
        return self.lattice.zero, (e1 if beta.coefficients[0] > 0 else -e1)

    def _certify_closure(self, x: Element, level: int, window: Window) -> ResidualSummary:
        """Brackets of x with window basis elements never leave W^level"""
        summary = ResidualSummary()
        for index in window.basis(self.lattice):
            image = self.lie.bracket(self.lie.basis_element(index), x)
            ok = not image or min(image.levels()) >= level
            summary.record(f"[{index}, x]", image, ok, len(image))
        return summary

    # -- nested brackets --------------------------------------------------------------------

    def nested_brackets_for(self, beta: GroupElement, j: int, m: int) -> List[Element]:
        """The 2^m nested brackets [W¹,[W¹,…,[W¹, W^{j−m}]…]] whose combination is L(β, j)"""
        if m == 0:
            return [self.lie.L(beta, j)]
        brackets = []
        for delta in self._deltas(beta):
            outer = self.lie.L(beta - delta, 1)
            for inner in self.nested_brackets_for(delta, j - 1, m - 1):
                brackets.append(self.lie.bracket(outer, inner))
        return brackets

    def nested_bracket_span_check(self, n: int, m: int, window: Window) -> bool:
        """W^n = ad^m_{W¹}(W^{n−m}) on the window, by an exact rank comparison"""
        if not 0 <= m <= n:
            raise InputError(f"nested span check needs 0 <= m <= n, got m={m}, n={n}")
        if m == 0:
            return True
        targets, spanning = [], []
        for j in range(n, n + self.level_slack + 1):
            for beta in window.degrees(self.lattice):
                targets.append(self.lie.L(beta, j))
                spanning.extend(self.nested_brackets_for(beta, j, m))
        base = self.linalg.element_rank(spanning)
        covered = self.linalg.element_rank(spanning + targets) == base
        logger.debug("Nested bracket span", n=n, m=m, brackets=len(spanning), rank=base, covered=covered)
        return covered

    # -- growth of ad powers ----------------------------------------------------------------

    def ad_probe(self, x: Element, y: Element, steps: int, rule: BracketRule = WGAMMA) -> ProbeResult:
        """Ranks of span{ad_x^k y : k ≤ K} and the predicted highest terms"""
        if steps < 1:
            raise InputError("ad_probe needs at least one step")
        powers = [y]
        for _ in range(steps):
            powers.append(self.lie.bracket(x, powers[-1], rule))
        dimensions = [self.linalg.element_rank(powers[:k + 1]) for k in range(steps + 1)]
        highest = [self._predicted_highest_term(x, y, k, powers[k], rule) for k in range(steps + 1)]
        return ProbeResult(dimensions, highest, powers)

    def _predicted_highest_term(self, x: Element, y: Element, k: int, computed: Element,
                                rule: BracketRule) -> Optional[Dict[str, Any]]:
        if rule.kind != 'wgamma' or not x or x.depth != 1 or not y.is_basis_multiple:
            return None
        (alpha0,) = x.support()
        last = x.last_term(alpha0)
        (x_index, a), = last.terms.items()
        i0 = x_index.level
        y_index, b = y.single_term()
        j = y_index.level
        coefficient = b * a ** k
        for p in range(k):
            coefficient = coefficient * (j - i0 + p * (i0 + 1))
        index = BasisIndex(y_index.degree + alpha0 * k, j + k * (i0 + 1))
        actual = computed.coefficient(index) or self.scalars.zero
        return {'index': index, 'predicted': coefficient, 'computed': actual, 'matches': actual == coefficient}

    def grading_independence_witness(self, x: Element, beta: GroupElement, steps: int) -> bool:
        """ad_x^k L(β,1), k = 0..K, are linearly independent"""
        if not x:
            raise ZeroElement("The witness needs a nonzero x")
        if beta in x.support():
            raise BetaInSupport(f"β = {beta} lies in Supp x")
        powers = [self.lie.L(beta, 1)]
        for _ in range(steps):
            powers.append(self.lie.bracket(x, powers[-1]))
        return self.linalg.element_rank(powers) == steps + 1

    # -- subquotients -----------------------------------------------------------------------

    def inspect_subquotient(self, m: int, n: int, window: Window) -> Dict[str, Any]:
        """Finite grading, closure and Jacobi of W^m / W^{n+1} on the window"""
        rule = BracketRule.subquotient(m, n)
        basis = window.basis(self.lattice, min_level=m, max_level=n)
        dimensions = {}
        for index in basis:
            dimensions[index.degree] = dimensions.get(index.degree, 0) + 1
        closure = ResidualSummary()
        for a, b in itertools.combinations_with_replacement(basis, 2):
            image = self.lie.bracket(self.lie.basis_element(a), self.lie.basis_element(b), rule)
            ok = all(m <= index.level <= n for index, _ in image.basic_terms())
            closure.record(f"[{a}, {b}]", image, ok, len(image))
        jacobi = self.lie.jacobi_sweep(window, rule)
        expected = min(n, window.level_bound) - m + 1
        report = {
            'rule': str(rule),
            'dimension_per_degree': expected,
            'finitely_graded': all(d == expected for d in dimensions.values()),
            'closed': closure.is_zero,
            'jacobi': jacobi,
        }
        if m == 0 and n == 0:
            report['virasoro'] = self.virasoro_closure(window)
        return report

    def virasoro_closure(self, window: Window) -> ResidualSummary:
        """{L(α,0), C} closes under the central bracket and matches the level-zero subquotient"""
        summary = ResidualSummary()
        level_zero = window.basis(self.lattice, max_level=0)
        quotient = BracketRule.subquotient(0, 0)
        for a, b in itertools.combinations(level_zero, 2):
            x, y = self.lie.basis_element(a), self.lie.basis_element(b)
            hat = self.lie.bracket(x, y, WGAMMA_HAT)
            truncated = self.lie.bracket(x, y, quotient)
            ok = hat.without_central() == truncated and all(i.level == 0 for i, _ in hat.basic_terms())
            summary.record(f"[{a}, {b}]", hat - truncated, ok, len(hat))
        return summary

    # -- helpers ----------------------------------------------------------------------------

    def _require_generator(self, x: Element) -> None:
        if x.has_central:
            raise CentralTermPresent("Ideals are computed in W; remove the central term")
        if not x:
            raise ZeroElement("The zero element generates the zero ideal")

    def _degree_outside(self, support: Sequence[GroupElement]) -> GroupElement:
        taken = set(support)
        bound = 0
        while True:
            for beta in self.lattice.degrees(bound):
                if beta not in taken:
                    return beta
            bound += 1
