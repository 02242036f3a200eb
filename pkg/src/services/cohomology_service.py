# src/services/cohomology_service.py
"""
2-cocycles on W(Γ): the canonical cocycle φ₀, coboundaries ψ_f, table cocycles, the inductive
normalization ψ = c·φ₀ + ψ_f and the infeasibility certificate for φ₀ being a coboundary.
"""
import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from shared.exceptions import (
    CentralTermPresent, InconsistentC, InputError, NotACocycle, OutOfWindow
)
from shared.utils import Logger
from shared.validators import ResidualSummary

from .gamma_service import GammaLattice, Scalar
from .lie_service import BasisIndex, Element, LieService, WGAMMA, Window
from .linalg_service import SparseEchelon

logger = Logger.setup_logger(__name__)


@dataclass
class LinearFunctional:
    """f on basis indices; zero outside the stored values"""
    values: Dict[BasisIndex, Scalar] = field(default_factory=dict)
    window: Optional[Window] = None

    def __call__(self, index: BasisIndex, zero: Scalar) -> Scalar:
        return self.values.get(index, zero)

    def support(self) -> List[BasisIndex]:
        return [index for index, value in self.values.items() if value]


@dataclass
class Canonical:
    """φ₀(L(α,i), L(β,j)) = δ_{α+β,0} δ_{i+j,0} (α³−α)/12"""
    kind: str = 'canonical'


@dataclass
class Coboundary:
    f: LinearFunctional
    kind: str = 'coboundary'


@dataclass
class Table:
    """Values on ordered basis pairs of a window; antisymmetry supplies the reverse order"""
    entries: Dict[Tuple[BasisIndex, BasisIndex], Scalar]
    window: Window
    kind: str = 'table'


@dataclass
class LinearCombo:
    terms: List[Tuple[Scalar, 'Cocycle']]
    kind: str = 'combo'


Cocycle = Union[Canonical, Coboundary, Table, LinearCombo]


@dataclass
class NormalizationResult:
    c: Scalar
    f: LinearFunctional
    residual_max_window: Optional[Window]
    failures: List[Tuple[BasisIndex, BasisIndex]]
    residual: ResidualSummary
    closure: Window

    @property
    def success(self) -> bool:
        return not self.failures


@dataclass
class FitResult:
    feasible: bool
    f: Optional[LinearFunctional]
    certificate: List[Dict[str, Any]]
    equations: int
    rank: int


class CohomologyService:
    """Evaluation and normalization of 2-cocycles"""

    def __init__(self, lie: LieService, c_checks: Sequence[int] = (3,)):
        self.lie = lie
        self.lattice: GammaLattice = lie.lattice
        self.scalars = lie.scalars
        self.c_checks = tuple(c_checks)
        if any(abs(k) < 2 for k in self.c_checks):
            raise InputError(f"c cross-checks need multiples with |k| >= 2, got {self.c_checks}")

    # -- construction -----------------------------------------------------------------------

    def canonical(self) -> Canonical:
        return Canonical()

    def coboundary(self, f: LinearFunctional) -> Coboundary:
        return Coboundary(f)

    def combo(self, terms: Sequence[Tuple[Any, Cocycle]]) -> LinearCombo:
        return LinearCombo([(self.scalars(coeff), cocycle) for coeff, cocycle in terms])

    def table_from(self, psi: Cocycle, window: Window) -> Table:
        """Tabulate a cocycle on the ordered pairs of a window"""
        basis = window.basis(self.lattice)
        entries = {}
        for a, b in itertools.combinations(basis, 2):
            value = self.basis_value(psi, a, b)
            if value:
                entries[(a, b)] = value
        return Table(entries, window)

    @staticmethod
    def required_closure(window: Window) -> Window:
        """Contains every bracket image of window pairs"""
        return window.grown(2, 1)

    # -- evaluation -------------------------------------------------------------------------

    def basis_value(self, psi: Cocycle, a: BasisIndex, b: BasisIndex) -> Scalar:
        zero = self.scalars.zero
        if a.is_central or b.is_central:
            raise CentralTermPresent("Cocycles are forms on W; remove the central term")
        if isinstance(psi, Canonical):
            if a.level or b.level or not (a.degree + b.degree).is_zero:
                return zero
            value = self.lattice.embed(a.degree)
            return (value ** 3 - value) / 12
        if isinstance(psi, Coboundary):
            total = zero
            for index, coeff in self.lie.bracket_basis(a, b, WGAMMA).items():
                total = total + coeff * psi.f(index, zero)
            return total
        if isinstance(psi, Table):
            if not (psi.window.contains(a) and psi.window.contains(b)):
                raise OutOfWindow(f"Table cocycle is stored on {psi.window}; ({a}, {b}) lies outside")
            if (a, b) in psi.entries:
                return psi.entries[(a, b)]
            if (b, a) in psi.entries:
                return -psi.entries[(b, a)]
            return zero
        if isinstance(psi, LinearCombo):
            total = zero
            for coeff, inner in psi.terms:
                total = total + coeff * self.basis_value(inner, a, b)
            return total
        raise InputError(f"Unknown cocycle kind {type(psi).__name__}")

    def cocycle_eval(self, psi: Cocycle, x: Element, y: Element) -> Scalar:
        """Bilinear extension of the basis values"""
        if x.has_central or y.has_central:
            raise CentralTermPresent("Cocycles are forms on W; remove the central term")
        total = self.scalars.zero
        for a, ca in x.basic_terms():
            for b, cb in y.basic_terms():
                total = total + ca * cb * self.basis_value(psi, a, b)
        return total

    def _require_coverage(self, psi: Cocycle, window: Window) -> None:
        if isinstance(psi, Table):
            if (psi.window.degree_bound < window.degree_bound
                    or psi.window.level_bound < window.level_bound):
                raise OutOfWindow(f"Table cocycle on {psi.window} does not cover the required {window}")
        elif isinstance(psi, LinearCombo):
            for _, inner in psi.terms:
                self._require_coverage(inner, window)

    def cocycle_condition_check(self, psi: Cocycle, window: Window) -> ResidualSummary:
        """ψ(x,[y,z]) + ψ(y,[z,x]) + ψ(z,[x,y]) on unordered triples of distinct window basis elements"""
        self._require_coverage(psi, self.required_closure(window))
        basis = window.basis(self.lattice)
        elements = [self.lie.basis_element(index) for index in basis]
        summary = ResidualSummary()
        Logger.log_processing_step(logger, "Cocycle sweep", {'window': str(window), 'basis': len(basis)})
        for p, q, s in itertools.combinations(range(len(basis)), 3):
            x, y, z = elements[p], elements[q], elements[s]
            value = (self.cocycle_eval(psi, x, self.lie.bracket(y, z))
                     + self.cocycle_eval(psi, y, self.lie.bracket(z, x))
                     + self.cocycle_eval(psi, z, self.lie.bracket(x, y)))
            summary.record((basis[p], basis[q], basis[s]), value, not value)
        if not summary.is_zero:
            logger.warning("Cocycle identity fails", nonzero=summary.nonzero, first=str(summary.failing_labels[:1]))
        return summary

    # -- normalization ----------------------------------------------------------------------

    def build_f(self, psi: Cocycle, window: Window) -> LinearFunctional:
        """f(L(α,i)) by induction on i"""
        unit = self.lattice.unit
        zero = self.lattice.zero
        half = self.scalars(1) / 2
        L = BasisIndex

        def psi_at(a: BasisIndex, b: BasisIndex) -> Scalar:
            return self.basis_value(psi, a, b)

        values: Dict[BasisIndex, Scalar] = {}
        for alpha in window.degrees(self.lattice):
            value = self.lattice.embed(alpha)
            for i in range(window.level_bound + 1):
                if i == 0 and alpha.is_zero:
                    f = half * psi_at(L(-unit, 0), L(unit, 0))
                elif i == 0:
                    f = psi_at(L(zero, 0), L(alpha, 0)) / value
                elif i == 1 and alpha.is_zero:
                    f = half * (psi_at(L(zero, 0), L(zero, 1)) + psi_at(L(-unit, 1), L(unit, 0)))
                elif i == 1:
                    f = (psi_at(L(zero, 0), L(alpha, 1)) + psi_at(L(zero, 1), L(alpha, 0))) / (2 * value)
                elif i == 2:
                    f = half * (psi_at(L(zero, 0), L(alpha, 1)) - psi_at(L(zero, 1), L(alpha, 0)))
                else:
                    f = (psi_at(L(zero, 0), L(alpha, i - 1)) - value * values[L(alpha, i - 1)]) / (i - 1)
                values[L(alpha, i)] = f
        return LinearFunctional(values, window)

    def minus_coboundary(self, psi: Cocycle, f: LinearFunctional) -> LinearCombo:
        return LinearCombo([(self.scalars.one, psi), (-self.scalars.one, Coboundary(f))])

    def extract_c(self, phi: Cocycle, window: Window) -> Scalar:
        """c from the (2u, −2u) level-zero pair, cross-checked on further multiples of the unit"""
        unit = self.lattice.unit
        canonical = Canonical()
        estimates = []
        for k in (2,) + self.c_checks:
            degree = unit * k
            if not window.contains_degree(degree):
                if k == 2:
                    raise OutOfWindow(f"extract_c needs degree {degree} inside {window}")
                logger.debug("Skipping c cross-check outside window", multiple=k)
                continue
            a, b = BasisIndex(degree, 0), BasisIndex(-degree, 0)
            reference = self.basis_value(canonical, a, b)
            estimates.append((k, self.basis_value(phi, a, b) / reference))
        c = estimates[0][1]
        for k, estimate in estimates[1:]:
            if estimate != c:
                raise InconsistentC(
                    f"c estimates disagree: {self.scalars.format(c)} from 2·unit, "
                    f"{self.scalars.format(estimate)} from {k}·unit"
                )
        return c

    def normalize_cocycle(self, psi: Cocycle, window: Window, check_cocycle: bool = True) -> NormalizationResult:
        """ψ = c·φ₀ + ψ_f on every window pair"""
        closure = self.required_closure(window)
        self._require_coverage(psi, closure)
        Logger.log_processing_step(logger, "Normalizing cocycle", {'window': str(window), 'closure': str(closure)})
        if check_cocycle:
            condition = self.cocycle_condition_check(psi, window)
            if not condition.is_zero:
                raise NotACocycle(f"Cocycle identity fails on {condition.nonzero} triples, first {condition.failing_labels[0]}")

        f = self.build_f(psi, closure)
        phi = self.minus_coboundary(psi, f)
        c = self.extract_c(phi, window)
        normalized = LinearCombo([(self.scalars.one, phi), (-c, Canonical())])

        basis = window.basis(self.lattice)
        summary = ResidualSummary()
        failures = []
        for a, b in itertools.combinations(basis, 2):
            value = self.basis_value(normalized, a, b)
            summary.record((a, b), value, not value)
            if value:
                failures.append((a, b))
        result = NormalizationResult(c, f, self._max_clean_window(window, failures), failures, summary, closure)
        if result.success:
            Logger.log_success(logger, "Cocycle normalized", {'c': self.scalars.format(c), 'pairs': summary.checked})
        else:
            logger.warning("Normalization leaves a residual", failures=len(failures), first=str(failures[0]))
        return result

    def _max_clean_window(self, window: Window, failures: List[Tuple[BasisIndex, BasisIndex]]) -> Optional[Window]:
        """Largest Window(min(t, A), min(t, I)) containing no failing pair"""
        if not failures:
            return window
        best = None
        for t in range(1, max(window.degree_bound, window.level_bound) + 1):
            candidate = Window(min(t, window.degree_bound), min(t, window.level_bound))
            if any(candidate.contains(a) and candidate.contains(b) for a, b in failures):
                break
            best = candidate
        return best

    # -- coboundary fit ---------------------------------------------------------------------

    def _lifted_key(self, index: BasisIndex) -> Tuple:
        return (self.lattice.sort_key(index.degree), index.level)

    def coboundary_fit(self, psi: Cocycle, window: Window) -> FitResult:
        """Solve f([x,y]) = ψ(x,y) over window pairs, or return a minimal contradictory subsystem"""
        basis = window.basis(self.lattice)
        pairs = []
        for a, b in itertools.combinations(basis, 2):
            if self._lifted_key(a) < self._lifted_key(b):
                a, b = b, a
            pairs.append((a, b))
        pairs.sort(key=lambda p: (p[0].level + p[1].level, max(p[0].degree.height, p[1].degree.height),
                                  self._lifted_key(p[0]), self._lifted_key(p[1])))

        echelon = SparseEchelon(self.scalars)
        for a, b in pairs:
            equation = dict(self.lie.bracket_basis(a, b, WGAMMA))
            if not echelon.add(equation, self.basis_value(psi, a, b), (a, b)):
                break

        if echelon.consistent:
            f = LinearFunctional(echelon.solution())
            logger.debug("Coboundary fit feasible", equations=len(echelon.labels), rank=echelon.rank)
            return FitResult(True, f, [], len(echelon.labels), echelon.rank)

        certificate = []
        for position in echelon.minimal_conflict():
            coefficients, rhs = echelon.equations[position]
            certificate.append({'pair': echelon.labels[position], 'equation': coefficients, 'rhs': self.scalars(rhs)})
        Logger.log_success(logger, "Coboundary fit infeasible", {'certificate': len(certificate)})
        return FitResult(False, None, certificate, len(echelon.labels), echelon.rank)

    # -- intermediate identities ------------------------------------------------------------

    def normalization_identities(self, psi: Cocycle, window: Window, max_total_level: int = 5) -> Dict[str, ResidualSummary]:
        """Named identities satisfied by ψ − ψ_f and by the fully normalized form"""
        closure = self.required_closure(window)
        self._require_coverage(psi, closure)
        f = self.build_f(psi, closure)
        phi_prime = self.minus_coboundary(psi, f)
        c = self.extract_c(phi_prime, window)
        phi = LinearCombo([(self.scalars.one, phi_prime), (-c, Canonical())])
        unit = self.lattice.unit
        zero = self.lattice.zero
        L = BasisIndex
        degrees = window.degrees(self.lattice)
        checks: Dict[str, ResidualSummary] = {name: ResidualSummary() for name in (
            'against_L00', 'L00_with_La1', 'L01_with_La0', 'unit_pair', 'level_zero', 'recurrence', 'ladder'
        )}

        def record(name: str, label, value: Scalar) -> None:
            checks[name].record(label, value, not value)

        for alpha in degrees:
            for i in range(1, window.level_bound + 1):
                record('against_L00', (alpha, i), self.basis_value(phi_prime, L(zero, 0), L(alpha, i)))
            record('L00_with_La1', alpha, self.basis_value(phi_prime, L(zero, 0), L(alpha, 1)))
            record('L01_with_La0', alpha, self.basis_value(phi_prime, L(zero, 1), L(alpha, 0)))
        if window.contains_degree(unit):
            record('unit_pair', 'L(u,0), L(-u,1)', self.basis_value(phi_prime, L(unit, 0), L(-unit, 1)))

        for alpha, beta in itertools.product(degrees, repeat=2):
            record('level_zero', (alpha, beta), self.basis_value(phi, L(alpha, 0), L(beta, 0)))
            weight = self.lattice.embed(alpha + beta)
            for i in range(1, window.level_bound + 1):
                value = (weight * self.basis_value(phi, L(alpha, 0), L(beta, i - 1))
                         + (i - 1) * self.basis_value(phi, L(alpha, 0), L(beta, i)))
                record('recurrence', (alpha, beta, i), value)
            for i in range(0, window.level_bound + 1):
                for j in range(0, window.level_bound + 1):
                    if i + j <= max_total_level:
                        record('ladder', (alpha, i, beta, j), self.basis_value(phi, L(alpha, i), L(beta, j)))
        return checks
