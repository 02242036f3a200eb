# src/services/serialization_service.py
"""
JSON codecs for every document the command line reads or writes. Scalars travel as canonical
strings; elements also carry their canonical expression text.
"""
import functools
from typing import Any, Callable, Dict, List, Optional

from sympy.polys.fields import FracElement

from shared.exceptions import InputError
from shared.utils import Logger
from shared.validators import ResidualSummary

from .automorphism_service import AutElement, AutomorphismService
from .cohomology_service import (
    Canonical, Coboundary, Cocycle, FitResult, LinearCombo, LinearFunctional, NormalizationResult, Table
)
from .completion_service import CompletionComponent, CompletionElement
from .derivation_service import AdditiveMap, DecompositionResult, DerivationSpec
from .expression_service import ExpressionService
from .gamma_service import GroupElement, ScaleMap, Scalar
from .lie_service import BasisIndex, CENTRAL, Element, LieService, Window
from .structure_service import IdealReport, ProbeResult, ReductionStep

logger = Logger.setup_logger(__name__)


def document_reader(kind: str) -> Callable:
    """Report a document with missing keys or wrong shapes as an InputError naming its kind"""

    def decorate(read: Callable) -> Callable:
        @functools.wraps(read)
        def wrapper(self, value, *args, **kwargs):
            try:
                return read(self, value, *args, **kwargs)
            except KeyError as e:
                raise InputError(f"Malformed {kind} document: missing key {e}")
            except (TypeError, AttributeError, ValueError) as e:
                raise InputError(f"Malformed {kind} document: {e}")
        return wrapper

    return decorate


class SerializationService:
    """Encode results as JSON-ready dicts and decode input documents"""

    def __init__(self, lie: LieService, expressions: Optional[ExpressionService] = None):
        self.lie = lie
        self.lattice = lie.lattice
        self.scalars = lie.scalars
        self.expressions = expressions or ExpressionService(lie)
        self.generator_names = lie.lattice.config.generator_names

    # -- ground -----------------------------------------------------------------------------

    def scalar_to_json(self, value: Scalar) -> str:
        return self.scalars.format(value)

    def scalar_from_json(self, value: Any) -> Scalar:
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise InputError(f"Scalars are integers or strings, got {value!r}")
        return self.scalars(value)

    def degree_to_json(self, alpha: GroupElement) -> List[int]:
        return list(alpha.coefficients)

    def degree_from_json(self, value: Any) -> GroupElement:
        if isinstance(value, int) and not isinstance(value, bool):
            return self.lattice.element(value)
        if isinstance(value, list) and all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            return self.lattice.element(value)
        raise InputError(f"A degree is an integer list of length {self.lattice.rank}, got {value!r}")

    def index_to_json(self, index: BasisIndex) -> Any:
        if index.is_central:
            return 'C'
        return {'degree': self.degree_to_json(index.degree), 'level': index.level}

    @document_reader('basis index')
    def index_from_json(self, value: Any) -> BasisIndex:
        if value == 'C':
            return CENTRAL
        if not isinstance(value, dict) or 'degree' not in value:
            raise InputError(f"A basis index is {{\"degree\": [...], \"level\": i}} or \"C\", got {value!r}")
        level = value.get('level', value.get('i', 0))
        if not isinstance(level, int) or level < 0:
            raise InputError(f"Basis level must be a nonnegative integer, got {level!r}")
        return BasisIndex(self.degree_from_json(value['degree']), level)

    def window_to_json(self, window: Window) -> Dict[str, int]:
        return {'A': window.degree_bound, 'I': window.level_bound}

    def window_from_json(self, value: Dict[str, Any]) -> Window:
        try:
            return Window(int(value['A']), int(value['I']))
        except (KeyError, TypeError, ValueError):
            raise InputError(f"A window is {{\"A\": int, \"I\": int}}, got {value!r}")

    # -- elements ---------------------------------------------------------------------------

    def element_to_json(self, x: Element) -> Dict[str, Any]:
        terms = []
        document: Dict[str, Any] = {}
        for index, value in self.lie.sorted_terms(x):
            if index.is_central:
                document['central'] = self.scalar_to_json(value)
            else:
                terms.append({'degree': self.degree_to_json(index.degree), 'level': index.level,
                              'coeff': self.scalar_to_json(value)})
        document['terms'] = terms
        document['text'] = self.expressions.format_element(x)
        return document

    @document_reader('element')
    def element_from_json(self, value: Any) -> Element:
        """A DSL string, {"expr": ...}, {"terms": [...], "central"?} or a bare term list"""
        if isinstance(value, str):
            return self.expressions.eval_text(value)
        if isinstance(value, dict) and 'expr' in value:
            return self.expressions.eval_text(value['expr'])
        if isinstance(value, dict):
            terms, central = value.get('terms', []), value.get('central')
        elif isinstance(value, list):
            terms, central = value, None
        else:
            raise InputError(f"Not an element document: {value!r}")
        result: Dict[BasisIndex, Scalar] = {}
        for term in terms:
            index = self.index_from_json(term)
            result[index] = result.get(index, self.scalars.zero) + self.scalar_from_json(term.get('coeff', 1))
        if central is not None:
            result[CENTRAL] = self.scalar_from_json(central)
        return Element(result)

    def completion_to_json(self, x: CompletionElement) -> Dict[str, Any]:
        components = []
        for gamma, component in sorted(x.items(), key=lambda item: self.lattice.sort_key(item[0])):
            components.append({
                'degree': self.degree_to_json(gamma),
                'coefficients': [self.scalar_to_json(v) for v in component.coefficients],
                'valid_order': component.valid_order,
                'exact': component.exact,
            })
        return {'components': components}

    @document_reader('completion')
    def completion_from_json(self, value: Any) -> CompletionElement:
        """{"components": [...]} or any element document (read as exact)"""
        if not (isinstance(value, dict) and 'components' in value):
            return CompletionElement.from_element(self.element_from_json(value))
        components = {}
        for entry in value['components']:
            try:
                gamma = self.degree_from_json(entry['degree'])
                coefficients = tuple(self.scalar_from_json(v) for v in entry['coefficients'])
                exact = bool(entry.get('exact', False))
                order = entry.get('valid_order', len(coefficients) - 1)
            except (KeyError, TypeError) as e:
                raise InputError(f"Malformed completion component {entry!r}: {e}")
            if gamma in components:
                raise InputError(f"Degree {gamma} listed twice")
            components[gamma] = CompletionComponent(coefficients, int(order), exact)
        return CompletionElement(components)

    # -- derivations ------------------------------------------------------------------------

    def additive_map_to_json(self, phi: AdditiveMap) -> Dict[str, str]:
        return {name: self.scalar_to_json(v) for name, v in zip(self.generator_names, phi.values)}

    @document_reader('additive map')
    def additive_map_from_json(self, value: Dict[str, Any]) -> AdditiveMap:
        unknown = set(value) - set(self.generator_names)
        if unknown:
            raise InputError(f"Additive map names unknown generators {sorted(unknown)}")
        return AdditiveMap(tuple(self.scalar_from_json(value.get(name, 0)) for name in self.generator_names))

    def derivation_to_json(self, D: DerivationSpec) -> Dict[str, Any]:
        if D.kind == 'symbolic':
            return {'kind': 'symbolic', 'y': self.completion_to_json(D.y), 'phi': self.additive_map_to_json(D.phi)}
        images = []
        for index in sorted(D.images, key=lambda i: (self.lattice.sort_key(i.degree), i.level)):
            images.append({'alpha': self.degree_to_json(index.degree), 'i': index.level,
                           'image': self.completion_to_json(D.images[index])})
        return {'kind': 'table', 'images': images}

    @document_reader('derivation')
    def derivation_from_json(self, value: Dict[str, Any]) -> DerivationSpec:
        kind = value.get('kind')
        if kind == 'symbolic':
            y = self.completion_from_json(value.get('y', {'terms': []}))
            return DerivationSpec.symbolic(y, self.additive_map_from_json(value.get('phi', {})))
        if kind == 'table':
            images = {}
            for entry in value.get('images', []):
                level = entry.get('i')
                if level not in (0, 1):
                    raise InputError(f"Table derivations list images of levels 0 and 1 only, got {level!r}")
                index = BasisIndex(self.degree_from_json(entry['alpha']), level)
                images[index] = self.completion_from_json(entry['image'])
            return DerivationSpec.table(images)
        raise InputError(f"Derivation kind must be 'symbolic' or 'table', got {kind!r}")

    def decomposition_to_json(self, result: DecompositionResult) -> Dict[str, Any]:
        return {
            'y': self.completion_to_json(result.y),
            'y_text': self.expressions.format_element(result.y.truncated_element()),
            'phi': self.additive_map_to_json(result.phi),
            'c': self.scalar_to_json(result.c),
            'residual': self.residual_to_json(result.residual),
            'y_in_W': result.y_in_W,
            'order': result.order,
            'details': self.plain(result.details),
        }

    # -- automorphisms ----------------------------------------------------------------------

    def aut_to_json(self, a: AutElement) -> Dict[str, Any]:
        return {
            'tau': {name: self.scalar_to_json(v) for name, v in zip(self.generator_names, a.tau.values)},
            'c': {'value': self.scalar_to_json(a.c.value), 'matrix': [list(row) for row in a.c.matrix]},
        }

    @document_reader('automorphism')
    def aut_from_json(self, value: Dict[str, Any], automorphisms: AutomorphismService) -> AutElement:
        if 'tau' not in value and 'c' in value:
            return automorphisms.scale_only(self._scale_from_json(value['c']))
        tau = value.get('tau', {})
        missing = [name for name in self.generator_names if name not in tau]
        if missing:
            raise InputError(f"Character values missing for generators {missing}")
        character = automorphisms.character([self.scalar_from_json(tau[name]) for name in self.generator_names])
        if 'c' not in value:
            return automorphisms.character_only(character)
        return AutElement(character, self._scale_from_json(value['c']))

    def _scale_from_json(self, c: Dict[str, Any]) -> ScaleMap:
        try:
            return self.lattice.scale_map(self.scalar_from_json(c['value']), c['matrix'])
        except (KeyError, TypeError) as e:
            raise InputError(f"Scale map needs 'value' and 'matrix': {e}")

    # -- cocycles ---------------------------------------------------------------------------

    def functional_to_json(self, f: LinearFunctional) -> List[Dict[str, Any]]:
        entries = []
        for index in sorted(f.support(), key=lambda i: (self.lattice.sort_key(i.degree), i.level)):
            entries.append({'alpha': self.degree_to_json(index.degree), 'i': index.level,
                            'value': self.scalar_to_json(f.values[index])})
        return entries

    @document_reader('functional')
    def functional_from_json(self, value: List[Dict[str, Any]]) -> LinearFunctional:
        values = {}
        for entry in value:
            index = BasisIndex(self.degree_from_json(entry['alpha']), int(entry['i']))
            values[index] = self.scalar_from_json(entry['value'])
        return LinearFunctional(values)

    def cocycle_to_json(self, psi: Cocycle) -> Dict[str, Any]:
        if isinstance(psi, Canonical):
            return {'kind': 'canonical'}
        if isinstance(psi, Coboundary):
            return {'kind': 'coboundary', 'f': self.functional_to_json(psi.f)}
        if isinstance(psi, Table):
            entries = [{'a': self.index_to_json(a), 'b': self.index_to_json(b), 'value': self.scalar_to_json(v)}
                       for (a, b), v in psi.entries.items() if v]
            return {'kind': 'table', 'window': self.window_to_json(psi.window), 'entries': entries}
        return {'kind': 'combo', 'terms': [[self.scalar_to_json(c), self.cocycle_to_json(inner)]
                                           for c, inner in psi.terms]}

    @document_reader('cocycle')
    def cocycle_from_json(self, value: Dict[str, Any]) -> Cocycle:
        kind = value.get('kind') if isinstance(value, dict) else None
        if kind == 'canonical':
            return Canonical()
        if kind == 'coboundary':
            return Coboundary(self.functional_from_json(value.get('f', [])))
        if kind == 'table':
            entries = {}
            for entry in value.get('entries', []):
                a, b = self.index_from_json(entry['a']), self.index_from_json(entry['b'])
                if a == b:
                    raise InputError(f"Table entry pairs {a} with itself; antisymmetry forces zero")
                if (b, a) in entries:
                    raise InputError(f"Table lists both ({a}, {b}) and its reverse")
                entries[(a, b)] = self.scalar_from_json(entry['value'])
            window = self.window_from_json(value['window']) if 'window' in value else self._spanning_window(entries)
            return Table(entries, window)
        if kind == 'combo':
            terms = []
            for term in value.get('terms', []):
                if not isinstance(term, list) or len(term) != 2:
                    raise InputError(f"Combo terms are [scalar, cocycle] pairs, got {term!r}")
                terms.append((self.scalar_from_json(term[0]), self.cocycle_from_json(term[1])))
            return LinearCombo(terms)
        raise InputError(f"Cocycle kind must be canonical, coboundary, table or combo, got {kind!r}")

    def _spanning_window(self, entries) -> Window:
        indices = [index for pair in entries for index in pair]
        if not indices:
            return Window(1, 0)
        return Window(max(1, max(i.degree.height for i in indices)), max(i.level for i in indices))

    def normalization_to_json(self, result: NormalizationResult) -> Dict[str, Any]:
        return {
            'c': self.scalar_to_json(result.c),
            'f': self.functional_to_json(result.f),
            'f_window': self.window_to_json(result.closure),
            'f_extension': 'zero outside f_window',
            'residual_max_window': (self.window_to_json(result.residual_max_window)
                                    if result.residual_max_window else None),
            'failures': [[self.index_to_json(a), self.index_to_json(b)] for a, b in result.failures],
            'residual': self.residual_to_json(result.residual),
            'success': result.success,
        }

    def fit_to_json(self, result: FitResult) -> Dict[str, Any]:
        certificate = []
        for row in result.certificate:
            a, b = row['pair']
            certificate.append({
                'pair': [self.index_to_json(a), self.index_to_json(b)],
                'equation': [{'index': self.index_to_json(index), 'coeff': self.scalar_to_json(v)}
                             for index, v in row['equation'].items()],
                'rhs': self.scalar_to_json(row['rhs']),
                'text': f"{self._linear_text(row['equation'])} = {self.scalar_to_json(row['rhs'])}",
            })
        return {
            'feasible': result.feasible,
            'f': self.functional_to_json(result.f) if result.f is not None else None,
            'certificate': certificate,
            'equations': result.equations,
            'rank': result.rank,
        }

    def _linear_text(self, equation: Dict[BasisIndex, Scalar]) -> str:
        return ' '.join(self._functional_terms(Element(equation))) or '0'

    def _functional_terms(self, element: Element) -> List[str]:
        parts = []
        for index, value in self.lie.sorted_terms(element):
            negative = self.scalars.is_negative(value)
            magnitude = -value if negative else value
            body = f"f({self.expressions.format_index(index)})"
            if magnitude != self.scalars.one:
                body = f"{self.expressions.format_scalar_factor(magnitude)}*{body}"
            sign = ('-' if negative else '') if not parts else ('- ' if negative else '+ ')
            parts.append(f"{sign}{body}")
        return parts

    # -- structure --------------------------------------------------------------------------

    def step_to_json(self, step: ReductionStep) -> Dict[str, Any]:
        return {
            'operation': step.operation,
            'operand': self.expressions.format_element(step.operand),
            'result': self.expressions.format_element(step.result),
            'modulo_level': step.modulo_level,
            'detail': self.plain(step.detail),
        }

    def ideal_report_to_json(self, report: IdealReport) -> Dict[str, Any]:
        return {
            'generator': self.expressions.format_element(report.generator),
            'minimal_level': report.minimal_level,
            'classified_as': report.classified_as,
            'basis_element': self.expressions.format_index(report.basis_element),
            'reduction_level': report.reduction_level,
            'witness_chain': [self.step_to_json(step) for step in report.witness_chain],
            'memberships': self.residual_to_json(report.memberships) if report.memberships else None,
            'closure': self.residual_to_json(report.closure) if report.closure else None,
            'certified': report.certified,
        }

    def probe_to_json(self, result: ProbeResult) -> Dict[str, Any]:
        return {
            'dimensions': result.dimensions,
            'strictly_increasing': result.strictly_increasing,
            'highest_terms': [self.plain(entry) for entry in result.highest_terms],
            'powers': [self.expressions.format_element(x) for x in result.powers],
        }

    # -- generic ----------------------------------------------------------------------------

    def residual_to_json(self, summary: ResidualSummary) -> Dict[str, Any]:
        return {
            'checked': summary.checked,
            'nonzero': summary.nonzero,
            'zero': summary.is_zero,
            'samples': [self.plain(entry) for entry in summary.samples],
            'worst': self.plain(summary.worst),
        }

    def plain(self, value: Any) -> Any:
        """Recursively turn domain values into JSON-ready data"""
        if value is None or isinstance(value, (bool, int, str, float)):
            return value
        if isinstance(value, FracElement):
            return self.scalar_to_json(value)
        if isinstance(value, Element):
            return self.expressions.format_element(value)
        if isinstance(value, CompletionElement):
            return self.completion_to_json(value)
        if isinstance(value, BasisIndex):
            return self.expressions.format_index(value)
        if isinstance(value, GroupElement):
            return self.lattice.format_degree(value)
        if isinstance(value, Window):
            return self.window_to_json(value)
        if isinstance(value, ResidualSummary):
            return self.residual_to_json(value)
        if isinstance(value, dict):
            return {str(self.plain(k)): self.plain(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [self.plain(v) for v in value]
        logger.debug("Serializing by str", type=type(value).__name__)
        return str(value)
