# src/services/gamma_service.py
"""
Exact ground layer: the scalar field Q(g1, ..., gr), the lattice model Γ = Z^r with a
compatible total order, and the scale maps c with cΓ = Γ.
"""
import itertools
import re
from dataclasses import dataclass
from tokenize import TokenError
from typing import Dict, Iterator, Sequence, Tuple, Union

import sympy
from sympy import QQ
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.fields import FracElement, FracField

from shared.config import GammaConfig
from shared.exceptions import DivisionByZero, InputError, InvalidScaleMap, MissingUnit
from shared.utils import Logger

logger = Logger.setup_logger(__name__)

Scalar = FracElement
ScalarLike = Union[FracElement, int, sympy.Rational, str]

LESS, EQUAL, GREATER = 'less', 'equal', 'greater'

MINUS_SIGN = '−'
SCALAR_TOKEN_RE = re.compile(r'[A-Za-z_][A-Za-z0-9_]*|\d+|\S')
SCALAR_OPERATORS = frozenset('+-*/^()')
# parse_expr evaluates its input; scalar text only ever reaches it through this namespace
SCALAR_GLOBALS = {'__builtins__': {}, 'Integer': sympy.Integer, 'Rational': sympy.Rational,
                  'Symbol': sympy.Symbol, 'Float': sympy.Float}


class ScalarField:
    """Canonical rational functions with rational coefficients in the generator symbols"""

    OPS = ('add', 'sub', 'mul', 'div', 'int_pow')

    def __init__(self, names: Sequence[str]):
        self.names = tuple(names)
        self.symbols = tuple(sympy.Symbol(name) for name in self.names)
        self.field = FracField(self.symbols, QQ)
        self.gens = self.field.gens
        self.zero = self.field.zero
        self.one = self.field.one
        self._locals = dict(zip(self.names, self.symbols))

    def __call__(self, value: ScalarLike) -> Scalar:
        if isinstance(value, FracElement) and value.field == self.field:
            return value
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, bool):
            raise InputError(f"Not a scalar: {value!r}")
        return self.field(value)

    def parse(self, text: str) -> Scalar:
        """Parse a rational or a rational function written over the generator names"""
        text = text.replace(MINUS_SIGN, '-')
        for token in SCALAR_TOKEN_RE.findall(text):
            if token[0].isalpha() or token[0] == '_':
                if token not in self._locals:
                    raise InputError(f"Scalar {text!r} uses unknown symbol {token!r}")
            elif not token.isdigit() and token not in SCALAR_OPERATORS:
                raise InputError(f"Scalar {text!r} contains {token!r}")
        if not text.strip():
            raise InputError("Empty scalar")
        try:
            expr = parse_expr(text, local_dict=dict(self._locals), global_dict=dict(SCALAR_GLOBALS),
                              transformations=standard_transformations + (convert_xor,))
        except (SyntaxError, TypeError, ValueError, TokenError, sympy.SympifyError) as e:
            raise InputError(f"Not a scalar: {text!r} ({e})")
        try:
            return self.field.from_expr(expr)
        except (ValueError, ZeroDivisionError, sympy.polys.polyerrors.BasePolynomialError) as e:
            raise InputError(f"Not a rational function: {text!r} ({e})")

    def arith(self, a: Scalar, b: Union[Scalar, int], op: str) -> Scalar:
        """scalar_arith: exact add, sub, mul, div and integer power"""
        try:
            if op == 'add':
                return a + b
            if op == 'sub':
                return a - b
            if op == 'mul':
                return a * b
            if op == 'div':
                if not b:
                    raise DivisionByZero("division by the zero scalar")
                return a / b
            if op == 'int_pow':
                if not isinstance(b, int):
                    raise InputError(f"int_pow needs an integer exponent, got {b!r}")
                if b < 0 and not a:
                    raise DivisionByZero("negative power of the zero scalar")
                return a ** b
        except ZeroDivisionError as e:
            raise DivisionByZero(str(e))
        raise InputError(f"Unknown scalar operation {op!r}; expected one of {self.OPS}")

    def div(self, a: Scalar, b: Union[Scalar, int]) -> Scalar:
        return self.arith(a, self(b), 'div')

    @staticmethod
    def is_rational(value: Scalar) -> bool:
        return value.numer.is_ground and value.denom.is_ground

    def is_negative(self, value: Scalar) -> bool:
        """True for negative rationals only"""
        return self.is_rational(value) and value.as_expr() < 0

    def format(self, value: Scalar) -> str:
        """Canonical text; reparses to the same scalar"""
        return sympy.sstr(value.as_expr(), order='lex')

    def specialize(self, value: Scalar, mapping: Dict[str, sympy.Rational]) -> Scalar:
        """Ring homomorphism to the rationals; applied to outputs only"""
        substitutions = {self._locals[name]: v for name, v in mapping.items()}
        try:
            return self.field.from_expr(sympy.nsimplify(value.as_expr().subs(substitutions), rational=True))
        except ZeroDivisionError as e:
            raise DivisionByZero(str(e))


@dataclass(frozen=True, order=True)
class GroupElement:
    """A degree α ∈ Γ as integer coordinates over the generators"""
    coefficients: Tuple[int, ...]

    @classmethod
    def zero(cls, rank: int) -> 'GroupElement':
        return cls((0,) * rank)

    @classmethod
    def unit_vector(cls, rank: int, k: int) -> 'GroupElement':
        return cls(tuple(1 if j == k else 0 for j in range(rank)))

    def __add__(self, other: 'GroupElement') -> 'GroupElement':
        return GroupElement(tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: 'GroupElement') -> 'GroupElement':
        return GroupElement(tuple(a - b for a, b in zip(self.coefficients, other.coefficients)))

    def __neg__(self) -> 'GroupElement':
        return GroupElement(tuple(-a for a in self.coefficients))

    def __mul__(self, n: int) -> 'GroupElement':
        return GroupElement(tuple(n * a for a in self.coefficients))

    __rmul__ = __mul__

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    @property
    def is_zero(self) -> bool:
        return not any(self.coefficients)

    @property
    def height(self) -> int:
        """Largest absolute coordinate"""
        return max((abs(a) for a in self.coefficients), default=0)

    def __str__(self) -> str:
        return '(' + ','.join(str(a) for a in self.coefficients) + ')'


@dataclass(frozen=True)
class ScaleMap:
    """c ∈ Γ^{C*} realized as a scalar together with a unimodular lattice matrix"""
    value: Scalar
    matrix: Tuple[Tuple[int, ...], ...]


class GammaLattice:
    """Γ = Z^r with generator symbols, optional specialization and a signed lexicographic order"""

    def __init__(self, config: GammaConfig):
        self.config = config
        self.rank = config.rank
        self.scalars = ScalarField(config.generator_names)
        self._specialization = (
            {name: sympy.Rational(value) for name, value in config.specialization}
            if config.specialization else None
        )
        if self._specialization:
            self._generator_values = tuple(
                self.scalars(self._specialization[name]) for name in config.generator_names
            )
        else:
            self._generator_values = tuple(self.scalars.gens)
        self._priority = tuple(p - 1 for p in config.order_priority)
        self._signs = tuple(config.order_signs)
        self._embed_cache: Dict[GroupElement, Scalar] = {}

    # -- elements ---------------------------------------------------------------------------

    def element(self, coords: Union[int, Sequence[int], GroupElement]) -> GroupElement:
        if isinstance(coords, GroupElement):
            return coords
        if isinstance(coords, int):
            coords = (coords,)
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.rank:
            raise InputError(f"Degree {coords} has {len(coords)} coordinates; Γ has rank {self.rank}")
        return GroupElement(coords)

    @property
    def zero(self) -> GroupElement:
        return GroupElement.zero(self.rank)

    def generator(self, k: int) -> GroupElement:
        return GroupElement.unit_vector(self.rank, k)

    @property
    def unit(self) -> GroupElement:
        """The designated 1 ∈ Γ"""
        if self.config.unit is None:
            raise MissingUnit("This computation needs a designated unit: add \"unit\" to the Γ document")
        return GroupElement(self.config.unit)

    @property
    def is_specialized(self) -> bool:
        return self._specialization is not None

    def degrees(self, bound: int) -> Iterator[GroupElement]:
        """Every degree with all coordinates in [-bound, bound], ascending in the group order"""
        window = [GroupElement(c) for c in itertools.product(range(-bound, bound + 1), repeat=self.rank)]
        return iter(sorted(window, key=self.sort_key))

    # -- embed and order --------------------------------------------------------------------

    def embed(self, alpha: GroupElement) -> Scalar:
        """The number Σ n_k g_k (specialized when configured) used in structure constants"""
        cached = self._embed_cache.get(alpha)
        if cached is None:
            cached = self.scalars.zero
            for n, value in zip(alpha.coefficients, self._generator_values):
                if n:
                    cached = cached + n * value
            self._embed_cache[alpha] = cached
        return cached

    def embed_symbolic(self, alpha: GroupElement) -> Scalar:
        """The linear form Σ n_k g_k, never specialized"""
        value = self.scalars.zero
        for n, gen in zip(alpha.coefficients, self.scalars.gens):
            value = value + n * gen
        return value

    def sort_key(self, alpha: GroupElement) -> Tuple[int, ...]:
        return tuple(self._signs[i] * alpha.coefficients[p] for i, p in enumerate(self._priority))

    def compare(self, alpha: GroupElement, beta: GroupElement) -> str:
        """Signed lexicographic comparison; translation invariant"""
        a, b = self.sort_key(alpha), self.sort_key(beta)
        if a < b:
            return LESS
        if a > b:
            return GREATER
        return EQUAL

    def specialize(self, value: Scalar) -> Scalar:
        """Apply the configured specialization to an output scalar"""
        if not self._specialization:
            return value
        return self.scalars.specialize(value, self._specialization)

    # -- scale maps -------------------------------------------------------------------------

    def scale_map(self, value: ScalarLike, matrix: Sequence[Sequence[int]]) -> ScaleMap:
        """Build a validated scale map: unimodular and consistent with embed"""
        c = self.scalars(value)
        rows = tuple(tuple(int(entry) for entry in row) for row in matrix)
        if len(rows) != self.rank or any(len(row) != self.rank for row in rows):
            raise InvalidScaleMap(f"Scale matrix must be {self.rank}x{self.rank}, got {rows}")
        if not c:
            raise InvalidScaleMap("Scale value must be nonzero")
        det = sympy.Matrix(rows).det()
        if det not in (1, -1):
            raise InvalidScaleMap(f"Scale matrix is not unimodular (det = {det})")
        for k in range(self.rank):
            column = GroupElement(tuple(rows[j][k] for j in range(self.rank)))
            if c * self.embed(self.generator(k)) != self.embed(column):
                raise InvalidScaleMap(
                    f"Scale map inconsistent on generator {self.config.generator_names[k]}: "
                    f"c·embed(g) = {self.scalars.format(c * self.embed(self.generator(k)))} "
                    f"but embed(M e_k) = {self.scalars.format(self.embed(column))}"
                )
        return ScaleMap(c, rows)

    def scale_identity(self) -> ScaleMap:
        return ScaleMap(self.scalars.one, tuple(
            tuple(1 if i == j else 0 for j in range(self.rank)) for i in range(self.rank)
        ))

    def scale_apply(self, m: ScaleMap, alpha: GroupElement) -> GroupElement:
        """M·α; embed of the result equals c·embed(α)"""
        return GroupElement(tuple(
            sum(m.matrix[i][j] * alpha.coefficients[j] for j in range(self.rank))
            for i in range(self.rank)
        ))

    def scale_compose(self, m1: ScaleMap, m2: ScaleMap) -> ScaleMap:
        product = sympy.Matrix(m1.matrix) * sympy.Matrix(m2.matrix)
        return ScaleMap(m1.value * m2.value, self._int_rows(product))

    def scale_invert(self, m: ScaleMap) -> ScaleMap:
        inverse = sympy.Matrix(m.matrix).inv()
        return ScaleMap(self.scalars.div(self.scalars.one, m.value), self._int_rows(inverse))

    def _int_rows(self, matrix: sympy.Matrix) -> Tuple[Tuple[int, ...], ...]:
        rows = []
        for i in range(matrix.rows):
            row = []
            for j in range(matrix.cols):
                entry = matrix[i, j]
                if not entry.is_integer:
                    raise InvalidScaleMap(f"Scale matrix entry {entry} is not integral")
                row.append(int(entry))
            rows.append(tuple(row))
        return tuple(rows)

    def format_degree(self, alpha: GroupElement) -> str:
        """Integer shorthand for rank 1, an integer combination of generator names otherwise"""
        if self.rank == 1:
            return str(alpha.coefficients[0])
        parts = []
        for n, name in zip(alpha.coefficients, self.config.generator_names):
            if not n:
                continue
            magnitude = '' if abs(n) == 1 else str(abs(n))
            sign = '-' if n < 0 else ('+' if parts else '')
            parts.append(f"{sign}{magnitude}{name}")
        return ''.join(parts) if parts else '0'
