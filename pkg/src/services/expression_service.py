# src/services/expression_service.py
"""
Element expression language.

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := (scalar '*')? atom
    atom   := 'L' '(' group ',' nat ')' | 'C' | '[' expr ',' expr ']' | '(' expr ')'
    scalar := nat ('/' nat)? | generator (('^'|'**') nat)? | '(' rational function ')'
    group  := ['-'] gterm (('+'|'-') gterm)*,  gterm := nat | nat? '*'? generator

A plain integer group is the shorthand for multiples of the only generator when the rank is 1.
"""
import re
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple, Union

from shared.exceptions import CentralTermPresent, ExpressionSyntaxError, InputError, UnknownGenerator
from shared.utils import Logger

from .gamma_service import MINUS_SIGN, GammaLattice, GroupElement, Scalar
from .lie_service import BasisIndex, BracketRule, Element, LieService, WGAMMA

logger = Logger.setup_logger(__name__)


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


TOKEN_SPEC = [
    ('NUMBER', r'\d+'),
    ('NAME', r'[A-Za-z_][A-Za-z0-9_]*'),
    ('POW', r'\*\*'),
    ('OP', r'[-+*/^()\[\],]'),
    ('NEWLINE', r'\n'),
    ('SKIP', r'[ \t\r]+'),
    ('MISMATCH', r'.'),
]
TOKEN_RE = re.compile('|'.join(f'(?P<{name}>{pattern})' for name, pattern in TOKEN_SPEC))


def tokenize(source: str) -> List[Token]:
    """Tokens with 1-based positions; the trailing EOF sits one column past the last character"""
    source = source.replace(MINUS_SIGN, '-')
    tokens = []
    line, line_start = 1, 0
    for match in TOKEN_RE.finditer(source):
        kind, text = match.lastgroup, match.group()
        column = match.start() - line_start + 1
        if kind == 'NEWLINE':
            line, line_start = line + 1, match.end()
            continue
        if kind == 'SKIP':
            continue
        if kind == 'MISMATCH':
            raise ExpressionSyntaxError(f"Unexpected character {text!r}", line, column)
        if kind == 'POW':
            kind = 'OP'
        tokens.append(Token(kind, text, line, column))
    tokens.append(Token('EOF', '', line, len(source) - line_start + 1))
    return tokens


# -- AST --------------------------------------------------------------------------------------

@dataclass(frozen=True)
class Basis:
    degree: GroupElement
    level: int


@dataclass(frozen=True)
class Central:
    pass


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Bracket:
    left: 'Sum'
    right: 'Sum'


@dataclass(frozen=True)
class Paren:
    inner: 'Sum'


Atom = Union[Basis, Central, Zero, Bracket, Paren]


@dataclass(frozen=True)
class Term:
    scalar: Optional[Scalar]
    atom: Atom


@dataclass(frozen=True)
class Sum:
    """Signed terms; sign is +1 or -1"""
    terms: Tuple[Tuple[int, Term], ...]


class _Parser:

    def __init__(self, source: str, lattice: GammaLattice):
        self.source = source
        self.lattice = lattice
        self.scalars = lattice.scalars
        self.generators = {name: k for k, name in enumerate(lattice.config.generator_names)}
        self.tokens = tokenize(source)
        self.pos = 0

    # -- token stream -----------------------------------------------------------------------

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.current
        if token.kind != 'EOF':
            self.pos += 1
        return token

    def at(self, text: str) -> bool:
        return self.current.kind == 'OP' and self.current.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"Expected {text!r}")
        return self.advance()

    def fail(self, message: str, token: Optional[Token] = None):
        token = token or self.current
        found = 'end of input' if token.kind == 'EOF' else repr(token.text)
        raise ExpressionSyntaxError(f"{message}, found {found}", token.line, token.column)

    # -- grammar ----------------------------------------------------------------------------

    def parse(self) -> Sum:
        expr = self.expr()
        if self.current.kind != 'EOF':
            self.fail("Unexpected trailing input")
        return expr

    def parse_degree(self) -> GroupElement:
        if self.at('('):
            self.advance()
            coords = [self._signed_int()]
            while self.accept(','):
                coords.append(self._signed_int())
            self.expect(')')
            degree = self.lattice.element(coords)
        else:
            degree = self.group()
        if self.current.kind != 'EOF':
            self.fail("Unexpected trailing input")
        return degree

    def _signed_int(self) -> int:
        sign = -1 if self.accept('-') else 1
        return sign * self.nat()

    def expr(self) -> Sum:
        terms = []
        sign = 1
        if self.accept('-'):
            sign = -1
        else:
            self.accept('+')
        terms.append((sign, self.term()))
        while self.at('+') or self.at('-'):
            sign = 1 if self.advance().text == '+' else -1
            terms.append((sign, self.term()))
        return Sum(tuple(terms))

    def term(self) -> Term:
        scalar = None
        if self._scalar_ahead():
            scalar = self.scalar()
            self.expect('*')
        return Term(scalar, self.atom())

    def _scalar_ahead(self) -> bool:
        token = self.current
        if token.kind == 'NUMBER':
            return not (token.text == '0' and self.peek().text not in ('*', '/'))
        if token.kind == 'NAME':
            return token.text in self.generators
        if self.at('('):
            return self._matching(self.pos).kind == 'OP' and self._matching(self.pos).text == '*'
        return False

    def _matching(self, start: int) -> Token:
        """Token after the parenthesis group opened at start"""
        depth = 0
        for index in range(start, len(self.tokens)):
            token = self.tokens[index]
            if token.kind == 'OP' and token.text in '([':
                depth += 1
            elif token.kind == 'OP' and token.text in ')]':
                depth -= 1
                if depth == 0:
                    return self.tokens[min(index + 1, len(self.tokens) - 1)]
        return self.tokens[-1]

    def scalar(self) -> Scalar:
        token = self.current
        if token.kind == 'NUMBER':
            value = self.scalars(int(self.advance().text))
            if self.accept('/'):
                denominator = self.nat()
                if not denominator:
                    self.fail("Zero denominator", token)
                value = value / denominator
            return value
        if token.kind == 'NAME':
            value = self.scalars.gens[self.generators[self.advance().text]]
            if self.accept('^') or self.accept('**'):
                value = value ** self.nat()
            return value
        open_token = self.expect('(')
        start = self.pos
        depth = 1
        while depth:
            if self.current.kind == 'EOF':
                self.fail("Unbalanced parenthesis in scalar")
            if self.at('('):
                depth += 1
            elif self.at(')'):
                depth -= 1
                if not depth:
                    break
            elif self.current.kind == 'NAME' and self.current.text not in self.generators:
                raise UnknownGenerator(
                    f"Unknown generator {self.current.text!r} at line {self.current.line}, "
                    f"column {self.current.column}"
                )
            self.advance()
        text = ' '.join(t.text for t in self.tokens[start:self.pos])
        self.expect(')')
        if not text:
            self.fail("Empty scalar", open_token)
        try:
            return self.scalars.parse(text)
        except InputError as e:
            raise ExpressionSyntaxError(str(e), open_token.line, open_token.column)

    def nat(self) -> int:
        if self.current.kind != 'NUMBER':
            self.fail("Expected a natural number")
        return int(self.advance().text)

    def atom(self) -> Atom:
        token = self.current
        if token.kind == 'NAME' and token.text == 'L' and self.peek().text == '(':
            self.advance()
            self.expect('(')
            degree = self.group()
            self.expect(',')
            level = self.nat()
            self.expect(')')
            return Basis(degree, level)
        if token.kind == 'NAME' and token.text == 'C':
            self.advance()
            return Central()
        if token.kind == 'NUMBER' and token.text == '0':
            self.advance()
            return Zero()
        if self.accept('['):
            left = self.expr()
            self.expect(',')
            right = self.expr()
            self.expect(']')
            return Bracket(left, right)
        if self.accept('('):
            inner = self.expr()
            self.expect(')')
            return Paren(inner)
        self.fail("Expected L(...), C, a bracket or a parenthesized expression")

    def group(self) -> GroupElement:
        rank = self.lattice.rank
        coords = [0] * rank
        sign = -1 if self.accept('-') else 1
        while True:
            token = self.current
            count = None
            if token.kind == 'NUMBER':
                count = int(self.advance().text)
                self.accept('*')
            if self.current.kind == 'NAME':
                name_token = self.advance()
                if name_token.text not in self.generators:
                    raise UnknownGenerator(
                        f"Unknown generator {name_token.text!r} at line {name_token.line}, column {name_token.column}"
                    )
                coords[self.generators[name_token.text]] += sign * (1 if count is None else count)
            elif count is not None:
                if rank != 1 and count:
                    self.fail("A plain integer degree needs rank 1; write it over the generators", token)
                coords[0] += sign * count
            else:
                self.fail("Expected a degree")
            if self.at('+') or self.at('-'):
                sign = 1 if self.advance().text == '+' else -1
                continue
            return GroupElement(tuple(coords))


class ExpressionService:
    """Parse, print and evaluate element expressions"""

    def __init__(self, lie: LieService):
        self.lie = lie
        self.lattice: GammaLattice = lie.lattice
        self.scalars = lie.scalars

    def parse(self, source: str) -> Sum:
        return _Parser(source, self.lattice).parse()

    def parse_degree(self, source: str) -> GroupElement:
        """A group expression such as 2g1-3g2, a plain integer for rank 1, or a tuple (2,-3)"""
        return _Parser(source, self.lattice).parse_degree()

    def evaluate(self, ast: Union[Sum, Atom, Term], rule: BracketRule = WGAMMA) -> Element:
        if isinstance(ast, Sum):
            total = Element()
            for sign, term in ast.terms:
                value = self.evaluate(term, rule)
                total = total + value if sign > 0 else total - value
            return total
        if isinstance(ast, Term):
            value = self.evaluate(ast.atom, rule)
            return value if ast.scalar is None else value.scale(ast.scalar)
        if isinstance(ast, Basis):
            return self.lie.basis_element(BasisIndex(ast.degree, ast.level))
        if isinstance(ast, Zero):
            return Element()
        if isinstance(ast, Central):
            if not rule.allows_central:
                raise CentralTermPresent(f"C is not part of the {rule} algebra")
            return self.lie.C()
        if isinstance(ast, Bracket):
            return self.lie.bracket(self.evaluate(ast.left, rule), self.evaluate(ast.right, rule), rule)
        if isinstance(ast, Paren):
            return self.evaluate(ast.inner, rule)
        raise InputError(f"Not an expression node: {ast!r}")

    def eval_text(self, source: str, rule: BracketRule = WGAMMA) -> Element:
        return self.evaluate(self.parse(source), rule)

    # -- printing ---------------------------------------------------------------------------

    def format_scalar_factor(self, value: Scalar) -> str:
        """A scalar as it may stand before '*'"""
        if self.scalars.is_rational(value) and not self.scalars.is_negative(value):
            return self.scalars.format(value)
        return f"({self.scalars.format(value)})"

    def format_index(self, index: BasisIndex) -> str:
        if index.is_central:
            return 'C'
        return f"L({self.lattice.format_degree(index.degree)},{index.level})"

    def format_element(self, x: Element) -> str:
        """Canonical text: terms in degree then level order, C last, reduced coefficients"""
        parts = []
        for index, value in self.lie.sorted_terms(x):
            negative = self.scalars.is_negative(value)
            magnitude = -value if negative else value
            body = self.format_index(index)
            if magnitude != self.scalars.one:
                body = f"{self.format_scalar_factor(magnitude)}*{body}"
            if not parts:
                parts.append(f"-{body}" if negative else body)
            else:
                parts.append(f"- {body}" if negative else f"+ {body}")
        return ' '.join(parts) if parts else '0'

    def format_ast(self, ast: Union[Sum, Term, Atom]) -> str:
        if isinstance(ast, Sum):
            parts = []
            for sign, term in ast.terms:
                body = self.format_ast(term)
                if not parts:
                    parts.append(f"-{body}" if sign < 0 else body)
                else:
                    parts.append(f"{'-' if sign < 0 else '+'} {body}")
            return ' '.join(parts)
        if isinstance(ast, Term):
            body = self.format_ast(ast.atom)
            return body if ast.scalar is None else f"{self.format_scalar_factor(ast.scalar)}*{body}"
        if isinstance(ast, Basis):
            return f"L({self.lattice.format_degree(ast.degree)},{ast.level})"
        if isinstance(ast, Central):
            return 'C'
        if isinstance(ast, Zero):
            return '0'
        if isinstance(ast, Bracket):
            return f"[{self.format_ast(ast.left)}, {self.format_ast(ast.right)}]"
        if isinstance(ast, Paren):
            return f"({self.format_ast(ast.inner)})"
        raise InputError(f"Not an expression node: {ast!r}")
