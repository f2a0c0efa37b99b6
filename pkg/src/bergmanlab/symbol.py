"""A small expression language for symbols on the closure of a domain.

Grammar (precedence from loosest to tightest)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' integer)?
    atom  := number | 'i' | 'pi' | var | func '(' expr (',' expr)* ')' | '(' expr ')'

so ``-z1^2`` is ``-(z1^2)``.  Variables are ``z1`` .. ``z9``; functions are
``re``, ``im``, ``abs``, ``conj``, ``exp`` and ``bump(c_1, ..., c_m, radius)``
with a constant center (one component is broadcast to every coordinate).
Subtrees without variables are folded to constants while parsing.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .domain import DomainSpec, boundary_grid
from .errors import (BadArity, BadExponent, DivisionByNearZero, InvalidParameter,
                     SymbolSyntaxError, UnknownIdentifier)

DIV_TOL = 1e-14
UNARY_FUNCS = ("re", "im", "abs", "conj", "exp")


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Unary:
    op: str  # conj, re, im, abs, exp, neg
    arg: object


@dataclass(frozen=True)
class Binary:
    op: str  # add, sub, mul, div
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Bump:
    center: tuple
    radius: float


SymbolExpr = Const | Var | Unary | Binary | Pow | Bump


# ---------------------------------------------------------------------------
# tokens

@dataclass(frozen=True)
class Token:
    kind: str  # number, identifier, operator, paren, comma, end
    lexeme: str
    offset: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<identifier>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<operator>[-+*/^])
  | (?P<paren>[()])
  | (?P<comma>,)
""", re.VERBOSE)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SymbolSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, lexeme):
        if self.tok.lexeme != lexeme:
            found = self.tok.lexeme or "end of input"
            raise SymbolSyntaxError(f"expected {lexeme!r}, found {found!r}", self.tok.offset)
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise SymbolSyntaxError(f"unexpected {self.tok.lexeme!r}", self.tok.offset)
        return node

    def expr(self):
        node = self.term()
        while self.tok.lexeme in ("+", "-"):
            op = "add" if self.advance().lexeme == "+" else "sub"
            node = _fold(Binary(op, node, self.term()))
        return node

    def term(self):
        node = self.unary()
        while self.tok.lexeme in ("*", "/"):
            op = "mul" if self.advance().lexeme == "*" else "div"
            node = _fold(Binary(op, node, self.unary()))
        return node

    def unary(self):
        if self.tok.lexeme == "-":
            self.advance()
            return _fold(Unary("neg", self.unary()))
        return self.power()

    def power(self):
        node = self.atom()
        if self.tok.lexeme == "^":
            self.advance()
            t = self.tok
            if t.kind != "number":
                if t.lexeme == "-":
                    raise BadExponent("exponent must be a nonnegative integer", t.offset)
                if t.kind in ("identifier", "paren") and t.lexeme != ")":
                    raise BadExponent("exponent must be an integer literal", t.offset)
                raise SymbolSyntaxError("expected an integer exponent", t.offset)
            if not t.lexeme.isdigit():
                raise BadExponent(f"exponent {t.lexeme!r} is not an integer", t.offset)
            self.advance()
            node = _fold(Pow(node, int(t.lexeme)))
        return node

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Const(complex(float(t.lexeme)))
        if t.lexeme == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if t.kind != "identifier":
            found = t.lexeme or "end of input"
            raise SymbolSyntaxError(f"unexpected {found!r}", t.offset)
        name = t.lexeme
        if name == "i":
            self.advance()
            return Const(1j)
        if name == "pi":
            self.advance()
            return Const(complex(math.pi))
        m = re.fullmatch(r"z([1-9])", name)
        if m:
            self.advance()
            return Var(int(m.group(1)))
        if name in UNARY_FUNCS or name == "bump":
            self.advance()
            open_tok = self.expect("(")
            args = [self.expr()]
            while self.tok.kind == "comma":
                self.advance()
                args.append(self.expr())
            self.expect(")")
            return self.call(name, args, open_tok.offset)
        raise UnknownIdentifier(f"unknown identifier {name!r}", t.offset)

    def call(self, name, args, offset):
        if name in UNARY_FUNCS:
            if len(args) != 1:
                raise BadArity(f"{name} takes 1 argument, got {len(args)}", offset)
            return _fold(Unary(name, args[0]))
        if len(args) < 2:
            raise BadArity(f"bump takes a center and a radius, got {len(args)} argument(s)", offset)
        if not all(isinstance(a, Const) for a in args):
            raise BadArity("bump arguments must be constants", offset)
        radius = args[-1].value
        if radius.imag != 0 or not radius.real > 0:
            raise BadArity(f"bump radius must be a positive real, got {radius}", offset)
        return Bump(tuple(a.value for a in args[:-1]), radius.real)


def parse(text: str):
    """Parse ``text`` into an AST; errors carry the character offset."""
    if not text or not text.strip():
        raise SymbolSyntaxError("empty symbol", 0)
    return _Parser(text).parse()


_CONST_OPS = {
    "neg": lambda a: -a,
    "conj": lambda a: a.conjugate(),
    "re": lambda a: complex(a.real),
    "im": lambda a: complex(a.imag),
    "abs": lambda a: complex(abs(a)),
    "exp": lambda a: complex(np.exp(a)),
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
}


def _fold(node):
    if isinstance(node, Unary) and isinstance(node.arg, Const):
        return Const(_CONST_OPS[node.op](node.arg.value))
    if isinstance(node, Binary) and isinstance(node.left, Const) and isinstance(node.right, Const):
        a, b = node.left.value, node.right.value
        if node.op == "div":
            if abs(b) < DIV_TOL:
                return node
            return Const(a / b)
        return Const(_CONST_OPS[node.op](a, b))
    if isinstance(node, Pow) and isinstance(node.base, Const):
        return Const(node.base.value ** node.exponent)
    return node


# ---------------------------------------------------------------------------
# printing

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2}
_SYM = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def _num(x: float) -> str:
    """Shortest round-tripping text; integral values without a decimal point."""
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def _const_text(c: complex) -> str:
    if c.imag == 0 and c.real >= 0 and not math.copysign(1, c.real) < 0:
        return _num(c.real)
    if c.imag == 0:
        return f"(-{_num(-c.real)})"
    return f"({_num(c.real)} + {_num(c.imag)}*i)"


def _fmt(node) -> tuple[str, int]:
    if isinstance(node, Const):
        return _const_text(node.value), 5
    if isinstance(node, Var):
        return f"z{node.index}", 5
    if isinstance(node, Bump):
        args = ", ".join(_const_text(c) for c in node.center)
        return f"bump({args}, {_num(node.radius)})", 5
    if isinstance(node, Pow):
        s, p = _fmt(node.base)
        return (s if p >= 5 else f"({s})") + f"^{node.exponent}", 4
    if isinstance(node, Unary):
        s, p = _fmt(node.arg)
        if node.op == "neg":
            return "-" + (s if p >= 3 else f"({s})"), 3
        return f"{node.op}({s})", 5
    p = _PREC[node.op]
    ls, lp = _fmt(node.left)
    rs, rp = _fmt(node.right)
    ls = ls if lp >= p else f"({ls})"
    rs = rs if rp > p else f"({rs})"
    return f"{ls} {_SYM[node.op]} {rs}", p


def pretty(node) -> str:
    """Source text that parses back to a structurally equal AST."""
    return _fmt(node)[0]


# ---------------------------------------------------------------------------
# evaluation

def max_var(node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Unary):
        return max_var(node.arg)
    if isinstance(node, Binary):
        return max(max_var(node.left), max_var(node.right))
    if isinstance(node, Pow):
        return max_var(node.base)
    return 0


def bump_profile(t):
    """``exp(1 - 1/(1 - t^2))`` for ``t < 1`` and 0 otherwise."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = t < 1
    ti = t[inside]
    out[inside] = np.exp(1 - 1 / (1 - ti * ti))
    return out


def _eval(node, Z: np.ndarray) -> np.ndarray:
    if isinstance(node, Const):
        return np.full(len(Z), node.value, dtype=complex)
    if isinstance(node, Var):
        return Z[:, node.index - 1]
    if isinstance(node, Bump):
        c = np.asarray(node.center, dtype=complex)
        if len(c) == 1:
            c = np.full(Z.shape[1], c[0])
        elif len(c) != Z.shape[1]:
            raise InvalidParameter(f"bump center has {len(c)} components, points live in C^{Z.shape[1]}")
        t = np.linalg.norm(Z - c[None, :], axis=1) / node.radius
        return bump_profile(t).astype(complex)
    if isinstance(node, Pow):
        return _eval(node.base, Z) ** node.exponent
    if isinstance(node, Unary):
        a = _eval(node.arg, Z)
        if node.op == "neg":
            return -a
        if node.op == "conj":
            return np.conj(a)
        if node.op == "re":
            return a.real.astype(complex)
        if node.op == "im":
            return a.imag.astype(complex)
        if node.op == "abs":
            return np.abs(a).astype(complex)
        return np.exp(a)
    a = _eval(node.left, Z)
    b = _eval(node.right, Z)
    if node.op == "add":
        return a + b
    if node.op == "sub":
        return a - b
    if node.op == "mul":
        return a * b
    if np.any(np.abs(b) < DIV_TOL):
        raise DivisionByNearZero("denominator vanishes at an evaluation point")
    return a / b


def evaluate(expr, z):
    """Evaluate a symbol.

    ``z`` is a scalar (a point of C^1), a 1-d array (one point of C^n) or an
    ``(M, n)`` array of points.  Returns a complex for one point, else an array.
    """
    expr = as_symbol(expr)
    arr = np.asarray(z, dtype=complex)
    if arr.ndim > 2:
        raise InvalidParameter(f"points must have shape (M, n), got {arr.shape}")
    Z = arr.reshape(1, -1) if arr.ndim < 2 else arr
    vals = eval_points(expr, Z)
    return complex(vals[0]) if arr.ndim < 2 else vals


def eval_points(expr, Z: np.ndarray) -> np.ndarray:
    """Evaluate a symbol (AST or callable) on an ``(M, n)`` array of points."""
    if callable(expr):
        return np.asarray(expr(Z), dtype=complex).reshape(len(Z))
    if Z.shape[1] < max_var(expr):
        raise InvalidParameter(f"symbol uses z{max_var(expr)} but points live in C^{Z.shape[1]}")
    return _eval(expr, Z)


class RadialBump:
    """``bump_profile(| |z| - center | / halfwidth)``, a bump in the modulus ``|z|``.

    Supported on the spherical shell ``center - halfwidth < |z| < center + halfwidth``.
    The grammar has no square root, so this profile is offered as a callable.
    """

    degree = None

    def __init__(self, center: float, halfwidth: float):
        if not halfwidth > 0:
            raise InvalidParameter("bump half-width must be positive")
        self.center = float(center)
        self.halfwidth = float(halfwidth)
        self.text = f"radial_bump({self.center!r}, {self.halfwidth!r})"

    def __call__(self, Z: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(np.asarray(Z), axis=1)
        return bump_profile(np.abs(r - self.center) / self.halfwidth).astype(complex)

    def __repr__(self):
        return self.text


def as_symbol(phi):
    """Accept source text, an AST, or a callable on ``(M, n)`` point arrays."""
    if isinstance(phi, str):
        return parse(phi)
    return phi


def symbol_text(phi) -> str:
    if isinstance(phi, str):
        return phi
    if callable(phi):
        return getattr(phi, "text", None) or getattr(phi, "__name__", "<callable>")
    return pretty(phi)


# ---------------------------------------------------------------------------
# structure queries

def polynomial_degree(node):
    """Total degree in ``(z, zbar)`` if the symbol is a polynomial, else ``None``."""
    if callable(node):
        return getattr(node, "degree", None)
    if isinstance(node, Const):
        return 0
    if isinstance(node, Var):
        return 1
    if isinstance(node, Bump):
        return None
    if isinstance(node, Pow):
        base = node.base
        if isinstance(base, Unary) and base.op == "abs":
            inner = polynomial_degree(base.arg)
            if inner is None or node.exponent % 2:
                return None
            return inner * node.exponent
        d = polynomial_degree(base)
        return None if d is None else d * node.exponent
    if isinstance(node, Unary):
        if node.op in ("neg", "conj", "re", "im"):
            return polynomial_degree(node.arg)
        d = polynomial_degree(node.arg)
        return 0 if d == 0 else None
    dl, dr = polynomial_degree(node.left), polynomial_degree(node.right)
    if dl is None or dr is None:
        return None
    if node.op in ("add", "sub"):
        return max(dl, dr)
    if node.op == "mul":
        return dl + dr
    return dl if dr == 0 else None


def is_holomorphic_polynomial(node) -> bool:
    """True for polynomials in ``z`` alone (no conj/re/im/abs/exp/bump/division)."""
    if isinstance(node, (Const, Var)):
        return True
    if isinstance(node, Pow):
        return is_holomorphic_polynomial(node.base)
    if isinstance(node, Unary):
        return node.op == "neg" and is_holomorphic_polynomial(node.arg)
    if isinstance(node, Binary):
        if node.op == "div":
            return isinstance(node.right, Const) and is_holomorphic_polynomial(node.left)
        return is_holomorphic_polynomial(node.left) and is_holomorphic_polynomial(node.right)
    return False


def product(*factors):
    """AST of the product of several symbols."""
    node = as_symbol(factors[0])
    for f in factors[1:]:
        node = _fold(Binary("mul", node, as_symbol(f)))
    return node


def conj_monomial(K) -> object:
    """AST for ``conj(z1)^K1 ... conj(zn)^Kn``."""
    return _monomial(K, conj=True)


def monomial(L) -> object:
    """AST for ``z1^L1 ... zn^Ln``."""
    return _monomial(L, conj=False)


def _monomial(K, conj):
    node = Const(1 + 0j)
    for j, k in enumerate(K, start=1):
        if k:
            base = Unary("conj", Var(j)) if conj else Var(j)
            node = _fold(Binary("mul", node, base if k == 1 else Pow(base, int(k))))
    return node


def boundary_sup(expr, domain: DomainSpec, m: int = 64) -> float:
    """Largest ``|phi|`` over :func:`boundary_grid` samples of the domain."""
    expr = as_symbol(expr)
    pts = boundary_grid(domain, m)
    return float(np.max(np.abs(eval_points(expr, pts))))
