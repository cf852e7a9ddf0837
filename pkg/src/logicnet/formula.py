"""Propositional formulas with a possibility marker.

Concrete syntax (ASCII, Unicode aliases in brackets)::

    var      := [a-zA-Z_][a-zA-Z0-9_]*
    not      := '!' [¬]        prefix, binds tightest
    possibly := '<>' [◊]       prefix, binds tightest
    and      := '&' [∧]        left-associative
    or       := '|' [∨]        left-associative
    implies  := '->' [→]       right-associative, binds loosest

Evaluation treats ``Possibly`` as transparent. Its modal reading lives in
:func:`compatible`, which is a satisfiability query.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, Mapping, Optional, Tuple, Union

import numpy as np

MAX_VARIABLES = 20


class FormulaError(ValueError):
    pass


class TooManyVariables(FormulaError):
    pass


class MissingVariable(FormulaError, KeyError):
    pass


class ParseError(FormulaError):
    """Syntax error at a UTF-8 byte offset of the input."""

    def __init__(self, message: str, offset: int, expected: Tuple[str, ...]):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        detail = f"{message} at byte {offset}"
        if self.expected:
            detail += f"; expected one of: {', '.join(self.expected)}"
        super().__init__(detail)


# --------------------------------------------------------------------------
# AST

class _Node:
    """Structural equality and hashing, with the hash and variable set cached per node."""

    _fields: Tuple[str, ...] = ()

    def _key(self):
        return tuple(getattr(self, name) for name in self._fields)

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = self.__dict__["_hash"] = hash((type(self).__name__,) + self._key())
            return h

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not type(self):
            return NotImplemented
        return hash(self) == hash(other) and self._key() == other._key()

    def __str__(self):
        return to_string(self)

    @property
    def free_variables(self) -> frozenset:
        try:
            return self.__dict__["_vars"]
        except KeyError:
            pass
        out = frozenset()
        for name in self._fields:
            out |= getattr(self, name).free_variables
        self.__dict__["_vars"] = out
        return out


@dataclass(frozen=True, eq=False)
class Var(_Node):
    name: str
    _fields = ("name",)

    def __post_init__(self):
        if not _is_identifier(self.name):
            raise FormulaError(f"invalid variable name {self.name!r}")
        self.__dict__["_vars"] = frozenset((self.name,))


@dataclass(frozen=True, eq=False)
class Not(_Node):
    operand: "Formula"
    _fields = ("operand",)


@dataclass(frozen=True, eq=False)
class Possibly(_Node):
    operand: "Formula"
    _fields = ("operand",)


@dataclass(frozen=True, eq=False)
class And(_Node):
    left: "Formula"
    right: "Formula"
    _fields = ("left", "right")


@dataclass(frozen=True, eq=False)
class Or(_Node):
    left: "Formula"
    right: "Formula"
    _fields = ("left", "right")


@dataclass(frozen=True, eq=False)
class Implies(_Node):
    left: "Formula"
    right: "Formula"
    _fields = ("left", "right")


Formula = Union[Var, Not, Possibly, And, Or, Implies]
Assignment = Mapping[str, int]

UNARY = (Not, Possibly)
BINARY = (And, Or, Implies)


def _is_identifier(name: str) -> bool:
    if not isinstance(name, str) or not name:
        return False
    if not (name[0].isascii() and (name[0].isalpha() or name[0] == "_")):
        return False
    return all(c.isascii() and (c.isalnum() or c == "_") for c in name)


def children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, UNARY):
        return (f.operand,)
    if isinstance(f, BINARY):
        return (f.left, f.right)
    return ()


def variables(f: Formula) -> Tuple[str, ...]:
    """Free variables, sorted by name."""
    return tuple(sorted(f.free_variables))


def depth(f: Formula) -> int:
    """Height of the tree; a bare variable has depth 0."""
    kids = children(f)
    return 0 if not kids else 1 + max(depth(k) for k in kids)


def size(f: Formula) -> int:
    return 1 + sum(size(k) for k in children(f))


def strip_possibly(f: Formula) -> Formula:
    """Remove every ``Possibly`` node, keeping its operand."""
    if isinstance(f, Var):
        return f
    if isinstance(f, Possibly):
        return strip_possibly(f.operand)
    if isinstance(f, Not):
        return Not(strip_possibly(f.operand))
    return type(f)(strip_possibly(f.left), strip_possibly(f.right))


# --------------------------------------------------------------------------
# Lexer / parser

class _Tok(Enum):
    VAR = "variable"
    NOT = "'!'"
    POSS = "'<>'"
    AND = "'&'"
    OR = "'|'"
    IMPL = "'->'"
    LPAREN = "'('"
    RPAREN = "')'"
    EOF = "end of input"


_SYMBOLS = [
    ("->", _Tok.IMPL), ("<>", _Tok.POSS),
    ("!", _Tok.NOT), ("¬", _Tok.NOT), ("◊", _Tok.POSS), ("◇", _Tok.POSS),
    ("&", _Tok.AND), ("∧", _Tok.AND), ("|", _Tok.OR), ("∨", _Tok.OR),
    ("→", _Tok.IMPL), ("(", _Tok.LPAREN), (")", _Tok.RPAREN),
]

_ATOM_START = (_Tok.VAR, _Tok.NOT, _Tok.POSS, _Tok.LPAREN)


def _tokenize(text: str):
    tokens = []
    i = 0
    byte = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            byte += len(c.encode())
            continue
        if c.isascii() and (c.isalpha() or c == "_"):
            j = i + 1
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append((_Tok.VAR, text[i:j], byte))
            byte += j - i
            i = j
            continue
        for sym, kind in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append((kind, sym, byte))
                i += len(sym)
                byte += len(sym.encode())
                break
        else:
            raise ParseError(f"unexpected character {c!r}", byte,
                             tuple(k.value for k in _ATOM_START))
    tokens.append((_Tok.EOF, "", byte))
    return tokens


class _Parser:
    # implies := or ('->' implies)?
    # or      := and ('|' and)*
    # and     := unary ('&' unary)*
    # unary   := ('!' | '<>') unary | atom
    # atom    := VAR | '(' implies ')'

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected):
        kind, lexeme, offset = self.peek()
        what = "end of input" if kind is _Tok.EOF else f"token {lexeme!r}"
        raise ParseError(f"unexpected {what}", offset, tuple(k.value for k in expected))

    def parse(self) -> Formula:
        f = self.implies()
        if self.peek()[0] is not _Tok.EOF:
            self.fail((_Tok.AND, _Tok.OR, _Tok.IMPL, _Tok.EOF))
        return f

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.peek()[0] is _Tok.IMPL:
            self.advance()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek()[0] is _Tok.OR:
            self.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek()[0] is _Tok.AND:
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind = self.peek()[0]
        if kind is _Tok.NOT:
            self.advance()
            return Not(self.unary())
        if kind is _Tok.POSS:
            self.advance()
            return Possibly(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        kind, lexeme, _ = self.peek()
        if kind is _Tok.VAR:
            self.advance()
            return Var(lexeme)
        if kind is _Tok.LPAREN:
            self.advance()
            inner = self.implies()
            if self.peek()[0] is not _Tok.RPAREN:
                self.fail((_Tok.RPAREN, _Tok.AND, _Tok.OR, _Tok.IMPL))
            self.advance()
            return inner
        self.fail(_ATOM_START)


def parse(text: str) -> Formula:
    """Parse a formula string into an AST.

    >>> parse("p -> q")
    Implies(left=Var(name='p'), right=Var(name='q'))
    """
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# Printing

_PREC = {Implies: 1, Or: 2, And: 3}


def _prec(f: Formula) -> int:
    return _PREC.get(type(f), 4)


def to_string(f: Formula, unicode: bool = False) -> str:
    """Render with the minimum parentheses needed to re-parse to ``f``."""
    ops = ({Not: "¬", Possibly: "◊", And: " ∧ ", Or: " ∨ ", Implies: " → "} if unicode
           else {Not: "!", Possibly: "<>", And: " & ", Or: " | ", Implies: " -> "})

    def go(node: Formula) -> str:
        if isinstance(node, Var):
            return node.name
        if isinstance(node, UNARY):
            inner = go(node.operand)
            if _prec(node.operand) < 4:
                inner = f"({inner})"
            return ops[type(node)] + inner
        p = _prec(node)
        left, right = go(node.left), go(node.right)
        if isinstance(node, Implies):
            # right-associative
            if _prec(node.left) <= p:
                left = f"({left})"
            if _prec(node.right) < p:
                right = f"({right})"
        else:
            if _prec(node.left) < p:
                left = f"({left})"
            if _prec(node.right) <= p:
                right = f"({right})"
        return left + ops[type(node)] + right

    return go(f)


# --------------------------------------------------------------------------
# Semantics

def evaluate(f: Formula, assignment: Assignment) -> int:
    """Classical truth value of ``f`` (0 or 1); ``Possibly`` is transparent."""
    if isinstance(f, Var):
        try:
            value = assignment[f.name]
        except KeyError:
            raise MissingVariable(f"no value for variable {f.name!r}") from None
        return 1 if value else 0
    if isinstance(f, (Not,)):
        return 1 - evaluate(f.operand, assignment)
    if isinstance(f, Possibly):
        return evaluate(f.operand, assignment)
    if isinstance(f, And):
        return evaluate(f.left, assignment) & evaluate(f.right, assignment)
    if isinstance(f, Or):
        return evaluate(f.left, assignment) | evaluate(f.right, assignment)
    if isinstance(f, Implies):
        return (1 - evaluate(f.left, assignment)) | evaluate(f.right, assignment)
    raise TypeError(f"not a formula: {f!r}")


def assignment_bits(n: int) -> np.ndarray:
    """All ``2**n`` assignments as a uint8 array, MSB-first counting from all ones down.

    Row 0 is ``(1, ..., 1)`` and the last row is ``(0, ..., 0)``.
    """
    idx = np.arange(2 ** n - 1, -1, -1, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def _evaluate_columns(f: Formula, columns: Dict[str, np.ndarray]) -> np.ndarray:
    if isinstance(f, Var):
        return columns[f.name]
    if isinstance(f, Not):
        return ~_evaluate_columns(f.operand, columns)
    if isinstance(f, Possibly):
        return _evaluate_columns(f.operand, columns)
    a = _evaluate_columns(f.left, columns)
    b = _evaluate_columns(f.right, columns)
    if isinstance(f, And):
        return a & b
    if isinstance(f, Or):
        return a | b
    return ~a | b


def truth_mask(f: Formula, names: Tuple[str, ...]) -> int:
    """Truth table of ``f`` packed into an int: bit ``k`` is the value on row ``k``.

    Rows follow :func:`assignment_bits`. Results are cached per node, which
    makes sweeps over families that share subformulas cheap.
    """
    cache = f.__dict__.setdefault("_masks", {})
    try:
        return cache[names]
    except KeyError:
        pass
    n = len(names)
    full = (1 << (1 << n)) - 1
    kind = type(f)
    if kind is Var:
        # row k has variable j set iff bit (n-1-j) of (2**n - 1 - k) is set
        shift = n - 1 - names.index(f.name)
        top = (1 << n) - 1
        mask = 0
        for k in range(1 << n):
            if ((top - k) >> shift) & 1:
                mask |= 1 << k
    elif kind is Not:
        mask = full ^ truth_mask(f.operand, names)
    elif kind is Possibly:
        mask = truth_mask(f.operand, names)
    elif kind is And:
        mask = truth_mask(f.left, names) & truth_mask(f.right, names)
    elif kind is Or:
        mask = truth_mask(f.left, names) | truth_mask(f.right, names)
    elif kind is Implies:
        mask = (full ^ truth_mask(f.left, names)) | truth_mask(f.right, names)
    else:
        raise TypeError(f"not a formula: {f!r}")
    cache[names] = mask
    return mask


@dataclass(frozen=True)
class TruthTable:
    """Exhaustive table. ``inputs[k]`` holds the bits of row ``k`` in ``variables`` order."""

    variables: Tuple[str, ...]
    inputs: np.ndarray
    outputs: np.ndarray

    def __len__(self) -> int:
        return len(self.outputs)

    def rows(self) -> Iterator[Tuple[Tuple[int, ...], int]]:
        for bits, out in zip(self.inputs, self.outputs):
            yield tuple(int(b) for b in bits), int(out)

    def assignments(self) -> Iterator[Dict[str, int]]:
        for bits in self.inputs:
            yield dict(zip(self.variables, (int(b) for b in bits)))

    def __eq__(self, other):
        if not isinstance(other, TruthTable):
            return NotImplemented
        return (self.variables == other.variables
                and np.array_equal(self.inputs, other.inputs)
                and np.array_equal(self.outputs, other.outputs))

    def __hash__(self):
        return hash((self.variables, self.outputs.tobytes()))


def truth_table(f: Formula, variables_: Optional[Tuple[str, ...]] = None) -> TruthTable:
    """Enumerate every assignment of ``f``'s variables.

    ``variables_`` may widen or reorder the columns; it must cover the
    formula's free variables.
    """
    names = variables(f) if variables_ is None else tuple(variables_)
    missing = set(variables(f)) - set(names)
    if missing:
        raise MissingVariable(f"table columns do not cover {sorted(missing)}")
    if len(names) > MAX_VARIABLES:
        raise TooManyVariables(f"{len(names)} variables exceeds the limit of {MAX_VARIABLES}")
    bits = assignment_bits(len(names))
    columns = {name: bits[:, k].astype(bool) for k, name in enumerate(names)}
    if names:
        out = _evaluate_columns(f, columns)
    else:
        out = np.array([bool(evaluate(f, {}))])
    bits.setflags(write=False)
    out = out.astype(np.uint8)
    out.setflags(write=False)
    return TruthTable(names, bits, out)


def satisfiable(f: Formula) -> Tuple[bool, Optional[Dict[str, int]]]:
    """Brute-force SAT. Returns ``(True, witness)`` or ``(False, None)``."""
    table = truth_table(f)
    hits = np.flatnonzero(table.outputs)
    if len(hits) == 0:
        return False, None
    row = table.inputs[hits[0]]
    return True, dict(zip(table.variables, (int(b) for b in row)))


class Verdict(str, Enum):
    COMPATIBLE = "compatible"
    INCOMPATIBLE = "incompatible"


def compatible(claim: Formula, possibility: Formula) -> Verdict:
    """Is ``claim`` consistent with the possibility ``◊g``?

    Incompatible exactly when ``claim ∧ g`` has no model. Nested ``◊`` in
    either argument is flattened.
    """
    if not isinstance(possibility, Possibly):
        raise FormulaError("possibility must be rooted in '<>'")
    query = And(strip_possibly(claim), strip_possibly(possibility))
    ok, _ = satisfiable(query)
    return Verdict.COMPATIBLE if ok else Verdict.INCOMPATIBLE


def enumerate_formulas(names, max_height: int, connectives=(Not, And, Or, Implies)) -> Iterator[Formula]:
    """Yield every formula over ``names`` whose height is at most ``max_height``.

    Height counts connectives on the longest root-to-leaf path, so a bare
    variable has height 0. Formulas come out grouped by height.
    """
    exact = [Var(n) for n in names]
    upto = list(exact)
    yield from exact
    for _ in range(max_height):
        lower = upto[:len(upto) - len(exact)]
        level = []
        for op in connectives:
            if op in UNARY:
                level.extend(op(f) for f in exact)
                continue
            # at least one side from the previous height
            for a in exact:
                for b in upto:
                    level.append(op(a, b))
            for a in lower:
                for b in exact:
                    level.append(op(a, b))
        yield from level
        exact = level
        upto = upto + level


def count_formulas(n_names: int, max_height: int, n_unary: int = 1, n_binary: int = 3) -> int:
    total = n_names
    for _ in range(max_height):
        total = n_names + n_unary * total + n_binary * total * total
    return total


def random_formula(rng: np.random.Generator, names, max_depth: int,
                   connectives=(Not, And, Or, Implies), leaf_prob: float = 0.25) -> Formula:
    if max_depth == 0 or rng.random() < leaf_prob:
        return Var(names[int(rng.integers(len(names)))])
    op = connectives[int(rng.integers(len(connectives)))]
    if op in UNARY:
        return op(random_formula(rng, names, max_depth - 1, connectives, leaf_prob))
    return op(random_formula(rng, names, max_depth - 1, connectives, leaf_prob),
              random_formula(rng, names, max_depth - 1, connectives, leaf_prob))
