"""The object-classification mini-language and thresholding.

Each segmented object carries three equal-length pixel lists R, G, B.  A
classification expression reduces them to one scalar per object (for
example ``mean(R)-mean(G)`` or ``mean(R)/mean(G)``); the scalars are then
thresholded, manually or by Otsu's method, into state 1 (above) and
state 2 (at or below).

The grammar:

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := NUMBER | FUNC '(' VAR ')' | '(' expr ')' | '-' factor
    FUNC   := mean | median | min | max | sum | std | count
    VAR    := R | G | B

Whitespace is ignored; names are case-sensitive.  Expressions are a closed
language (not host-language code) so evaluation is sandboxed and
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ._otsu import N_BINS, best_single_cut, histogram_bins
from .core import RegionTable

__all__ = [
    "Num", "Call", "Neg", "BinOp", "ClassifierExpr",
    "ParseError", "EvalError",
    "parse_expr", "expr_to_text", "eval_expr",
    "otsu_threshold_1d", "classify_regions", "apply_classification",
    "ClassificationResult",
]

REDUCTIONS = ("mean", "median", "min", "max", "sum", "std", "count")
VARIABLES = ("R", "G", "B")


class ParseError(ValueError):
    """Syntax error with the 0-based offset of the offending character."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Call:
    func: str
    var: str


@dataclass(frozen=True)
class Neg:
    operand: "ClassifierExpr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "ClassifierExpr"
    right: "ClassifierExpr"


ClassifierExpr = Union[Num, Call, Neg, BinOp]


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOK_NUMBER = "number"
_TOK_IDENT = "ident"
_TOK_OP = "op"
_TOK_LPAREN = "("
_TOK_RPAREN = ")"
_TOK_EOF = "eof"


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "+-*/":
            tokens.append((_TOK_OP, c, i))
            i += 1
        elif c == "(":
            tokens.append((_TOK_LPAREN, c, i))
            i += 1
        elif c == ")":
            tokens.append((_TOK_RPAREN, c, i))
            i += 1
        elif c.isdigit() or c == ".":
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == ".":
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            if text[start:i] == ".":
                raise ParseError("expected a number", start)
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            tokens.append((_TOK_NUMBER, text[start:i], start))
        elif c.isalpha() or c == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append((_TOK_IDENT, text[start:i], start))
        else:
            raise ParseError(f"unexpected character {c!r}", i)
    tokens.append((_TOK_EOF, "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError(f"expected {what}", tok[2])
        return tok

    def parse(self) -> ClassifierExpr:
        kind, _, pos = self.peek()
        if kind == _TOK_EOF:
            raise ParseError("empty expression", pos)
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != _TOK_EOF:
            raise ParseError(f"unexpected {value!r}", pos)
        return node

    def expr(self) -> ClassifierExpr:
        node = self.term()
        while self.peek()[0] == _TOK_OP and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> ClassifierExpr:
        node = self.factor()
        while self.peek()[0] == _TOK_OP and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> ClassifierExpr:
        kind, value, pos = self.advance()
        if kind == _TOK_NUMBER:
            return Num(float(value))
        if kind == _TOK_OP and value == "-":
            return Neg(self.factor())
        if kind == _TOK_LPAREN:
            node = self.expr()
            self.expect(_TOK_RPAREN, "')'")
            return node
        if kind == _TOK_IDENT:
            if value in VARIABLES:
                raise ParseError(
                    f"variable {value} must appear inside a reduction, "
                    f"e.g. mean({value})", pos)
            if value not in REDUCTIONS:
                raise ParseError(f"unknown function {value!r}", pos)
            self.expect(_TOK_LPAREN, "'('")
            vkind, vname, vpos = self.advance()
            if vkind != _TOK_IDENT or vname not in VARIABLES:
                raise ParseError("expected a channel variable R, G or B", vpos)
            self.expect(_TOK_RPAREN, "')'")
            return Call(value, vname)
        raise ParseError(f"unexpected {value!r}" if value else "unexpected end of input",
                         pos)


def parse_expr(text: str) -> ClassifierExpr:
    """Parse a classification expression into its abstract syntax tree."""
    return _Parser(text).parse()


def _prec(node: ClassifierExpr) -> int:
    if isinstance(node, BinOp):
        return 1 if node.op in "+-" else 2
    if isinstance(node, Neg):
        return 3
    return 4


def expr_to_text(node: ClassifierExpr) -> str:
    """Render an AST back to text; parse_expr(expr_to_text(ast)) == ast."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Call):
        return f"{node.func}({node.var})"
    if isinstance(node, Neg):
        inner = expr_to_text(node.operand)
        if _prec(node.operand) < _prec(node):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        left = expr_to_text(node.left)
        right = expr_to_text(node.right)
        if _prec(node.left) < _prec(node):
            left = f"({left})"
        # parsing is left-associative, so equal precedence on the right
        # needs parentheses to round-trip
        if _prec(node.right) <= _prec(node):
            right = f"({right})"
        return f"{left}{node.op}{right}"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# evaluation

def _reduce(func: str, values: np.ndarray) -> float:
    if func == "mean":
        return float(values.mean())
    if func == "median":
        return float(np.median(values))
    if func == "min":
        return float(values.min())
    if func == "max":
        return float(values.max())
    if func == "sum":
        return float(values.sum())
    if func == "std":
        # sample standard deviation; a single pixel has no spread
        return 0.0 if values.size == 1 else float(values.std(ddof=1))
    if func == "count":
        return float(values.size)
    raise EvalError(f"unknown reduction {func!r}")


def _divide(num: float, den: float) -> float:
    if den == 0.0:
        if num == 0.0:
            return math.nan
        return math.inf if num > 0 else -math.inf
    return num / den


def eval_expr(ast: ClassifierExpr, R: Sequence[float], G: Sequence[float],
              B: Sequence[float]) -> float:
    """Evaluate the expression over one object's three pixel lists.

    Division by zero yields an infinite (or NaN for 0/0) sentinel rather
    than raising, so one degenerate object cannot abort a batch.
    """
    channels = {}
    for name, values in zip(VARIABLES, (R, G, B)):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise EvalError(f"channel {name} must be a non-empty 1-D list")
        channels[name] = arr
    if not (channels["R"].size == channels["G"].size == channels["B"].size):
        raise EvalError("channel lists must have equal length")

    def ev(node: ClassifierExpr) -> float:
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Call):
            return _reduce(node.func, channels[node.var])
        if isinstance(node, Neg):
            return -ev(node.operand)
        if isinstance(node, BinOp):
            a, b = ev(node.left), ev(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            return _divide(a, b)
        raise TypeError(f"not an expression node: {node!r}")

    return ev(ast)


# ---------------------------------------------------------------------------
# thresholding

def otsu_threshold_1d(values: Sequence[float]) -> float:
    """Single-level Otsu threshold of a list of scalars.

    Builds a 256-bin histogram spanning [min, max] and returns the bin edge
    maximizing the between-class variance; ties go to the smaller edge.
    """
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size < 2:
        raise ValueError("need at least 2 values to threshold")
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        raise ValueError("all values identical; no separation exists")
    counts = histogram_bins(arr, lo, hi)
    k = best_single_cut(counts)
    return lo + (k + 1) * (hi - lo) / N_BINS


@dataclass(frozen=True)
class ClassificationResult:
    """Per-object scalar values and states plus the f-value histogram."""

    f_values: dict[int, float]
    states: dict[int, int]
    threshold_used: float
    threshold_mode: str  # "manual" or "otsu"
    hist_counts: np.ndarray
    hist_edges: np.ndarray
    nonfinite_labels: tuple[int, ...] = ()

    def state_counts(self) -> dict[int, int]:
        counts = {1: 0, 2: 0}
        for state in self.states.values():
            counts[state] += 1
        return counts


def classify_regions(rt: RegionTable, expr: Union[ClassifierExpr, str],
                     threshold: Union[float, str], *, display_scale: bool = False,
                     n_hist_bins: int = 50) -> ClassificationResult:
    """Evaluate the classification function per object and threshold it.

    ``threshold="auto"`` picks the Otsu threshold of the f values.  State 1
    means strictly above the threshold, state 2 at or below.  With
    ``display_scale`` the pixel lists are evaluated on the 0-255 scale (and
    the threshold is interpreted on that scale too).
    """
    ast = parse_expr(expr) if isinstance(expr, str) else expr
    scale = 255.0 if display_scale else 1.0

    f_values: dict[int, float] = {}
    for r in rt:
        if r.pixels_r is None or r.pixels_g is None or r.pixels_b is None:
            raise EvalError(f"region {r.label} has no pixel lists; "
                            "classification needs extract_regions output")
        f_values[r.label] = eval_expr(ast, r.pixels_r * scale, r.pixels_g * scale,
                                      r.pixels_b * scale)

    values = np.array(list(f_values.values()), dtype=np.float64)
    finite = values[np.isfinite(values)]
    nonfinite = tuple(lbl for lbl, f in f_values.items() if not math.isfinite(f))

    if threshold == "auto":
        if finite.size < 2 or np.unique(finite).size < 2:
            raise ValueError("auto threshold needs at least 2 distinct finite f values")
        t = otsu_threshold_1d(finite)
        mode = "otsu"
    elif isinstance(threshold, str):
        raise ValueError(f'threshold must be a number or "auto", got {threshold!r}')
    else:
        t = float(threshold)
        mode = "manual"

    states = {lbl: (1 if f > t else 2) for lbl, f in f_values.items()}
    if finite.size:
        hist_counts, hist_edges = np.histogram(finite, bins=n_hist_bins)
    else:
        hist_counts, hist_edges = np.zeros(n_hist_bins, dtype=np.int64), \
            np.linspace(0.0, 1.0, n_hist_bins + 1)
    return ClassificationResult(
        f_values=f_values, states=states, threshold_used=t, threshold_mode=mode,
        hist_counts=hist_counts, hist_edges=hist_edges, nonfinite_labels=nonfinite)


def apply_classification(rt: RegionTable, result: ClassificationResult) -> None:
    """Copy f values and states from a classification result onto the table."""
    for r in rt:
        if r.label in result.f_values:
            r.f_value = result.f_values[r.label]
            r.state = result.states[r.label]
