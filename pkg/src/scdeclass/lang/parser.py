"""Recursive-descent parser for the C-like concrete syntax (``.sc`` files).

Compound assignments (``+=``, ``-=``, ``*=``, ``^=``, ``++``, ``--``), unary
``!`` and unary ``-`` are desugared here, so the AST only has the core forms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    ArrayAssign,
    Assign,
    BinOp,
    Command,
    Expr,
    If,
    Index,
    Lit,
    Program,
    Skip,
    Ternary,
    Var,
    While,
    is_atom,
    seq,
)

KEYWORDS = {"if", "else", "while", "skip", "xor", "mod", "and", "or"}
RESERVED_MARK = "__"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\+\+|--|\+=|-=|\*=|\^=|==|!=|<=|>=|&&|\|\||[-+*%^&|<>=!?:;(){}\[\]])
    """,
    re.VERBOSE,
)

# binding power of binary operators; larger binds tighter
_BINARY = {
    "||": 1, "or": 1,
    "&&": 2, "and": 2,
    "|": 3,
    "^": 4, "xor": 4,
    "&": 5,
    "==": 6, "!=": 6,
    "<": 7, "<=": 7, ">": 7, ">=": 7,
    "+": 8, "-": 8,
    "*": 9, "%": 9, "mod": 9,
}
_CANONICAL = {"or": "||", "and": "&&", "xor": "^", "mod": "%"}
_COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "^=": "^"}


class ParseError(SyntaxError):
    """Syntax error carrying a 1-based line and column."""

    def __init__(self, msg: str, line: int, col: int, filename: str | None = None):
        where = f"{filename}:" if filename else ""
        super().__init__(f"{where}{line}:{col}: {msg}")
        self.msg_text = msg
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str, filename: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, filename)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("num", "ident", "op"):
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, filename: str | None, allow_reserved: bool):
        self.toks = tokenize(text, filename)
        self.i = 0
        self.filename = filename
        self.allow_reserved = allow_reserved

    # -- token helpers ---------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col, self.filename)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self) -> str:
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise self.error(f"expected identifier, found {tok.text or 'end of input'!r}")
        if RESERVED_MARK in tok.text and not self.allow_reserved:
            raise self.error(f"identifier {tok.text!r} uses the reserved '__' marker")
        self.i += 1
        return tok.text

    # -- commands --------------------------------------------------------

    def program(self) -> Command:
        stmts = []
        while self.tok.kind != "eof":
            stmts.append(self.statement())
        return seq(*stmts)

    def block(self) -> Command:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(self.statement())
        self.expect("}")
        return seq(*stmts)

    def body(self) -> Command:
        return self.block() if self.at("{") else self.statement()

    def statement(self) -> Command:
        tok = self.tok
        if self.at("{"):
            return self.block()
        if self.accept(";") or self.accept("skip"):
            if tok.text == "skip":
                self.expect(";")
            return Skip()
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.body()
            orelse: Command = Skip()
            if self.accept("else"):
                orelse = self.body()
            return If(cond, then, orelse)
        if self.accept("while"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return While(cond, self.body())
        if tok.kind == "ident":
            return self.assignment()
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")

    def assignment(self) -> Command:
        name = self.ident()
        if self.accept("["):
            idx_tok = self.tok
            index = self.expr()
            if not isinstance(index, (Var, Lit)):
                raise self.error("array assignment index must be a variable or literal", idx_tok)
            self.expect("]")
            target: Expr = Index(name, index)
        else:
            index = None
            target = Var(name)

        op_tok = self.tok
        if self.accept("="):
            rhs = self.expr()
        elif op_tok.text in _COMPOUND and self.accept(op_tok.text):
            rhs = BinOp(_COMPOUND[op_tok.text], target, self.expr())
        elif self.accept("++"):
            rhs = BinOp("+", target, Lit(1))
        elif self.accept("--"):
            rhs = BinOp("-", target, Lit(1))
        else:
            raise self.error(f"expected assignment operator, found {op_tok.text or 'end of input'!r}")
        self.expect(";")
        if index is None:
            return Assign(name, rhs)
        return ArrayAssign(name, index, rhs)

    # -- expressions -----------------------------------------------------

    def expr(self) -> Expr:
        start = self.tok
        cond = self.binary(1)
        if not self.at("?"):
            return cond
        if not is_atom(cond):
            raise self.error("ternary condition must be a variable, literal or array element", start)
        self.expect("?")
        then = self.ternary_operand()
        self.expect(":")
        orelse = self.ternary_operand()
        return Ternary(cond, then, orelse)

    def ternary_operand(self) -> Expr:
        start = self.tok
        e = self.unary()
        if not is_atom(e):
            raise self.error("ternary operands must be variables, literals or array elements", start)
        return e

    def binary(self, min_prec: int) -> Expr:
        left = self.unary()
        while self.tok.kind in ("op", "ident") and _BINARY.get(self.tok.text, 0) >= min_prec:
            op = self.tok.text
            prec = _BINARY[op]
            self.i += 1
            right = self.binary(prec + 1)
            left = BinOp(_CANONICAL.get(op, op), left, right)
        return left

    def unary(self) -> Expr:
        if self.accept("!"):
            return BinOp("==", self.unary(), Lit(0))
        if self.accept("-"):
            operand = self.unary()
            if isinstance(operand, Lit):
                return Lit(-operand.value)
            return BinOp("-", Lit(0), operand)
        return self.primary()

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Lit(int(tok.text))
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            name = self.ident()
            if self.accept("["):
                index = self.expr()
                self.expect("]")
                return Index(name, index)
            return Var(name)
        raise self.error(f"expected expression, found {tok.text or 'end of input'!r}")


def parse_program(text: str, name: str | None = None, *, allow_reserved: bool = False) -> Program:
    """Parse source text into a :class:`Program`.

    Identifiers containing ``__`` are reserved for generated code and are
    rejected unless ``allow_reserved`` is set.
    """
    p = _Parser(text, name, allow_reserved)
    return Program(p.program(), name=name)


def parse_expr(text: str, *, allow_reserved: bool = False) -> Expr:
    p = _Parser(text, None, allow_reserved)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after expression")
    return e
