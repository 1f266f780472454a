"""Recursive-descent parser producing the restricted script AST.

The grammar admits assignments, expression statements, and for-loops over
integer ranges; expressions cover arithmetic, whitelisted math calls, the
five CAD constructors, chained method calls, and list/tuple/string
literals.  Anything else is rejected with a diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ScriptParseError
from .tokens import RESERVED, Token, tokenize

CONSTRUCTORS = {"Loop", "Face", "Sketch", "Extrude", "CADModel"}
MATH_NAMES = {"sin", "cos", "tan", "sqrt", "radians"}
MATH_CONSTANTS = {"pi"}


@dataclass(frozen=True)
class Num:
    value: object  # int or float


@dataclass(frozen=True)
class Str:
    value: str


@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class Name:
    ident: str
    line: int = 0


@dataclass(frozen=True)
class UnaryOp:
    op: str
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class ListLit:
    items: tuple


@dataclass(frozen=True)
class TupleLit:
    items: tuple


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple
    kwargs: tuple  # of (name, expr)
    line: int = 0


@dataclass(frozen=True)
class MethodCall:
    obj: object
    method: str
    args: tuple
    kwargs: tuple
    line: int = 0


@dataclass(frozen=True)
class Assign:
    target: str
    value: object
    line: int = 0


@dataclass(frozen=True)
class ExprStmt:
    value: object
    line: int = 0


@dataclass(frozen=True)
class For:
    var: str
    range_args: tuple
    body: tuple
    line: int = 0


@dataclass(frozen=True)
class ScriptAst:
    statements: tuple


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: Token = None):
        tok = tok or self.peek()
        raise ScriptParseError(message, line=tok.line, col=tok.col)

    def expect(self, kind: str, lexeme: str = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (lexeme is not None and tok.lexeme != lexeme):
            want = lexeme or kind
            got = tok.lexeme or tok.kind
            self.error(f"expected {want!r}, found {got!r}")
        return self.advance()

    def match(self, kind: str, lexeme: str = None) -> bool:
        tok = self.peek()
        if tok.kind == kind and (lexeme is None or tok.lexeme == lexeme):
            self.advance()
            return True
        return False

    # -- statements --------------------------------------------------------

    def parse_module(self) -> ScriptAst:
        stmts = []
        while self.peek().kind != "eof":
            if self.match("newline"):
                continue
            stmts.append(self.statement())
        return ScriptAst(tuple(stmts))

    def statement(self):
        tok = self.peek()
        if tok.kind == "keyword":
            if tok.lexeme == "for":
                return self.for_stmt()
            if tok.lexeme in RESERVED:
                self.error(f"{tok.lexeme!r} is not part of the scripting language")
        if (
            tok.kind == "ident"
            and self.tokens[self.pos + 1].kind == "operator"
            and self.tokens[self.pos + 1].lexeme == "="
        ):
            self.advance()
            self.advance()
            value = self.expression()
            self.end_of_statement()
            return Assign(tok.lexeme, value, tok.line)
        value = self.expression()
        self.end_of_statement()
        return ExprStmt(value, tok.line)

    def end_of_statement(self):
        if not self.match("newline"):
            if self.peek().kind == "eof":
                return
            self.error(f"unexpected {self.peek().lexeme!r} after expression")

    def for_stmt(self) -> For:
        start = self.expect("keyword", "for")
        var = self.expect("ident").lexeme
        self.expect("keyword", "in")
        head = self.peek()
        if head.kind != "ident" or head.lexeme != "range":
            self.error("for-loops may only iterate over range(...)")
        self.advance()
        self.expect("delimiter", "(")
        args = []
        if not self.match("delimiter", ")"):
            args.append(self.expression())
            while self.match("delimiter", ","):
                args.append(self.expression())
            self.expect("delimiter", ")")
        if not 1 <= len(args) <= 3:
            self.error("range() takes 1 to 3 arguments", start)
        self.expect("delimiter", ":")
        self.expect("newline")
        self.expect("indent")
        body = []
        while self.peek().kind != "dedent":
            if self.match("newline"):
                continue
            body.append(self.statement())
        self.expect("dedent")
        if not body:
            self.error("empty for-loop body", start)
        return For(var, tuple(args), tuple(body), start.line)

    # -- expressions --------------------------------------------------------

    def expression(self):
        return self.additive()

    def additive(self):
        node = self.multiplicative()
        while True:
            tok = self.peek()
            if tok.kind == "operator" and tok.lexeme in ("+", "-"):
                self.advance()
                node = BinOp(tok.lexeme, node, self.multiplicative())
            else:
                return node

    def multiplicative(self):
        node = self.unary()
        while True:
            tok = self.peek()
            if tok.kind == "operator" and tok.lexeme in ("*", "/"):
                self.advance()
                node = BinOp(tok.lexeme, node, self.unary())
            else:
                return node

    def unary(self):
        tok = self.peek()
        if tok.kind == "operator" and tok.lexeme in ("-", "+"):
            self.advance()
            return UnaryOp(tok.lexeme, self.unary())
        return self.power()

    def power(self):
        node = self.postfix()
        tok = self.peek()
        if tok.kind == "operator" and tok.lexeme == "**":
            self.advance()
            return BinOp("**", node, self.unary())
        return node

    def postfix(self):
        node = self.atom()
        while True:
            tok = self.peek()
            if tok.kind == "operator" and tok.lexeme == ".":
                self.advance()
                name = self.expect("ident")
                if not (
                    self.peek().kind == "delimiter" and self.peek().lexeme == "("
                ):
                    self.error("attribute access is only allowed as a method call")
                args, kwargs = self.call_args()
                node = MethodCall(node, name.lexeme, args, kwargs, name.line)
            else:
                return node

    def call_args(self):
        self.expect("delimiter", "(")
        args = []
        kwargs = []
        while not self.match("delimiter", ")"):
            if args or kwargs:
                self.expect("delimiter", ",")
                if self.match("delimiter", ")"):
                    break
            tok = self.peek()
            if (
                tok.kind == "ident"
                and self.tokens[self.pos + 1].kind == "operator"
                and self.tokens[self.pos + 1].lexeme == "="
            ):
                self.advance()
                self.advance()
                kwargs.append((tok.lexeme, self.expression()))
            else:
                if kwargs:
                    self.error("positional argument after keyword argument")
                args.append(self.expression())
        return tuple(args), tuple(kwargs)

    def atom(self):
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            text = tok.lexeme
            if "." in text or "e" in text or "E" in text:
                return Num(float(text))
            return Num(int(text))
        if tok.kind == "string":
            self.advance()
            return Str(tok.lexeme)
        if tok.kind == "keyword":
            if tok.lexeme in ("True", "False"):
                self.advance()
                return Bool(tok.lexeme == "True")
            self.error(f"{tok.lexeme!r} is not part of the scripting language")
        if tok.kind == "ident":
            self.advance()
            if self.peek().kind == "delimiter" and self.peek().lexeme == "(":
                if tok.lexeme not in CONSTRUCTORS and tok.lexeme not in MATH_NAMES:
                    self.error(f"unknown callable {tok.lexeme!r}", tok)
                args, kwargs = self.call_args()
                return Call(tok.lexeme, args, kwargs, tok.line)
            return Name(tok.lexeme, tok.line)
        if tok.kind == "delimiter" and tok.lexeme == "(":
            self.advance()
            first = self.expression()
            if self.match("delimiter", ","):
                items = [first]
                while not self.match("delimiter", ")"):
                    items.append(self.expression())
                    if not self.match("delimiter", ","):
                        self.expect("delimiter", ")")
                        break
                return TupleLit(tuple(items))
            self.expect("delimiter", ")")
            return first
        if tok.kind == "delimiter" and tok.lexeme == "[":
            self.advance()
            items = []
            while not self.match("delimiter", "]"):
                if items:
                    self.expect("delimiter", ",")
                    if self.match("delimiter", "]"):
                        break
                items.append(self.expression())
            return ListLit(tuple(items))
        self.error(f"unexpected {tok.lexeme or tok.kind!r}")


def parse(tokens) -> ScriptAst:
    """Parse a token list (or source text) into a ``ScriptAst``."""
    if isinstance(tokens, str):
        tokens = tokenize(tokens)
    return _Parser(list(tokens)).parse_module()
