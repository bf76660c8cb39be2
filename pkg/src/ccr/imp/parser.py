"""Recursive-descent parser for the imperative frontend.

Grammar sketch (full reference in the README):

    module  := "module" NAME item*
    item    := "local" NAME ":=" INT | "def" NAME "(" params ")" block
    block   := "{" stmt* "}"
    stmt    := "skip" | ["var"] NAME ":=" rhs | bare-call
             | "if" "(" expr ")" block ["else" block]
             | "while" "(" expr ")" block
             | "return" expr | "free" "(" expr ")"
             | "store" "(" expr "," expr ")"
    rhs     := "malloc(e)" | "load(e)" | "cmp(e, e)" | "&" QNAME
             | QNAME "(" args ")" | sysname "(" args ")"
             | "(" "*" expr ")" "(" args ")" | expr

Module function calls use dotted names; print and getint are system
calls. Binary operators: || && == != < <= + - * / % with the usual
precedence, ! and unary - prefix; str(e) renders an integer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    AddrOf,
    Assign,
    BinOp,
    CallFun,
    CallPtr,
    CallSys,
    Cmp,
    Expr,
    Free,
    If,
    ImpFunction,
    ImpModule,
    IntLit,
    Load,
    Malloc,
    Not,
    NullLit,
    Return,
    Skip,
    Stmt,
    Store,
    StrLit,
    StrOfInt,
    Var,
    While,
    seq_of,
)

SYS_CALLS = ("print", "getint")

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*)
  | (?P<punct>:=|<=|==|!=|&&|\|\||[{}(),+\-*/%<!&])
    """,
    re.VERBOSE,
)


class ImpSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos = 0
    line, col = 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ImpSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or ""
        tok = m.group()
        if kind != "ws":
            out.append(Token(kind, tok, line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.i += 1
        return t

    def fail(self, message: str):
        t = self.peek()
        raise ImpSyntaxError(message + (f" (found {t.text!r})" if t.text else ""),
                             t.line, t.col)

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text:
            self.fail(f"expected {text!r}")
        return self.next()

    def name(self, what: str = "name") -> str:
        t = self.peek()
        if t.kind != "name":
            self.fail(f"expected {what}")
        return self.next().text

    # -- module structure ------------------------------------------------

    def module(self) -> ImpModule:
        self.expect("module")
        name = self.name("module name")
        localvars: list[tuple[str, int]] = []
        functions: list[ImpFunction] = []
        while self.peek().text in ("local", "def"):
            if self.peek().text == "local":
                self.next()
                var = self.name("variable")
                self.expect(":=")
                neg = self.peek().text == "-"
                if neg:
                    self.next()
                t = self.peek()
                if t.kind != "int":
                    self.fail("expected integer initializer")
                self.next()
                localvars.append((var, -int(t.text) if neg else int(t.text)))
            else:
                self.next()
                fname = self.name("function name")
                self.expect("(")
                params: list[str] = []
                if self.peek().text != ")":
                    params.append(self.name("parameter"))
                    while self.peek().text == ",":
                        self.next()
                        params.append(self.name("parameter"))
                self.expect(")")
                body = self.block()
                functions.append(ImpFunction(fname, tuple(params), body))
        if self.peek().kind != "eof":
            self.fail("expected 'local', 'def', or end of module")
        return ImpModule(name, tuple(localvars), tuple(functions))

    def block(self) -> Stmt:
        self.expect("{")
        stmts: list[Stmt] = []
        while self.peek().text != "}":
            stmts.append(self.stmt())
        self.expect("}")
        return seq_of(stmts)

    # -- statements ---------------------------------------------------------

    def stmt(self) -> Stmt:
        t = self.peek()
        if t.text == "skip":
            self.next()
            return Skip()
        if t.text == "if":
            self.next()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block()
            if self.peek().text == "else":
                self.next()
                other = self.block()
            else:
                other = Skip()
            return If(cond, then, other)
        if t.text == "while":
            self.next()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return While(cond, self.block())
        if t.text == "return":
            self.next()
            return Return(self.expr())
        if t.text == "free":
            self.next()
            self.expect("(")
            p = self.expr()
            self.expect(")")
            return Free(p)
        if t.text == "store":
            self.next()
            self.expect("(")
            p = self.expr()
            self.expect(",")
            v = self.expr()
            self.expect(")")
            return Store(p, v)
        if t.text == "var":
            self.next()
            x = self.name("variable")
            self.expect(":=")
            return self.rhs(x, decl=True)
        if t.kind == "name" and self.peek(1).text == ":=":
            x = self.next().text
            self.next()
            return self.rhs(x, decl=False)
        if t.kind == "name" and self.peek(1).text == "(":
            return self.call_stmt("", decl=False)
        if t.text == "(":
            return self.call_stmt("", decl=False)
        self.fail("expected a statement")
        raise AssertionError

    def rhs(self, x: str, decl: bool) -> Stmt:
        t = self.peek()
        if t.text == "malloc":
            self.next()
            self.expect("(")
            size = self.expr()
            self.expect(")")
            return Malloc(x, size, decl)
        if t.text == "load":
            self.next()
            self.expect("(")
            p = self.expr()
            self.expect(")")
            return Load(x, p, decl)
        if t.text == "cmp":
            self.next()
            self.expect("(")
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return Cmp(x, a, b, decl)
        if t.text == "&":
            self.next()
            fn = self.name("function name")
            if "." not in fn:
                self.fail("function addresses use dotted names")
            return AddrOf(x, fn, decl)
        if (t.kind == "name" and self.peek(1).text == "("
                and (("." in t.text) or t.text in SYS_CALLS)):
            return self.call_stmt(x, decl)
        if t.text == "(" and self.peek(1).text == "*":
            return self.call_stmt(x, decl)
        return Assign(x, self.expr(), decl)

    def call_stmt(self, x: str, decl: bool) -> Stmt:
        t = self.peek()
        if t.text == "(":
            self.next()
            self.expect("*")
            p = self.expr()
            self.expect(")")
            args = self.args()
            return CallPtr(x, p, args, decl)
        fn = self.name("function name")
        args = self.args()
        if fn in SYS_CALLS:
            return CallSys(x, fn, args, decl)
        if "." not in fn:
            self.fail(f"call target {fn!r} must be a dotted module function")
        return CallFun(x, fn, args, decl)

    def args(self) -> tuple[Expr, ...]:
        self.expect("(")
        out: list[Expr] = []
        if self.peek().text != ")":
            out.append(self.expr())
            while self.peek().text == ",":
                self.next()
                out.append(self.expr())
        self.expect(")")
        return tuple(out)

    # -- expressions ------------------------------------------------------------

    def expr(self) -> Expr:
        return self._binary(1)

    _LEVELS = {1: ("||",), 2: ("&&",), 3: ("==", "!="), 4: ("<", "<="),
               5: ("+", "-"), 6: ("*", "/", "%")}

    def _binary(self, level: int) -> Expr:
        if level > 6:
            return self._unary()
        e = self._binary(level + 1)
        while self.peek().text in self._LEVELS[level]:
            op = self.next().text
            e = BinOp(op, e, self._binary(level + 1))
        return e

    def _unary(self) -> Expr:
        t = self.peek()
        if t.text == "!":
            self.next()
            return Not(self._unary())
        if t.text == "-":
            self.next()
            inner = self._unary()
            if isinstance(inner, IntLit):
                return IntLit(-inner.n)
            return BinOp("-", IntLit(0), inner)
        return self._atom()

    def _atom(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(int(t.text))
        if t.kind == "str":
            self.next()
            body = t.text[1:-1]
            return StrLit(body.replace('\\"', '"').replace("\\\\", "\\"))
        if t.text == "NULL":
            self.next()
            return NullLit()
        if t.text == "str":
            self.next()
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return StrOfInt(e)
        if t.text == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "name":
            if "." in t.text or t.text in SYS_CALLS:
                self.fail("calls are statements, not expressions")
            self.next()
            return Var(t.text)
        self.fail("expected an expression")
        raise AssertionError


def parse(text: str) -> ImpModule:
    """Parse one module; raises ImpSyntaxError with line/column."""
    return _Parser(text).module()
