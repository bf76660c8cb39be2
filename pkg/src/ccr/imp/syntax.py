"""Abstract syntax for the imperative frontend, with printer and JSON form.

Values are 64-bit integers and pointers (heap cells, functions, null).
Calls, memory operations, and system calls are statements, not
expressions; the concrete grammar (see the package README) desugars
nested-call convenience forms into explicit temporaries at authoring
time, not in the parser.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable


# --- expressions -----------------------------------------------------------

class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class IntLit(Expr):
    n: int


@dataclass(frozen=True)
class StrLit(Expr):
    s: str


@dataclass(frozen=True)
class NullLit(Expr):
    pass


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # + - * / % < <= == != && ||
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Not(Expr):
    e: Expr


@dataclass(frozen=True)
class StrOfInt(Expr):
    e: Expr


# --- statements ------------------------------------------------------------

class Stmt:
    __slots__ = ()


@dataclass(frozen=True)
class Skip(Stmt):
    pass


@dataclass(frozen=True)
class Assign(Stmt):
    x: str
    e: Expr
    decl: bool = False  # introduced with var


@dataclass(frozen=True)
class Seq(Stmt):
    a: Stmt
    b: Stmt


@dataclass(frozen=True)
class If(Stmt):
    i: Expr
    t: Stmt
    e: Stmt


@dataclass(frozen=True)
class While(Stmt):
    c: Expr
    body: Stmt


@dataclass(frozen=True)
class CallFun(Stmt):
    x: str  # "" discards the result
    f: str
    args: tuple[Expr, ...]
    decl: bool = False


@dataclass(frozen=True)
class CallPtr(Stmt):
    x: str
    p: Expr
    args: tuple[Expr, ...]
    decl: bool = False


@dataclass(frozen=True)
class CallSys(Stmt):
    x: str
    f: str
    args: tuple[Expr, ...]
    decl: bool = False


@dataclass(frozen=True)
class AddrOf(Stmt):
    x: str
    fn: str
    decl: bool = False


@dataclass(frozen=True)
class Malloc(Stmt):
    x: str
    size: Expr
    decl: bool = False


@dataclass(frozen=True)
class Free(Stmt):
    p: Expr


@dataclass(frozen=True)
class Load(Stmt):
    x: str
    p: Expr
    decl: bool = False


@dataclass(frozen=True)
class Store(Stmt):
    p: Expr
    v: Expr


@dataclass(frozen=True)
class Cmp(Stmt):
    x: str
    a: Expr
    b: Expr
    decl: bool = False


@dataclass(frozen=True)
class Return(Stmt):
    e: Expr


def seq_of(stmts: Iterable[Stmt]) -> Stmt:
    out: Stmt | None = None
    for s in stmts:
        out = s if out is None else Seq(out, s)
    return out if out is not None else Skip()


# --- functions and modules ---------------------------------------------------

@dataclass(frozen=True)
class ImpFunction:
    name: str
    params: tuple[str, ...]
    body: Stmt


@dataclass(frozen=True)
class ImpModule:
    name: str
    localvars: tuple[tuple[str, int], ...] = ()
    functions: tuple[ImpFunction, ...] = ()

    def function(self, name: str) -> ImpFunction:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)


# --- printer ------------------------------------------------------------------

_PREC = {
    "||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}


def expr_to_source(e: Expr, prec: int = 0) -> str:
    if isinstance(e, IntLit):
        return str(e.n)
    if isinstance(e, StrLit):
        return '"' + e.s.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(e, NullLit):
        return "NULL"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Not):
        return "!" + expr_to_source(e.e, 7)
    if isinstance(e, StrOfInt):
        return "str(" + expr_to_source(e.e) + ")"
    assert isinstance(e, BinOp)
    p = _PREC[e.op]
    s = f"{expr_to_source(e.a, p)} {e.op} {expr_to_source(e.b, p + 1)}"
    return f"({s})" if p < prec else s


def _stmts(s: Stmt) -> list[Stmt]:
    if isinstance(s, Seq):
        return _stmts(s.a) + _stmts(s.b)
    if isinstance(s, Skip):
        return []
    return [s]


def _target(x: str, decl: bool) -> str:
    return ("var " if decl else "") + x + " := "


def stmt_lines(s: Stmt, indent: str) -> list[str]:
    out: list[str] = []
    for st in _stmts(s):
        if isinstance(st, Assign):
            out.append(indent + _target(st.x, st.decl) + expr_to_source(st.e))
        elif isinstance(st, If):
            out.append(indent + f"if ({expr_to_source(st.i)}) {{")
            out += stmt_lines(st.t, indent + "  ")
            if _stmts(st.e):
                out.append(indent + "} else {")
                out += stmt_lines(st.e, indent + "  ")
            out.append(indent + "}")
        elif isinstance(st, While):
            out.append(indent + f"while ({expr_to_source(st.c)}) {{")
            out += stmt_lines(st.body, indent + "  ")
            out.append(indent + "}")
        elif isinstance(st, CallFun):
            args = ", ".join(expr_to_source(a) for a in st.args)
            head = _target(st.x, st.decl) if st.x else ""
            out.append(indent + f"{head}{st.f}({args})")
        elif isinstance(st, CallPtr):
            args = ", ".join(expr_to_source(a) for a in st.args)
            head = _target(st.x, st.decl) if st.x else ""
            out.append(indent + f"{head}(*{expr_to_source(st.p)})({args})")
        elif isinstance(st, CallSys):
            args = ", ".join(expr_to_source(a) for a in st.args)
            head = _target(st.x, st.decl) if st.x else ""
            out.append(indent + f"{head}{st.f}({args})")
        elif isinstance(st, AddrOf):
            out.append(indent + _target(st.x, st.decl) + "&" + st.fn)
        elif isinstance(st, Malloc):
            out.append(indent + _target(st.x, st.decl)
                       + f"malloc({expr_to_source(st.size)})")
        elif isinstance(st, Free):
            out.append(indent + f"free({expr_to_source(st.p)})")
        elif isinstance(st, Load):
            out.append(indent + _target(st.x, st.decl)
                       + f"load({expr_to_source(st.p)})")
        elif isinstance(st, Store):
            out.append(indent + f"store({expr_to_source(st.p)}, "
                                f"{expr_to_source(st.v)})")
        elif isinstance(st, Cmp):
            out.append(indent + _target(st.x, st.decl)
                       + f"cmp({expr_to_source(st.a)}, {expr_to_source(st.b)})")
        elif isinstance(st, Return):
            out.append(indent + "return " + expr_to_source(st.e))
        else:
            raise TypeError(f"unprintable statement {st!r}")
    return out


def to_source(m: ImpModule) -> str:
    lines = [f"module {m.name}"]
    for name, init in m.localvars:
        lines.append(f"local {name} := {init}")
    for f in m.functions:
        lines.append(f"def {f.name}({', '.join(f.params)}) {{")
        lines += stmt_lines(f.body, "  ")
        lines.append("}")
    return "\n".join(lines) + "\n"


# --- canonical JSON of the AST ---------------------------------------------------

def expr_json(e: Expr):
    if isinstance(e, IntLit):
        return ["int", e.n]
    if isinstance(e, StrLit):
        return ["str", e.s]
    if isinstance(e, NullLit):
        return ["null"]
    if isinstance(e, Var):
        return ["var", e.name]
    if isinstance(e, Not):
        return ["not", expr_json(e.e)]
    if isinstance(e, StrOfInt):
        return ["str-of", expr_json(e.e)]
    assert isinstance(e, BinOp)
    return ["binop", e.op, expr_json(e.a), expr_json(e.b)]


def stmt_json(s: Stmt):
    if isinstance(s, Skip):
        return ["skip"]
    if isinstance(s, Seq):
        return ["seq", stmt_json(s.a), stmt_json(s.b)]
    if isinstance(s, Assign):
        return ["assign", s.x, expr_json(s.e), s.decl]
    if isinstance(s, If):
        return ["if", expr_json(s.i), stmt_json(s.t), stmt_json(s.e)]
    if isinstance(s, While):
        return ["while", expr_json(s.c), stmt_json(s.body)]
    if isinstance(s, CallFun):
        return ["call-fun", s.x, s.f, [expr_json(a) for a in s.args], s.decl]
    if isinstance(s, CallPtr):
        return ["call-ptr", s.x, expr_json(s.p), [expr_json(a) for a in s.args], s.decl]
    if isinstance(s, CallSys):
        return ["call-sys", s.x, s.f, [expr_json(a) for a in s.args], s.decl]
    if isinstance(s, AddrOf):
        return ["addr-of", s.x, s.fn, s.decl]
    if isinstance(s, Malloc):
        return ["malloc", s.x, expr_json(s.size), s.decl]
    if isinstance(s, Free):
        return ["free", expr_json(s.p)]
    if isinstance(s, Load):
        return ["load", s.x, expr_json(s.p), s.decl]
    if isinstance(s, Store):
        return ["store", expr_json(s.p), expr_json(s.v)]
    if isinstance(s, Cmp):
        return ["cmp", s.x, expr_json(s.a), expr_json(s.b), s.decl]
    if isinstance(s, Return):
        return ["return", expr_json(s.e)]
    raise TypeError(f"unencodable statement {s!r}")


def module_json(m: ImpModule):
    return {
        "module": m.name,
        "locals": [[n, v] for n, v in m.localvars],
        "functions": [
            {"name": f.name, "params": list(f.params), "body": stmt_json(f.body)}
            for f in m.functions
        ],
    }
