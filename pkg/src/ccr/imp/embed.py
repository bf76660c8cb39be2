"""Embedding imperative modules into the event semantics.

Functions decode their argument as a list of values (64-bit integers and
pointers); a failed downcast is undefined behavior, as are division by
zero and type-confused operators. Module-local variables live in the
module state as a sorted association list accessed through Get/Put;
memory statements become calls to the memory module; system calls become
observable events. Execution of statements and expressions is written as
generators over events, so embedded functions are ordinary resumable
computations.
"""

from __future__ import annotations

from typing import Iterator

from ..events import Call, ChoiceDomain, Computation, Get, Obs, Put, Take, from_generator
from ..modules import FunctionDef, Module
from ..values import (
    PtrVal,
    UNIT,
    Value,
    VBool,
    VInt,
    VList,
    VPair,
    VPtr,
    VStr,
    vint,
    wrap_i64,
)
from . import syntax as ast


def val_to_any(v: Value) -> Value:
    """Language values are already elements of the universal type."""
    return v


def is_val(v: Value) -> bool:
    return isinstance(v, (VInt, VPtr))


def any_to_val(v: Value) -> Value | None:
    """Downcast from the universal type; None signals failure (UB)."""
    return v if is_val(v) else None


def _ub(reason: str):
    return Take(ChoiceDomain.explicit((), tag=f"ub:{reason}"))


def _truthy(v: Value) -> bool | None:
    if isinstance(v, VInt):
        return v.n != 0
    if isinstance(v, VBool):
        return v.b
    return None


def _state_get(st: Value, name: str) -> Value | None:
    if not isinstance(st, VList):
        return None
    for item in st.items:
        if isinstance(item, VPair) and isinstance(item.fst, VStr):
            if item.fst.s == name:
                return item.snd
    return None


def _state_set(st: Value, name: str, v: Value) -> Value:
    assert isinstance(st, VList)
    items = []
    replaced = False
    for item in st.items:
        assert isinstance(item, VPair) and isinstance(item.fst, VStr)
        if item.fst.s == name:
            items.append(VPair(item.fst, v))
            replaced = True
        else:
            items.append(item)
    if not replaced:
        items.append(VPair(VStr(name), v))
        items.sort(key=lambda p: p.fst.s)  # type: ignore[union-attr]
    return VList(items)


def initial_state(m: ast.ImpModule) -> Value:
    return VList(
        tuple(
            VPair(VStr(n), vint(v))
            for n, v in sorted(m.localvars, key=lambda nv: nv[0])
        )
    )


class _Eval:
    """Statement/expression evaluation for one function activation."""

    def __init__(self, module: ast.ImpModule, env: dict[str, Value]):
        self.module = module
        self.modvars = {n for n, _ in module.localvars}
        self.env = env

    # -- variables --------------------------------------------------------

    def read_var(self, name: str) -> Iterator:
        if name in self.env:
            return self.env[name]
        if name in self.modvars:
            st = yield Get()
            v = _state_get(st, name)
            if v is None:
                yield _ub(f"module variable {name}")
                return UNIT
            return v
        yield _ub(f"unbound variable {name}")
        return UNIT

    def write_var(self, name: str, v: Value) -> Iterator:
        if name in self.modvars and name not in self.env:
            st = yield Get()
            yield Put(_state_set(st, name, v))
        else:
            self.env[name] = v
        return None

    # -- expressions ---------------------------------------------------------

    def expr(self, e: ast.Expr) -> Iterator:
        if isinstance(e, ast.IntLit):
            return vint(e.n)
        if isinstance(e, ast.StrLit):
            return VStr(e.s)
        if isinstance(e, ast.NullLit):
            return VPtr(PtrVal.null())
        if isinstance(e, ast.Var):
            return (yield from self.read_var(e.name))
        if isinstance(e, ast.Not):
            v = yield from self.expr(e.e)
            t = _truthy(v)
            if t is None:
                yield _ub("! on a non-integer")
                return UNIT
            return vint(0 if t else 1)
        if isinstance(e, ast.StrOfInt):
            v = yield from self.expr(e.e)
            if not isinstance(v, VInt):
                yield _ub("str() on a non-integer")
                return UNIT
            return VStr(str(v.n))
        assert isinstance(e, ast.BinOp)
        a = yield from self.expr(e.a)
        b = yield from self.expr(e.b)
        return (yield from self.binop(e.op, a, b))

    def binop(self, op: str, a: Value, b: Value) -> Iterator:
        if op == "+":
            if isinstance(a, VInt) and isinstance(b, VInt):
                return vint(a.n + b.n)
            if isinstance(a, VStr) and isinstance(b, VStr):
                return VStr(a.s + b.s)
            if isinstance(a, VPtr) and a.p.kind == "heap" and isinstance(b, VInt):
                return VPtr(PtrVal.heap(a.p.block, a.p.offset + b.n))
            yield _ub("+ on incompatible values")
            return UNIT
        if op in ("&&", "||"):
            ta, tb = _truthy(a), _truthy(b)
            if ta is None or tb is None:
                yield _ub(f"{op} on non-integers")
                return UNIT
            out = (ta and tb) if op == "&&" else (ta or tb)
            return vint(1 if out else 0)
        if not (isinstance(a, VInt) and isinstance(b, VInt)):
            yield _ub(f"{op} on non-integers")
            return UNIT
        if op == "-":
            return vint(a.n - b.n)
        if op == "*":
            return vint(a.n * b.n)
        if op in ("/", "%"):
            if b.n == 0:
                yield _ub("division by zero")
                return UNIT
            q = abs(a.n) // abs(b.n)
            if (a.n < 0) != (b.n < 0):
                q = -q
            if op == "/":
                return vint(q)
            return vint(a.n - q * b.n)
        if op == "<":
            return vint(1 if a.n < b.n else 0)
        if op == "<=":
            return vint(1 if a.n <= b.n else 0)
        if op == "==":
            return vint(1 if a.n == b.n else 0)
        if op == "!=":
            return vint(1 if a.n != b.n else 0)
        yield _ub(f"unknown operator {op}")
        return UNIT

    # -- statements -------------------------------------------------------------

    def stmt(self, s: ast.Stmt) -> Iterator:
        """Yields events; returns ("ret", v) on early return, else None."""
        if isinstance(s, ast.Skip):
            return None
        if isinstance(s, ast.Seq):
            r = yield from self.stmt(s.a)
            if r is not None:
                return r
            return (yield from self.stmt(s.b))
        if isinstance(s, ast.Assign):
            v = yield from self.expr(s.e)
            yield from self._bind(s.x, s.decl, v)
            return None
        if isinstance(s, ast.If):
            c = yield from self.expr(s.i)
            t = _truthy(c)
            if t is None:
                yield _ub("if on a non-integer")
                return None
            return (yield from self.stmt(s.t if t else s.e))
        if isinstance(s, ast.While):
            while True:
                c = yield from self.expr(s.c)
                t = _truthy(c)
                if t is None:
                    yield _ub("while on a non-integer")
                    return None
                if not t:
                    return None
                r = yield from self.stmt(s.body)
                if r is not None:
                    return r
        if isinstance(s, ast.CallFun):
            args = yield from self._eval_args(s.args)
            r = yield Call(s.f, VList(args))
            yield from self._bind_opt(s.x, s.decl, r)
            return None
        if isinstance(s, ast.CallPtr):
            p = yield from self.expr(s.p)
            if not (isinstance(p, VPtr) and p.p.kind == "func"):
                yield _ub("call through a non-function pointer")
                return None
            args = yield from self._eval_args(s.args)
            r = yield Call(p.p.func, VList(args))
            yield from self._bind_opt(s.x, s.decl, r)
            return None
        if isinstance(s, ast.CallSys):
            args = yield from self._eval_args(s.args)
            payload: Value = args[0] if len(args) == 1 else VList(args)
            r = yield Obs(s.f, payload)
            yield from self._bind_opt(s.x, s.decl, r)
            return None
        if isinstance(s, ast.AddrOf):
            yield from self._bind(s.x, s.decl, VPtr(PtrVal.of_func(s.fn)))
            return None
        if isinstance(s, ast.Malloc):
            size = yield from self.expr(s.size)
            r = yield Call("Mem.alloc", VList((size,)))
            yield from self._bind(s.x, s.decl, r)
            return None
        if isinstance(s, ast.Free):
            p = yield from self.expr(s.p)
            yield Call("Mem.free", VList((p,)))
            return None
        if isinstance(s, ast.Load):
            p = yield from self.expr(s.p)
            r = yield Call("Mem.load", VList((p,)))
            yield from self._bind(s.x, s.decl, r)
            return None
        if isinstance(s, ast.Store):
            p = yield from self.expr(s.p)
            v = yield from self.expr(s.v)
            yield Call("Mem.store", VList((p, v)))
            return None
        if isinstance(s, ast.Cmp):
            a = yield from self.expr(s.a)
            b = yield from self.expr(s.b)
            r = yield Call("Mem.cmp", VList((a, b)))
            yield from self._bind(s.x, s.decl, r)
            return None
        if isinstance(s, ast.Return):
            v = yield from self.expr(s.e)
            return ("ret", v)
        raise TypeError(f"unexecutable statement {s!r}")

    def _eval_args(self, args) -> Iterator:
        out = []
        for a in args:
            out.append((yield from self.expr(a)))
        return out

    def _bind(self, x: str, decl: bool, v: Value) -> Iterator:
        if decl:
            self.env[x] = v
        else:
            yield from self.write_var(x, v)
        return None

    def _bind_opt(self, x: str, decl: bool, v: Value) -> Iterator:
        if x:
            yield from self._bind(x, decl, v)
        return None


def embed_function(m: ast.ImpModule, f: ast.ImpFunction):
    def body(arg: Value) -> Computation:
        def gen():
            if not isinstance(arg, VList) or len(arg.items) != len(f.params):
                yield _ub(f"bad argument to {m.name}.{f.name}")
                return UNIT
            env: dict[str, Value] = {}
            for name, v in zip(f.params, arg.items):
                if any_to_val(v) is None:
                    yield _ub(f"bad argument to {m.name}.{f.name}")
                    return UNIT
                env[name] = v
            ev = _Eval(m, env)
            r = yield from ev.stmt(f.body)
            if r is None:
                return vint(0)
            out = r[1]
            if any_to_val(out) is None:
                yield _ub(f"bad return from {m.name}.{f.name}")
                return UNIT
            return out
        return from_generator(gen)
    return body


def embed(m: ast.ImpModule) -> Module:
    """An event-semantics module for a parsed imperative module."""
    funs = {
        f"{m.name}.{f.name}": FunctionDef(embed_function(m, f))
        for f in m.functions
    }
    return Module(m.name, initial_state(m), funs)
