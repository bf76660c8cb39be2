"""The imperative language frontend: syntax, parser, embedding, memory."""

from .embed import any_to_val, embed, embed_function, initial_state, is_val, val_to_any
from .mem import mem_module
from .parser import ImpSyntaxError, parse
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
    Seq,
    Skip,
    Stmt,
    Store,
    StrLit,
    StrOfInt,
    Var,
    While,
    module_json,
    seq_of,
    to_source,
)

__all__ = [
    "AddrOf", "Assign", "BinOp", "CallFun", "CallPtr", "CallSys", "Cmp",
    "Expr", "Free", "If", "ImpFunction", "ImpModule", "ImpSyntaxError",
    "IntLit", "Load", "Malloc", "Not", "NullLit", "Return", "Seq", "Skip",
    "Stmt", "Store", "StrLit", "StrOfInt", "Var", "While", "any_to_val",
    "embed", "embed_function", "initial_state", "is_val", "mem_module",
    "module_json", "parse", "seq_of", "to_source", "val_to_any",
]
