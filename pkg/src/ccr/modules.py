"""Modules, module sets, and linking.

A module is an initial local state plus a finite map from (dotted)
function names to function definitions; a module set is an ordered list
of modules with a set of declared global names. Linking is list append;
name clashes surface at load time, not link time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .events import Computation
from .values import UNIT, Value


@dataclass(frozen=True)
class FunctionDef:
    """A function body: argument value to computation, effect-free to build."""

    body: Callable[[Value], Computation]

    def __call__(self, arg: Value) -> Computation:
        return self.body(arg)


@dataclass(frozen=True)
class Module:
    name: str
    init: Value = UNIT
    funs: dict[str, FunctionDef] = field(default_factory=dict)

    def __post_init__(self):
        # dict preserves insertion order and enforces distinct names.
        object.__setattr__(self, "funs", dict(self.funs))


@dataclass(frozen=True)
class ModuleSet:
    modules: tuple[Module, ...] = ()
    load_data: frozenset[str] = frozenset()

    @staticmethod
    def of(*modules: Module) -> "ModuleSet":
        names: set[str] = set()
        for m in modules:
            names.update(m.funs)
        return ModuleSet(tuple(modules), frozenset(names))

    def __iter__(self):
        return iter(self.modules)

    def __len__(self):
        return len(self.modules)


def link(a: ModuleSet, b: ModuleSet) -> ModuleSet:
    """Concatenate two module sets; load data is the union."""
    return ModuleSet(a.modules + b.modules, a.load_data | b.load_data)


def link_all(*sets: ModuleSet) -> ModuleSet:
    out = ModuleSet()
    for s in sets:
        out = link(out, s)
    return out
