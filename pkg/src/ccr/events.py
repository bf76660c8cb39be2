"""Event grammar, choice domains, and resumable computation trees.

A computation is a value: Done / Silent / Trigger(event, resume). Resuming
a trigger twice with different answers yields independent futures, which
the behavior explorer relies on for branching. Module bodies are most
conveniently written as generators that yield events and receive answers;
``from_generator`` converts such a function into a computation by
deterministic replay, so the resulting tree is freely duplicable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .ordinals import Ordinal
from .values import FALSE, TRUE,UNIT, Value, VBool, VInt, VList, VRes, vint


class UnboundedDomainError(Exception):
    """Raised when an unbounded domain must be enumerated exhaustively."""

    def __init__(self, tag: str):
        super().__init__(f"cannot enumerate unbounded domain {tag!r}")
        self.tag = tag


@dataclass(frozen=True)
class ChoiceDomain:
    """A set of values a choose/take event ranges over.

    All kinds except "unbounded" enumerate deterministically and finitely.
    The optional tag names the domain's purpose for resolvers and
    diagnostics (empty domains built by assume/guarantee carry the failed
    condition's tag).
    """

    kind: str
    values: tuple = ()          # explicit
    lo: int = 0                 # intrange
    hi: int = -1                # intrange (inclusive)
    pcm_name: str = ""          # pcmcarrier
    bound: Ordinal | None = None        # ordinalsbelow
    coeff_cap: int = 8          # ordinalsbelow: per-coefficient cap
    parts: tuple = ()           # product
    tag: str = ""
    meta: tuple = ()            # resolver hints (not part of the set)

    @staticmethod
    def explicit(values, tag: str = "") -> "ChoiceDomain":
        return ChoiceDomain("explicit", values=tuple(values), tag=tag)

    @staticmethod
    def int_range(lo: int, hi: int, tag: str = "") -> "ChoiceDomain":
        return ChoiceDomain("intrange", lo=lo, hi=hi, tag=tag)

    @staticmethod
    def booleans(tag: str = "") -> "ChoiceDomain":
        return ChoiceDomain("booleans", tag=tag)

    @staticmethod
    def pcm_carrier(name: str, tag: str = "") -> "ChoiceDomain":
        return ChoiceDomain("pcmcarrier", pcm_name=name, tag=tag)

    @staticmethod
    def ordinals_below(bound: Ordinal, coeff_cap: int = 8, tag: str = "") -> "ChoiceDomain":
        return ChoiceDomain("ordinalsbelow", bound=bound, coeff_cap=coeff_cap, tag=tag)

    @staticmethod
    def product(parts, tag: str = "") -> "ChoiceDomain":
        return ChoiceDomain("product", parts=tuple(parts), tag=tag)

    @staticmethod
    def unbounded(tag: str) -> "ChoiceDomain":
        return ChoiceDomain("unbounded", tag=tag)

    @property
    def is_enumerable(self) -> bool:
        if self.kind == "unbounded":
            return False
        if self.kind == "product":
            return all(p.is_enumerable for p in self.parts)
        return True

    def enumerate(self) -> Iterator[Value]:
        """Deterministic enumeration; product domains yield value lists."""
        if self.kind == "explicit":
            yield from self.values
        elif self.kind == "intrange":
            for n in range(self.lo, self.hi + 1):
                yield vint(n)
        elif self.kind == "booleans":
            yield FALSE
            yield TRUE
        elif self.kind == "pcmcarrier":
            from .pcm import registry
            for r in registry().carrier_elements(self.pcm_name):
                yield VRes(r)
        elif self.kind == "ordinalsbelow":
            cap = self.coeff_cap
            for c2 in range(cap + 1):
                for c1 in range(cap + 1):
                    for c0 in range(cap + 1):
                        o = Ordinal(c2, c1, c0)
                        if self.bound is not None and o < self.bound:
                            yield ordinal_value(o)
        elif self.kind == "product":
            for combo in itertools.product(*(p.enumerate() for p in self.parts)):
                yield VList(combo)
        else:
            raise UnboundedDomainError(self.tag)

    def size(self) -> int:
        return sum(1 for _ in self.enumerate())

    def describe(self) -> str:
        base = {
            "explicit": lambda: "{" + ",".join(v.text() for v in self.values) + "}",
            "intrange": lambda: f"[{self.lo}..{self.hi}]",
            "booleans": lambda: "bool",
            "pcmcarrier": lambda: f"pcm:{self.pcm_name}",
            "ordinalsbelow": lambda: f"ord<{self.bound}",
            "product": lambda: "(" + " x ".join(p.describe() for p in self.parts) + ")",
            "unbounded": lambda: f"unbounded:{self.tag}",
        }[self.kind]()
        return f"{base}#{self.tag}" if self.tag and self.kind != "unbounded" else base


def ordinal_value(o: Ordinal) -> Value:
    """Ordinals travel through events as plain value triples."""
    return VList((vint(o.c2), vint(o.c1), vint(o.c0)))


def value_ordinal(v: Value) -> Ordinal:
    assert isinstance(v, VList) and len(v.items) == 3
    return Ordinal(*(x.n for x in v.items))  # type: ignore[union-attr]


EMPTY = ChoiceDomain.explicit(())


# --- events -----------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    kind: str


@dataclass(frozen=True)
class Choose(Event):
    domain: ChoiceDomain

    def __init__(self, domain: ChoiceDomain):
        object.__setattr__(self, "kind", "choose")
        object.__setattr__(self, "domain", domain)


@dataclass(frozen=True)
class Take(Event):
    domain: ChoiceDomain

    def __init__(self, domain: ChoiceDomain):
        object.__setattr__(self, "kind", "take")
        object.__setattr__(self, "domain", domain)


@dataclass(frozen=True)
class Obs(Event):
    name: str
    arg: Value

    def __init__(self, name: str, arg: Value):
        object.__setattr__(self, "kind", "obs")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arg", arg)


@dataclass(frozen=True)
class Call(Event):
    fn: str
    arg: Value

    def __init__(self, fn: str, arg: Value):
        object.__setattr__(self, "kind", "call")
        object.__setattr__(self, "fn", fn)
        object.__setattr__(self, "arg", arg)


@dataclass(frozen=True)
class Get(Event):
    def __init__(self):
        object.__setattr__(self, "kind", "get")


@dataclass(frozen=True)
class Put(Event):
    state: Value

    def __init__(self, state: Value):
        object.__setattr__(self, "kind", "put")
        object.__setattr__(self, "state", state)


@dataclass(frozen=True)
class Apc(Event):
    """Abstract pure call marker; legal only inside pre-abstractions."""

    def __init__(self):
        object.__setattr__(self, "kind", "apc")


# --- computations -----------------------------------------------------------

class Computation:
    __slots__ = ()


@dataclass(frozen=True)
class Done(Computation):
    value: Value


class Silent(Computation):
    __slots__ = ("_thunk", "_forced")

    def __init__(self, thunk: Callable[[], Computation]):
        self._thunk = thunk
        self._forced: Computation | None = None

    @property
    def next(self) -> Computation:
        if self._forced is None:
            self._forced = self._thunk()
        return self._forced


class Trigger(Computation):
    __slots__ = ("event", "_resume", "_cache")

    def __init__(self, event: Event, resume: Callable[[Value], Computation]):
        self.event = event
        self._resume = resume
        self._cache: dict[Value, Computation] = {}

    def resume(self, answer: Value) -> Computation:
        # Caching keeps node identity stable when the same trigger is
        # resumed twice with the same answer (exploration revisits).
        hit = self._cache.get(answer)
        if hit is None:
            hit = self._resume(answer)
            self._cache[answer] = hit
        return hit


def done(v: Value = UNIT) -> Computation:
    return Done(v)


def trigger(event: Event) -> Computation:
    """A computation that performs one event and returns its answer."""
    return Trigger(event, Done)


def bind(comp: Computation, k: Callable[[Value], Computation]) -> Computation:
    if isinstance(comp, Done):
        return Silent(lambda: k(comp.value))
    if isinstance(comp, Silent):
        return Silent(lambda: bind(comp.next, k))
    assert isinstance(comp, Trigger)
    return Trigger(comp.event, lambda a: bind(comp.resume(a), k))


def assume(p: bool, tag: str = "assume") -> Computation:
    """Skip when p holds; otherwise take from the empty set (UB)."""
    if p:
        return Done(UNIT)
    return trigger(Take(ChoiceDomain.explicit((), tag=tag)))


def guarantee(p: bool, tag: str = "guarantee") -> Computation:
    """Skip when p holds; otherwise choose from the empty set (NB)."""
    if p:
        return Done(UNIT)
    return trigger(Choose(ChoiceDomain.explicit((), tag=tag)))


def from_generator(genfn: Callable, *args) -> Computation:
    """Build a computation from a generator that yields events.

    The generator must be deterministic and effect-free: resumption is
    implemented by replaying it from the start with the recorded answers,
    which is what makes the resulting computation a duplicable value.
    Yielded items are Events (the answer is sent back in) or Computations
    (run to completion, their result sent back in). The return value of
    the generator becomes the Done value (None meaning unit).
    """

    def at(answers: tuple) -> Computation:
        gen = genfn(*args)
        try:
            item = gen.send(None)
            for a in answers:
                item = gen.send(a)
        except StopIteration as stop:
            v = stop.value if stop.value is not None else UNIT
            return Done(v)
        if isinstance(item, Computation):
            return _splice(item, lambda v: at(answers + (v,)))
        if not isinstance(item, Event):
            raise TypeError(f"module body yielded {item!r}, expected an Event")
        return Trigger(item, lambda a: at(answers + (a,)))

    return Silent(lambda: at(()))


def _splice(comp: Computation, k: Callable[[Value], Computation]) -> Computation:
    """bind, but without re-entering the generator for inner nodes."""
    if isinstance(comp, Done):
        return Silent(lambda: k(comp.value))
    if isinstance(comp, Silent):
        return Silent(lambda: _splice(comp.next, k))
    assert isinstance(comp, Trigger)
    return Trigger(comp.event, lambda a: _splice(comp.resume(a), k))
