"""The universal dynamic value type carried by every event and module state.

Values form a closed tagged universe with structural equality and a
canonical JSON text form (round-trip identity). Pointer values are shared
with the imperative language frontend; resources are shared with the
resource algebra.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

if TYPE_CHECKING:
    from .pcm import Resource

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1


def wrap_i64(n: int) -> int:
    """Wrap an unbounded integer into signed 64-bit two's complement."""
    return ((n - INT64_MIN) % (1 << 64)) + INT64_MIN


@dataclass(frozen=True)
class PtrVal:
    """A pointer: heap cell (block, offset), function name, or null.

    kind is one of "heap", "func", "null". Heap block ids are positive
    integers issued by the memory module; offsets are non-negative for
    valid accesses but may go out of range transiently via arithmetic.
    """

    kind: str
    block: int = 0
    offset: int = 0
    func: str = ""

    @staticmethod
    def heap(block: int, offset: int) -> "PtrVal":
        return PtrVal("heap", block=block, offset=offset)

    @staticmethod
    def of_func(name: str) -> "PtrVal":
        return PtrVal("func", func=name)

    @staticmethod
    def null() -> "PtrVal":
        return PtrVal("null")

    def to_json(self):
        if self.kind == "heap":
            return ["heap", self.block, self.offset]
        if self.kind == "func":
            return ["func", self.func]
        return ["null"]

    @staticmethod
    def from_json(obj) -> "PtrVal":
        tag = obj[0]
        if tag == "heap":
            return PtrVal.heap(int(obj[1]), int(obj[2]))
        if tag == "func":
            return PtrVal.of_func(obj[1])
        if tag == "null":
            return PtrVal.null()
        raise ValueError(f"bad pointer encoding: {obj!r}")


class Value:
    """Base class of the value universe. All variants are immutable."""

    __slots__ = ()

    def to_json(self):
        raise NotImplementedError

    def text(self) -> str:
        """Canonical text form (compact JSON, sorted keys)."""
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def __repr__(self) -> str:
        return self.text()


@dataclass(frozen=True, repr=False)
class VUnit(Value):
    def to_json(self):
        return ["unit"]


@dataclass(frozen=True, repr=False)
class VInt(Value):
    n: int

    def __post_init__(self):
        if not (INT64_MIN <= self.n <= INT64_MAX):
            object.__setattr__(self, "n", wrap_i64(self.n))

    def to_json(self):
        return ["int", self.n]


@dataclass(frozen=True, repr=False)
class VBool(Value):
    b: bool

    def to_json(self):
        return ["bool", self.b]


@dataclass(frozen=True, repr=False)
class VStr(Value):
    s: str

    def to_json(self):
        return ["str", self.s]


@dataclass(frozen=True, repr=False)
class VPtr(Value):
    p: PtrVal

    def to_json(self):
        return ["ptr", self.p.to_json()]


@dataclass(frozen=True, repr=False)
class VList(Value):
    items: tuple

    def __init__(self, items: Iterable[Value] = ()):
        object.__setattr__(self, "items", tuple(items))

    def to_json(self):
        return ["list", [v.to_json() for v in self.items]]


@dataclass(frozen=True, repr=False)
class VPair(Value):
    fst: Value
    snd: Value

    def to_json(self):
        return ["pair", self.fst.to_json(), self.snd.to_json()]


@dataclass(frozen=True, repr=False)
class VRes(Value):
    """A resource-algebra element lifted into the value universe."""

    res: "Resource"

    def to_json(self):
        return ["res", self.res.to_json()]


@dataclass(frozen=True, repr=False)
class VOpaque(Value):
    """Abstract values passed between specifications, tagged by purpose."""

    tag: str
    payload: Value

    def to_json(self):
        return ["opaque", self.tag, self.payload.to_json()]


UNIT = VUnit()
TRUE = VBool(True)
FALSE = VBool(False)
NIL = VList(())


def vint(n: int) -> VInt:
    return VInt(wrap_i64(n))


def vlist(*items: Value) -> VList:
    return VList(items)


def from_json(obj) -> Value:
    """Inverse of Value.to_json."""
    from .pcm import Resource

    tag = obj[0]
    if tag == "unit":
        return UNIT
    if tag == "int":
        return VInt(int(obj[1]))
    if tag == "bool":
        return VBool(bool(obj[1]))
    if tag == "str":
        return VStr(obj[1])
    if tag == "ptr":
        return VPtr(PtrVal.from_json(obj[1]))
    if tag == "list":
        return VList(tuple(from_json(x) for x in obj[1]))
    if tag == "pair":
        return VPair(from_json(obj[1]), from_json(obj[2]))
    if tag == "res":
        return VRes(Resource.from_json(obj[1]))
    if tag == "opaque":
        return VOpaque(obj[1], from_json(obj[2]))
    raise ValueError(f"bad value encoding: {obj!r}")


def from_text(text: str) -> Value:
    return from_json(json.loads(text))


def sort_key(v: Value) -> str:
    """Deterministic total order on values, via the canonical text form."""
    return v.text()
