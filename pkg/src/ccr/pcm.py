"""Partial commutative monoids, the global resource product, and
executable resource predicates.

The global resource algebra is a named finite product of component
monoids assembled in a registry. Resources are sparse: slots at their
unit are omitted, and a distinguished absorbing Invalid marker stands for
every undefined sum. Component kinds: finite table-driven carriers,
exclusive elements, authoritative full/fragment pairs, and pointwise maps.

Predicates over resources (ownership, separating conjunction, pure facts,
points-to) evaluate decidably: ownership via residuals, separating
conjunction by searching componentwise splits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from .errors import NoRuleApplicable, PcmMismatch, UndecidableExists
from .events import ChoiceDomain
from .values import UNIT, Value, from_json as value_from_json

# Component elements are small hashable tuples / strings; None never occurs.
Elem = object


class Pcm:
    """A component monoid: carrier, addition, unit, validity."""

    name: str = ""

    def unit(self) -> Elem:
        raise NotImplementedError

    def add(self, a: Elem, b: Elem) -> Elem:
        raise NotImplementedError

    def is_valid(self, a: Elem) -> bool:
        raise NotImplementedError

    def residual(self, a: Elem, b: Elem) -> Elem | None:
        """Some c with a = b + c, or None."""
        raise NotImplementedError

    def splits(self, a: Elem) -> Iterator[tuple[Elem, Elem]]:
        """All (b, c) with b + c = a."""
        raise NotImplementedError

    def elements(self) -> list[Elem] | None:
        """The carrier when finite, else None."""
        return None

    def is_bottom(self, a: Elem) -> bool:
        """Whether a is the component's canonical undefined element."""
        return False

    def elem_to_json(self, a: Elem):
        raise NotImplementedError

    def elem_from_json(self, obj) -> Elem:
        raise NotImplementedError


class FinitePcm(Pcm):
    """A carrier given by an explicit addition table.

    The table lists commutative sums; unlisted pairs fall to the bottom
    element, which absorbs and is the only invalid element.
    """

    def __init__(
        self,
        name: str,
        elements: Iterable[str],
        unit_name: str,
        bottom: str,
        sums: dict[tuple[str, str], str],
    ):
        self.name = name
        self._elements = list(elements)
        self._unit = unit_name
        self._bottom = bottom
        table: dict[tuple[str, str], str] = {}
        for e in self._elements:
            table[(self._unit, e)] = e
            table[(e, self._unit)] = e
            table[(self._bottom, e)] = self._bottom
            table[(e, self._bottom)] = self._bottom
        for (a, b), c in sums.items():
            table[(a, b)] = c
            table[(b, a)] = c
        self._table = table

    def unit(self) -> Elem:
        return self._unit

    def add(self, a: Elem, b: Elem) -> Elem:
        if a not in self._elements or b not in self._elements:
            raise PcmMismatch(f"{a!r} or {b!r} is not an element of {self.name}")
        return self._table.get((a, b), self._bottom)

    def is_valid(self, a: Elem) -> bool:
        return a != self._bottom

    def residual(self, a: Elem, b: Elem) -> Elem | None:
        for c in self._elements:
            if self._table.get((b, c), self._bottom) == a:
                return c
        return None

    def splits(self, a: Elem) -> Iterator[tuple[Elem, Elem]]:
        for b in self._elements:
            for c in self._elements:
                if self._table.get((b, c), self._bottom) == a:
                    yield (b, c)

    def elements(self) -> list[Elem]:
        return list(self._elements)

    def is_bottom(self, a: Elem) -> bool:
        return a == self._bottom

    def elem_to_json(self, a: Elem):
        return a

    def elem_from_json(self, obj) -> Elem:
        if obj not in self._elements:
            raise PcmMismatch(f"{obj!r} is not an element of {self.name}")
        return obj


EX_UNIT = ("ex-unit",)
EX_BOT = ("ex-bot",)


class ExPcm(Pcm):
    """Exclusive ownership of a single value: just + just is undefined."""

    def __init__(self, name: str = "ex"):
        self.name = name

    def unit(self) -> Elem:
        return EX_UNIT

    @staticmethod
    def just(v: Value) -> Elem:
        return ("ex", v)

    def add(self, a: Elem, b: Elem) -> Elem:
        if a == EX_UNIT:
            return b
        if b == EX_UNIT:
            return a
        return EX_BOT

    def is_valid(self, a: Elem) -> bool:
        return a != EX_BOT

    def residual(self, a: Elem, b: Elem) -> Elem | None:
        for c in (EX_UNIT, a):
            if self.add(b, c) == a:
                return c
        if a == EX_BOT:
            return EX_BOT
        return None

    def splits(self, a: Elem) -> Iterator[tuple[Elem, Elem]]:
        yield (EX_UNIT, a)
        if a != EX_UNIT:
            yield (a, EX_UNIT)

    def is_bottom(self, a: Elem) -> bool:
        return a == EX_BOT

    def elem_to_json(self, a: Elem):
        if a == EX_UNIT:
            return ["unit"]
        if a == EX_BOT:
            return ["bot"]
        return ["ex", a[1].to_json()]

    def elem_from_json(self, obj) -> Elem:
        if obj[0] == "unit":
            return EX_UNIT
        if obj[0] == "bot":
            return EX_BOT
        return ("ex", value_from_json(obj[1]))


AUTH_BOT = ("auth-bot",)


class AuthPcm(Pcm):
    """Authoritative algebra over an inner monoid.

    Elements pair an optional full (authoritative) inner element with a
    fragment; two fulls clash, and validity requires the fragment to be
    included in the full when the full is present.
    """

    def __init__(self, inner: Pcm, name: str = ""):
        self.inner = inner
        self.name = name or f"auth({inner.name})"

    def unit(self) -> Elem:
        return ("auth", None, self.inner.unit())

    def full(self, x: Elem) -> Elem:
        return ("auth", x, self.inner.unit())

    def frag(self, x: Elem) -> Elem:
        return ("auth", None, x)

    def both(self, x: Elem, y: Elem) -> Elem:
        return ("auth", x, y)

    def add(self, a: Elem, b: Elem) -> Elem:
        if a == AUTH_BOT or b == AUTH_BOT:
            return AUTH_BOT
        _, fa, ga = a
        _, fb, gb = b
        if fa is not None and fb is not None:
            return AUTH_BOT
        return ("auth", fa if fa is not None else fb, self.inner.add(ga, gb))

    def is_valid(self, a: Elem) -> bool:
        if a == AUTH_BOT:
            return False
        _, f, g = a
        if not self.inner.is_valid(g):
            return False
        if f is None:
            return True
        return self.inner.is_valid(f) and self.inner.residual(f, g) is not None

    def residual(self, a: Elem, b: Elem) -> Elem | None:
        if a == AUTH_BOT:
            return AUTH_BOT
        if b == AUTH_BOT:
            return None
        _, fa, ga = a
        _, fb, gb = b
        if fb is None:
            fc = fa
        elif fa == fb:
            fc = None
        else:
            return None
        gc = self.inner.residual(ga, gb)
        if gc is None:
            return None
        return ("auth", fc, gc)

    def splits(self, a: Elem) -> Iterator[tuple[Elem, Elem]]:
        if a == AUTH_BOT:
            yield (AUTH_BOT, self.unit())
            return
        _, f, g = a
        for gb, gc in self.inner.splits(g):
            if f is None:
                yield (("auth", None, gb), ("auth", None, gc))
            else:
                yield (("auth", f, gb), ("auth", None, gc))
                yield (("auth", None, gb), ("auth", f, gc))

    def is_bottom(self, a: Elem) -> bool:
        return a == AUTH_BOT

    def elem_to_json(self, a: Elem):
        if a == AUTH_BOT:
            return ["bot"]
        _, f, g = a
        return [
            "auth",
            None if f is None else self.inner.elem_to_json(f),
            self.inner.elem_to_json(g),
        ]

    def elem_from_json(self, obj) -> Elem:
        if obj[0] == "bot":
            return AUTH_BOT
        f = None if obj[1] is None else self.inner.elem_from_json(obj[1])
        return ("auth", f, self.inner.elem_from_json(obj[2]))


class PointwisePcm(Pcm):
    """Finite-support maps from values to an inner monoid, default unit."""

    def __init__(self, inner: Pcm, name: str = ""):
        self.inner = inner
        self.name = name or f"pointwise({inner.name})"

    def unit(self) -> Elem:
        return ()

    def singleton(self, key: Value, x: Elem) -> Elem:
        return self.of_map({key: x})

    def of_map(self, m: dict[Value, Elem]) -> Elem:
        items = [(k, v) for k, v in m.items() if v != self.inner.unit()]
        return tuple(sorted(items, key=lambda kv: kv[0].text()))

    def as_map(self, a: Elem) -> dict[Value, Elem]:
        return dict(a)

    def add(self, a: Elem, b: Elem) -> Elem:
        m = self.as_map(a)
        for k, v in b:
            m[k] = self.inner.add(m[k], v) if k in m else v
        return self.of_map(m)

    def is_valid(self, a: Elem) -> bool:
        return all(self.inner.is_valid(v) for _, v in a)

    def residual(self, a: Elem, b: Elem) -> Elem | None:
        ma = self.as_map(a)
        out: dict[Value, Elem] = dict(ma)
        for k, v in b:
            have = ma.get(k, self.inner.unit())
            c = self.inner.residual(have, v)
            if c is None:
                return None
            out[k] = c
        return self.of_map(out)

    def splits(self, a: Elem) -> Iterator[tuple[Elem, Elem]]:
        keys = [k for k, _ in a]
        per_key = [list(self.inner.splits(v)) for _, v in a]
        for combo in itertools.product(*per_key):
            left = {k: bc[0] for k, bc in zip(keys, combo)}
            right = {k: bc[1] for k, bc in zip(keys, combo)}
            yield (self.of_map(left), self.of_map(right))

    def elem_to_json(self, a: Elem):
        return [[k.to_json(), self.inner.elem_to_json(v)] for k, v in a]

    def elem_from_json(self, obj) -> Elem:
        return self.of_map(
            {value_from_json(k): self.inner.elem_from_json(v) for k, v in obj}
        )


# --- the global product ------------------------------------------------------

@dataclass(frozen=True)
class Resource:
    """An element of the global product, sparse over slots; Invalid absorbs."""

    slots: tuple[tuple[str, Elem], ...] = ()
    invalid: bool = False

    @staticmethod
    def make(slots: dict[str, Elem], invalid: bool = False) -> "Resource":
        reg = registry()
        kept = {
            s: e for s, e in slots.items() if e != reg.slot(s).unit()
        }
        return Resource(tuple(sorted(kept.items())), invalid)

    def slot_value(self, name: str) -> Elem:
        for s, e in self.slots:
            if s == name:
                return e
        return registry().slot(name).unit()

    def slot_names(self) -> list[str]:
        return [s for s, _ in self.slots]

    def to_json(self):
        if self.invalid:
            return ["invalid"]
        reg = registry()
        return ["prod", [[s, reg.slot(s).elem_to_json(e)] for s, e in self.slots]]

    @staticmethod
    def from_json(obj) -> "Resource":
        if obj[0] == "invalid":
            return INVALID
        reg = registry()
        return Resource.make(
            {s: reg.slot(s).elem_from_json(e) for s, e in obj[1]}
        )

    def __str__(self) -> str:
        if self.invalid:
            return "invalid"
        if not self.slots:
            return "eps"
        reg = registry()
        return " + ".join(f"{s}:{reg.slot(s).elem_to_json(e)}" for s, e in self.slots)


EPSILON = Resource()
INVALID = Resource((), True)


class PcmRegistry:
    """The named product of component monoids forming the global algebra."""

    def __init__(self):
        self._slots: dict[str, Pcm] = {}
        self.update_rules: list[UpdateRule] = []

    def register(self, slot: str, pcm: Pcm) -> None:
        existing = self._slots.get(slot)
        if existing is not None and existing is not pcm:
            # Re-registering an identically-shaped component is harmless.
            if type(existing) is not type(pcm):
                raise PcmMismatch(f"slot {slot!r} already bound to {existing.name}")
        self._slots[slot] = pcm

    def slot(self, name: str) -> Pcm:
        pcm = self._slots.get(name)
        if pcm is None:
            raise PcmMismatch(f"no component registered for slot {name!r}")
        return pcm

    def slot_names(self) -> list[str]:
        return list(self._slots)

    def register_rule(self, rule: "UpdateRule") -> None:
        self.update_rules.append(rule)

    def inject(self, slot: str, elem: Elem) -> Resource:
        pcm = self.slot(slot)
        if isinstance(pcm, FinitePcm) and not pcm.is_valid(elem):
            return INVALID
        return Resource.make({slot: elem})

    def carrier_elements(self, slot: str) -> list[Resource]:
        """Valid carrier elements of a finite component, injected."""
        pcm = self.slot(slot)
        elems = pcm.elements()
        if elems is None:
            raise PcmMismatch(f"slot {slot!r} is not a finite carrier")
        return [self.inject(slot, e) for e in elems if pcm.is_valid(e)]


_REGISTRY = PcmRegistry()


def registry() -> PcmRegistry:
    return _REGISTRY


def add(a: Resource, b: Resource) -> Resource:
    """The product sum; Invalid absorbs, component clashes collapse to it."""
    if a.invalid or b.invalid:
        return INVALID
    reg = registry()
    out: dict[str, Elem] = dict(a.slots)
    for s, e in b.slots:
        pcm = reg.slot(s)
        if s in out:
            out[s] = pcm.add(out[s], e)
        else:
            out[s] = e
    if any(reg.slot(s).is_bottom(e) for s, e in out.items()):
        return INVALID
    return Resource.make(out)


def add_all(rs: Iterable[Resource]) -> Resource:
    acc = EPSILON
    for r in rs:
        acc = add(acc, r)
    return acc


def valid(a: Resource) -> bool:
    if a.invalid:
        return False
    reg = registry()
    return all(reg.slot(s).is_valid(e) for s, e in a.slots)


def residual(a: Resource, b: Resource) -> Resource | None:
    """Some c with a = b + c, or None when b is not included in a."""
    if a.invalid:
        return INVALID
    if b.invalid:
        return None
    reg = registry()
    out: dict[str, Elem] = dict(a.slots)
    for s, e in b.slots:
        pcm = reg.slot(s)
        have = out.get(s, pcm.unit())
        c = pcm.residual(have, e)
        if c is None:
            return None
        out[s] = c
    return Resource.make(out)


def includes(a: Resource, b: Resource) -> bool:
    """a >= b: some c exists with a = b + c."""
    return residual(a, b) is not None


def splits(a: Resource) -> Iterator[tuple[Resource, Resource]]:
    """All two-way decompositions, componentwise over occupied slots."""
    if a.invalid:
        yield (INVALID, EPSILON)
        yield (EPSILON, INVALID)
        return
    reg = registry()
    names = a.slot_names()
    per_slot = [list(reg.slot(s).splits(a.slot_value(s))) for s in names]
    for combo in itertools.product(*per_slot):
        left = {s: bc[0] for s, bc in zip(names, combo)}
        right = {s: bc[1] for s, bc in zip(names, combo)}
        yield (Resource.make(left), Resource.make(right))


# --- frame-preserving updates -------------------------------------------

@dataclass(frozen=True)
class UpdateRule:
    """A named, sound update pattern for structured carriers."""

    name: str
    applies: Callable[
        [tuple[Resource, Resource], tuple[Resource, Resource]], bool
    ] = field(compare=False)
    note: str = ""


def _touched_slots(*rs: Resource) -> list[str]:
    out: list[str] = []
    for r in rs:
        for s in r.slot_names():
            if s not in out:
                out.append(s)
    return sorted(out)


def _finite_frames(slots: list[str]) -> Iterator[Resource] | None:
    reg = registry()
    per_slot = []
    for s in slots:
        elems = reg.slot(s).elements()
        if elems is None:
            return None
        per_slot.append([(s, e) for e in elems])
    def gen():
        for combo in itertools.product(*per_slot):
            yield Resource.make(dict(combo))
    return gen()


def is_fpu(before: tuple[Resource, Resource], after: tuple[Resource, Resource]) -> bool:
    """Whether replacing (module, local) resources preserves every frame.

    Finite carriers are checked exhaustively; structured carriers fall
    back to registered update rules and raise NoRuleApplicable when none
    matches (which is weaker than answering False).
    """
    if before == after:
        return True
    mres, lres = before
    mres2, lres2 = after
    slots = _touched_slots(mres, lres, mres2, lres2)
    frames = _finite_frames(slots)
    if frames is not None:
        held = add(mres, lres)
        held2 = add(mres2, lres2)
        for frame in frames:
            if valid(add(frame, held)) and not valid(add(frame, held2)):
                return False
        return True
    for rule in registry().update_rules:
        if rule.applies(before, after):
            return True
    raise NoRuleApplicable(
        f"no registered update rule covers {mres}+{lres} -> {mres2}+{lres2}"
    )


def auth_update_rule(slot: str) -> UpdateRule:
    """Rewriting a matching full/fragment pair together is frame preserving
    when the fragment equals the whole authoritative element (exclusive
    inner carriers), since no frame can then hold any fragment."""

    def applies(before, after) -> bool:
        combined = add(*before)
        combined2 = add(*after)
        if combined.invalid or combined2.invalid:
            return False
        others = {s: e for s, e in combined.slots if s != slot}
        others2 = {s: e for s, e in combined2.slots if s != slot}
        if others != others2:
            return False
        a = combined.slot_value(slot)
        b = combined2.slot_value(slot)
        if a == AUTH_BOT or b == AUTH_BOT:
            return False
        _, fa, ga = a
        _, fb, gb = b
        return fa is not None and fb is not None and fa == ga and fb == gb

    return UpdateRule(f"auth-update:{slot}", applies,
                      "full+fragment rewritten in lockstep")


def ex_set_rule(slot: str) -> UpdateRule:
    """Replacing an exclusively-owned value: frames cannot hold the token."""

    def applies(before, after) -> bool:
        combined = add(*before)
        combined2 = add(*after)
        if combined.invalid or combined2.invalid:
            return False
        others = {s: e for s, e in combined.slots if s != slot}
        others2 = {s: e for s, e in combined2.slots if s != slot}
        if others != others2:
            return False
        a = combined.slot_value(slot)
        b = combined2.slot_value(slot)
        return (
            isinstance(a, tuple) and a[0] == "ex"
            and isinstance(b, tuple) and b[0] == "ex"
        )

    return UpdateRule(f"ex-set:{slot}", applies, "exclusive value replaced")


# --- resource predicates ---------------------------------------------------

@dataclass(frozen=True)
class RProp:
    kind: str
    flag: bool = False
    expected: Resource | None = None
    left: "RProp | None" = None
    right: "RProp | None" = None
    domain: ChoiceDomain | None = None
    binder: Callable[[Value], "RProp"] | None = field(default=None, compare=False)
    witnesses: tuple[Value, ...] = ()
    label: str = ""

    def __and__(self, other: "RProp") -> "RProp":
        return RProp("and", left=self, right=other)

    def __or__(self, other: "RProp") -> "RProp":
        return RProp("or", left=self, right=other)


def pure(fact: bool, label: str = "") -> RProp:
    return RProp("pure", flag=bool(fact), label=label)


TRUE_P = pure(True)
FALSE_P = pure(False)


def own(expected: Resource) -> RProp:
    return RProp("own", expected=expected)


def sep(p: RProp, q: RProp) -> RProp:
    return RProp("sep", left=p, right=q)


def exists(domain: ChoiceDomain, binder: Callable[[Value], RProp],
           witnesses: Iterable[Value] = ()) -> RProp:
    return RProp("exists", domain=domain, binder=binder,
                 witnesses=tuple(witnesses))


def eval_rprop(p: RProp, r: Resource) -> bool:
    """Decide a resource predicate at a concrete resource."""
    if p.kind == "pure":
        return p.flag
    if p.kind == "own":
        assert p.expected is not None
        return includes(r, p.expected)
    if p.kind == "and":
        return eval_rprop(p.left, r) and eval_rprop(p.right, r)
    if p.kind == "or":
        return eval_rprop(p.left, r) or eval_rprop(p.right, r)
    if p.kind == "sep":
        assert p.left is not None and p.right is not None
        for r1, r2 in splits(r):
            if eval_rprop(p.left, r1) and eval_rprop(p.right, r2):
                return True
        return False
    if p.kind == "exists":
        assert p.binder is not None and p.domain is not None
        if p.domain.is_enumerable:
            candidates: Iterable[Value] = p.domain.enumerate()
        elif p.witnesses:
            candidates = p.witnesses
        else:
            raise UndecidableExists(
                f"existential over unbounded domain {p.domain.tag!r} "
                "without registered witnesses"
            )
        return any(eval_rprop(p.binder(v), r) for v in candidates)
    raise ValueError(f"unknown rprop kind {p.kind!r}")


# --- the shipped algebra ------------------------------------------------------

def cannon_pcm() -> FinitePcm:
    """Ready + Ball = Fired; everything else clashes."""
    return FinitePcm(
        "Cannon",
        ["Undef", "eps", "Ready", "Fired", "Ball"],
        unit_name="eps",
        bottom="Undef",
        sums={("Ready", "Ball"): "Fired"},
    )


def once_pcm() -> FinitePcm:
    """A single consumable capability: Do + Do is undefined."""
    return FinitePcm(
        "Once", ["Undef", "eps", "Do"], unit_name="eps", bottom="Undef", sums={}
    )


def app_pcm() -> FinitePcm:
    """Init + Run = Both; duplicates of either clash."""
    return FinitePcm(
        "App",
        ["Undef", "eps", "Init", "Run", "Both"],
        unit_name="eps",
        bottom="Undef",
        sums={("Init", "Run"): "Both"},
    )


_EX = ExPcm()
MW_AUTH = AuthPcm(_EX, "MW.auth")
MW_TOK = _EX
MEM_INNER = PointwisePcm(_EX, "Mem.heap")
MEM = AuthPcm(MEM_INNER, "Mem")
MAP = PointwisePcm(_EX, "Map")


def install_standard_slots(reg: PcmRegistry | None = None) -> PcmRegistry:
    """Register the components used by the shipped example corpus."""
    reg = reg or registry()
    reg.register("Cannon", cannon_pcm())
    reg.register("Once", once_pcm())
    reg.register("App", app_pcm())
    reg.register("MW.auth", MW_AUTH)
    reg.register("MW.tok", MW_TOK)
    reg.register("Mem", MEM)
    reg.register("Map", MAP)
    if not reg.update_rules:
        reg.register_rule(auth_update_rule("MW.auth"))
        reg.register_rule(auth_update_rule("Mem"))
        reg.register_rule(ex_set_rule("MW.tok"))
        reg.register_rule(ex_set_rule("Map"))
    return reg


def registry_from_json(obj: dict, reg: PcmRegistry | None = None) -> PcmRegistry:
    """Assemble the global product from a JSON description of components."""
    reg = reg or PcmRegistry()
    for slot, desc in obj["slots"].items():
        reg.register(slot, _pcm_from_json(desc, slot))
    for rule in obj.get("rules", []):
        kind, _, slot = rule.partition(":")
        if kind == "auth-update":
            reg.register_rule(auth_update_rule(slot))
        elif kind == "ex-set":
            reg.register_rule(ex_set_rule(slot))
        else:
            raise ValueError(f"unknown rule kind {kind!r}")
    return reg


def _pcm_from_json(desc: dict, slot: str) -> Pcm:
    kind = desc["kind"]
    if kind == "finite":
        return FinitePcm(
            desc.get("name", slot),
            desc["elements"],
            desc["unit"],
            desc["bottom"],
            {tuple(k.split("+")): v for k, v in desc.get("sums", {}).items()},
        )
    if kind == "ex":
        return ExPcm(desc.get("name", slot))
    if kind == "auth":
        return AuthPcm(_pcm_from_json(desc["inner"], slot), desc.get("name", slot))
    if kind == "pointwise":
        return PointwisePcm(_pcm_from_json(desc["inner"], slot), desc.get("name", slot))
    raise ValueError(f"unknown component kind {kind!r}")


# Injected elements of the shipped finite carriers.

def ball() -> Resource:
    return registry().inject("Cannon", "Ball")


def ready() -> Resource:
    return registry().inject("Cannon", "Ready")


def fired() -> Resource:
    return registry().inject("Cannon", "Fired")


def do_token() -> Resource:
    return registry().inject("Once", "Do")


def init_token() -> Resource:
    return registry().inject("App", "Init")


def run_token() -> Resource:
    return registry().inject("App", "Run")


def both_token() -> Resource:
    return registry().inject("App", "Both")


def encode_int_map(m: dict[int, int]) -> Value:
    """Canonical value form of a partial map over 64-bit integers."""
    from .values import VList, VPair, vint

    return VList(tuple(VPair(vint(k), vint(m[k])) for k in sorted(m)))


def mw_full(m: dict[int, int]) -> Resource:
    """The middleware's authoritative view of its stored map."""
    return registry().inject("MW.auth", MW_AUTH.full(_EX.just(encode_int_map(m))))


def mwhas_res(m: dict[int, int]) -> Resource:
    """Knowledge of the stored map plus the capability to call put/get."""
    frag = registry().inject("MW.auth", MW_AUTH.frag(_EX.just(encode_int_map(m))))
    tok = registry().inject("MW.tok", _EX.just(UNIT))
    return add(frag, tok)


def mem_full(heap: dict[Value, Value]) -> Resource:
    inner = MEM_INNER.of_map({k: _EX.just(v) for k, v in heap.items()})
    return registry().inject("Mem", MEM.full(inner))


def points_to_res(ptr: Value, cells: Iterable[Value]) -> Resource:
    """Fragment owning consecutive heap cells starting at a pointer."""
    from .values import VPair, VPtr, vint

    assert isinstance(ptr, VPtr) and ptr.p.kind == "heap"
    m: dict[Value, Elem] = {}
    for i, v in enumerate(cells):
        key = VPair(vint(ptr.p.block), vint(ptr.p.offset + i))
        m[key] = _EX.just(v)
    return registry().inject("Mem", MEM.frag(MEM_INNER.of_map(m)))


def maps_to_map_res(handle: Value, table: dict[int, int]) -> Resource:
    """Ghost ownership of a map module handle holding the given table."""
    return registry().inject("Map", MAP.singleton(handle, _EX.just(encode_int_map(table))))


# RProp sugar over the shipped resources.

def points_to(ptr: Value, cells: Iterable[Value]) -> RProp:
    return own(points_to_res(ptr, cells))


def maps_to_map(handle: Value, table: dict[int, int]) -> RProp:
    return own(maps_to_map_res(handle, table))


def mwhas(table: dict[int, int]) -> RProp:
    return own(mwhas_res(table))
