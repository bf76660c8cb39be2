"""Bounded behavior sets under dual nondeterminism, and inclusion checking.

Behaviors are computed structurally: union over demonic branches and over
environment responses, intersection over angelic branches, with partial
termination injected at every point and at fuel exhaustion. Fuel counts
choose/take/obs resolutions; internal steps are bounded separately, and
running out of either bound yields partial termination (silent divergence
is indistinguishable from slow termination at a finite bound).

An empty angelic domain denotes undefined behavior: every trace. Such
universes are kept symbolic, as "universal tail" anchors (prefix,
remaining fuel), so the set algebra stays exact without materializing
them; ``TraceSet.materialize`` expands them over a declared alphabet when
a concrete set is wanted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .engine import SystemState, load, step
from .errors import BoundMismatch, CcrError
from .events import ChoiceDomain, UnboundedDomainError
from .modules import ModuleSet
from .values import UNIT, Value, from_json as value_from_json


class UnknownObsName(CcrError):
    def __init__(self, name: str):
        super().__init__(
            f"obs name {name!r} has no response domain in the environment"
        )
        self.name = name


# --- traces -------------------------------------------------------------

ObsTriple = tuple[str, Value, Value]  # (name, arg, answer)

TERM = "term"
ERROR = "error"
PARTIAL = "partial"


@dataclass(frozen=True)
class Trace:
    """A finite observation sequence with a terminator."""

    events: tuple[ObsTriple, ...] = ()
    end: str = PARTIAL
    value: Value | None = None

    def cost(self) -> int:
        """Fuel needed to exhibit this trace: one per event, one to end."""
        return len(self.events) + (0 if self.end == PARTIAL else 1)

    def to_json(self):
        out = {
            "events": [[n, a.to_json(), r.to_json()] for n, a, r in self.events],
            "end": self.end,
        }
        if self.end == TERM and self.value is not None:
            out["value"] = self.value.to_json()
        return out

    @staticmethod
    def from_json(obj) -> "Trace":
        events = tuple(
            (n, value_from_json(a), value_from_json(r)) for n, a, r in obj["events"]
        )
        value = value_from_json(obj["value"]) if "value" in obj else None
        return Trace(events, obj["end"], value)

    def text(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def sort_key(self):
        """Shortest first, then lexicographic on the canonical text."""
        return (len(self.events), self.text())

    def prefixed(self, e: ObsTriple) -> "Trace":
        return Trace((e,) + self.events, self.end, self.value)


def term(v: Value, events: tuple[ObsTriple, ...] = ()) -> Trace:
    return Trace(events, TERM, v)


EMPTY_PARTIAL = Trace((), PARTIAL)


# --- environments -------------------------------------------------------

@dataclass(frozen=True)
class ObsEnv:
    """Finite response domains for observable events, plus the declared
    alphabet used when universal tails must be materialized or refuted."""

    responses: tuple[tuple[str, ChoiceDomain], ...] = ()
    arg_universe: tuple[tuple[str, tuple[Value, ...]], ...] = ()
    term_universe: tuple[Value, ...] = (UNIT,)
    internal_budget: int = 20000

    @staticmethod
    def make(
        responses: dict[str, ChoiceDomain] | None = None,
        arg_universe: dict[str, Iterable[Value]] | None = None,
        term_universe: Iterable[Value] = (UNIT,),
        internal_budget: int = 20000,
    ) -> "ObsEnv":
        return ObsEnv(
            tuple(sorted((responses or {}).items())),
            tuple(sorted((k, tuple(v)) for k, v in (arg_universe or {}).items())),
            tuple(term_universe),
            internal_budget,
        )

    def response_domain(self, name: str) -> ChoiceDomain:
        for k, d in self.responses:
            if k == name:
                return d
        raise UnknownObsName(name)

    def declared_args(self, name: str) -> tuple[Value, ...]:
        for k, vs in self.arg_universe:
            if k == name:
                return vs
        return ()

    def alphabet(self) -> list[ObsTriple]:
        """All declared (name, arg, answer) triples, in deterministic order."""
        out: list[ObsTriple] = []
        for name, dom in self.responses:
            for arg in self.declared_args(name):
                for ans in dom.enumerate():
                    out.append((name, arg, ans))
        return out

    @staticmethod
    def from_json(obj: dict) -> "ObsEnv":
        responses = {
            name: domain_from_json(d) for name, d in obj.get("responses", {}).items()
        }
        args = {
            name: [value_from_json(v) for v in vs]
            for name, vs in obj.get("args", {}).items()
        }
        terms = [value_from_json(v) for v in obj.get("terms", [["unit"]])]
        return ObsEnv.make(
            responses, args, terms, obj.get("internal_budget", 20000)
        )


def domain_from_json(obj: dict) -> ChoiceDomain:
    kind = obj["kind"]
    if kind == "explicit":
        return ChoiceDomain.explicit([value_from_json(v) for v in obj["values"]])
    if kind == "intrange":
        return ChoiceDomain.int_range(obj["lo"], obj["hi"])
    if kind == "booleans":
        return ChoiceDomain.booleans()
    raise ValueError(f"unsupported domain kind in environment file: {kind!r}")


def print_env(extra: dict[str, ChoiceDomain] | None = None, **kw) -> ObsEnv:
    """An environment where print is acknowledged with unit."""
    responses = {"print": ChoiceDomain.explicit((UNIT,))}
    responses.update(extra or {})
    return ObsEnv.make(responses, **kw)


# --- behavior sets -------------------------------------------------------

Tail = tuple[tuple[ObsTriple, ...], int]  # (prefix events, remaining fuel)


def _is_prefix(p: tuple, q: tuple) -> bool:
    return len(p) <= len(q) and q[: len(p)] == p


def _tail_subsumes(big: Tail, small: Tail) -> bool:
    (p, f), (q, g) = big, small
    return _is_prefix(p, q) and f - (len(q) - len(p)) >= g


def _tail_member(tail: Tail, t: Trace) -> bool:
    p, f = tail
    if not _is_prefix(p, t.events):
        return False
    rest = len(t.events) - len(p) + (0 if t.end == PARTIAL else 1)
    return rest <= f


def _normalize(
    concrete: set[Trace], tails: set[Tail]
) -> tuple[frozenset[Trace], frozenset[Tail]]:
    # 0-fuel tails only hold their own partial stop.
    grounded = {Trace(p, PARTIAL) for p, f in tails if f <= 0}
    tails = {t for t in tails if t[1] > 0}
    kept_tails = {
        t
        for t in tails
        if not any(o != t and _tail_subsumes(o, t) for o in tails)
    }
    concrete = concrete | grounded
    kept_concrete = {
        t for t in concrete if not any(_tail_member(tl, t) for tl in kept_tails)
    }
    return frozenset(kept_concrete), frozenset(kept_tails)


@dataclass(frozen=True)
class TraceSet:
    """A normalized set of traces: explicit members plus universal tails."""

    concrete: frozenset[Trace]
    tails: frozenset[Tail]
    fuel: int
    env: ObsEnv = field(compare=False, default=ObsEnv())

    @staticmethod
    def make(concrete: Iterable[Trace], tails: Iterable[Tail], fuel: int,
             env: ObsEnv = ObsEnv()) -> "TraceSet":
        c, t = _normalize(set(concrete), set(tails))
        return TraceSet(c, t, fuel, env)

    def __contains__(self, t: Trace) -> bool:
        return t in self.concrete or any(_tail_member(tl, t) for tl in self.tails)

    def is_universal(self) -> bool:
        return ((), self.fuel) in self.tails

    def sorted_traces(self) -> list[Trace]:
        return sorted(self.concrete, key=Trace.sort_key)

    def materialize(self) -> frozenset[Trace]:
        """Expand universal tails over the declared alphabet."""
        alphabet = self.env.alphabet()
        out = set(self.concrete)
        for p, f in self.tails:
            for suffix in _all_traces(alphabet, self.env.term_universe, f):
                out.add(Trace(p + suffix.events, suffix.end, suffix.value))
        return frozenset(out)

    def to_json_lines(self) -> list[dict]:
        lines: list[dict] = [t.to_json() for t in self.sorted_traces()]
        for p, f in sorted(self.tails, key=lambda tl: (len(tl[0]), tl[0])):
            lines.append(
                {
                    "universal_after": [[n, a.to_json(), r.to_json()] for n, a, r in p],
                    "fuel": f,
                }
            )
        return lines


def _all_traces(
    alphabet: list[ObsTriple], terms: tuple[Value, ...], fuel: int
) -> Iterator[Trace]:
    """Every trace exhibitable within ``fuel`` over the given alphabet."""

    def go(prefix: tuple[ObsTriple, ...], left: int) -> Iterator[Trace]:
        yield Trace(prefix, PARTIAL)
        if left >= 1:
            yield Trace(prefix, ERROR)
            for v in terms:
                yield Trace(prefix, TERM, v)
            for e in alphabet:
                yield from go(prefix + (e,), left - 1)

    return go((), fuel)


def universe(fuel: int, env: ObsEnv) -> TraceSet:
    """The full trace set at a bound: identity of intersection."""
    if fuel <= 0:
        return TraceSet.make({EMPTY_PARTIAL}, (), max(fuel, 0), env)
    return TraceSet.make((), {((), fuel)}, fuel, env)


def _union(a: TraceSet, b: TraceSet, fuel: int, env: ObsEnv) -> TraceSet:
    return TraceSet.make(a.concrete | b.concrete, a.tails | b.tails, fuel, env)


def _intersect(a: TraceSet, b: TraceSet, fuel: int, env: ObsEnv) -> TraceSet:
    concrete = {t for t in a.concrete if t in b} | {t for t in b.concrete if t in a}
    tails: set[Tail] = set()
    for p, f in a.tails:
        for q, g in b.tails:
            if _is_prefix(p, q):
                r = min(g, f - (len(q) - len(p)))
                if r >= 0:
                    tails.add((q, r))
            elif _is_prefix(q, p):
                r = min(f, g - (len(p) - len(q)))
                if r >= 0:
                    tails.add((p, r))
    return TraceSet.make(concrete, tails, fuel, env)


def _prefixed(s: TraceSet, e: ObsTriple, fuel: int, env: ObsEnv) -> TraceSet:
    return TraceSet.make(
        {t.prefixed(e) for t in s.concrete},
        {((e,) + p, f) for p, f in s.tails},
        fuel,
        env,
    )


def bounded_beh(mods: ModuleSet, fuel: int, env: ObsEnv) -> TraceSet:
    """The set of all traces exhibitable within ``fuel`` resolutions."""
    return _explore_root(load(mods), fuel, env)


def beh_of_state(state: SystemState, fuel: int, env: ObsEnv) -> TraceSet:
    return _explore_root(state, fuel, env)


def _explore_root(state: SystemState, fuel: int, env: ObsEnv) -> TraceSet:
    memo: dict = {}

    partial_only = TraceSet.make({EMPTY_PARTIAL}, (), fuel, env)

    def explore(state: SystemState, left: int) -> TraceSet:
        if left <= 0:
            return partial_only
        key = (state.key(), left)
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = _explore_step(state, left)
        memo[key] = out
        return out

    def _explore_step(state: SystemState, left: int) -> TraceSet:
        budget = env.internal_budget
        cur = state
        while True:
            res = step(cur)
            if res.kind == "continue":
                budget -= 1
                if budget <= 0:
                    return partial_only
                cur = res.state
                continue
            if res.kind == "terminated":
                assert res.value is not None
                return TraceSet.make(
                    {EMPTY_PARTIAL, Trace((), TERM, res.value)}, (), fuel, env
                )
            if res.kind == "errored":
                return TraceSet.make({EMPTY_PARTIAL, Trace((), ERROR)}, (), fuel, env)
            if res.kind == "needs-obs":
                dom = env.response_domain(res.obs_name)
                acc = partial_only
                for ans in dom.enumerate():
                    child = step(cur, answer=ans).state
                    sub = explore(child, left - 1)
                    assert res.obs_arg is not None
                    acc = _union(
                        acc, _prefixed(sub, (res.obs_name, res.obs_arg, ans), fuel, env),
                        fuel, env,
                    )
                return acc
            assert res.kind == "needs-choice" and res.domain is not None
            if not res.domain.is_enumerable:
                raise UnboundedDomainError(res.domain.tag)
            options = list(res.domain.enumerate())
            if res.angelic:
                if not options:
                    return _union(universe(left - 1, env), partial_only, fuel, env)
                acc = None
                for x in options:
                    sub = explore(step(cur, answer=x).state, left - 1)
                    acc = sub if acc is None else _intersect(acc, sub, fuel, env)
                assert acc is not None
                return _union(acc, partial_only, fuel, env)
            acc = partial_only
            for x in options:
                sub = explore(step(cur, answer=x).state, left - 1)
                acc = _union(acc, sub, fuel, env)
            return acc

    return explore(state, fuel)


# --- inclusion checking ---------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    holds: bool
    counterexample: Trace | None = None

    def to_json(self):
        out = {"verdict": "holds" if self.holds else "refuted"}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample.to_json()
        return out


def check_inclusion(lhs: TraceSet, rhs: TraceSet) -> Verdict:
    """Holds iff every lhs trace is an rhs trace; otherwise gives a minimal
    witness (shortest, ties broken by canonical order)."""
    if lhs.fuel != rhs.fuel:
        raise BoundMismatch(lhs.fuel, rhs.fuel)
    candidates: list[Trace] = [t for t in lhs.concrete if t not in rhs]
    for tail in lhs.tails:
        covered = any(_tail_subsumes(r, tail) for r in rhs.tails)
        if not covered:
            w = _tail_witness(tail, lhs, rhs)
            if w is not None:
                candidates.append(w)
    if not candidates:
        return Verdict(True)
    witness = min(candidates, key=Trace.sort_key)
    assert witness in lhs and witness not in rhs
    return Verdict(False, witness)


def _harvest_alphabet(*sets: TraceSet) -> list[ObsTriple]:
    seen: dict[str, ObsTriple] = {}
    for s in sets:
        for t in s.concrete:
            for e in t.events:
                seen.setdefault(json.dumps([e[0], e[1].to_json(), e[2].to_json()]), e)
        for p, _ in s.tails:
            for e in p:
                seen.setdefault(json.dumps([e[0], e[1].to_json(), e[2].to_json()]), e)
        for e in s.env.alphabet():
            seen.setdefault(json.dumps([e[0], e[1].to_json(), e[2].to_json()]), e)
    return [seen[k] for k in sorted(seen)]


def _tail_witness(tail: Tail, lhs: TraceSet, rhs: TraceSet) -> Trace | None:
    """A minimal-ish member of the tail that is missing from rhs."""
    p, f = tail
    terms = list(dict.fromkeys(lhs.env.term_universe + rhs.env.term_universe)) or [UNIT]
    alphabet = _harvest_alphabet(lhs, rhs)
    fresh: ObsTriple = ("?unobserved", UNIT, UNIT)

    def enumerate_members() -> Iterator[Trace]:
        # Depth 0 and 1 extensions, in canonical order.
        layer0 = [Trace(p, ERROR)] + [Trace(p, TERM, v) for v in terms]
        layer0.append(Trace(p, PARTIAL))
        for t in sorted(layer0, key=Trace.sort_key):
            yield t
        if f >= 1:
            layer1: list[Trace] = []
            for e in alphabet + [fresh]:
                layer1.append(Trace(p + (e,), PARTIAL))
                if f >= 2:
                    layer1.append(Trace(p + (e,), ERROR))
                    layer1 += [Trace(p + (e,), TERM, v) for v in terms]
            for t in sorted(layer1, key=Trace.sort_key):
                yield t
        # Fallback: pad with events no declared trace mentions, escaping
        # whatever residual coverage rhs tails provide.
        best = -1
        for q, g in rhs.tails:
            if _is_prefix(q, p):
                best = max(best, g - (len(p) - len(q)))
        pad = best + 1
        if pad + 1 <= f:
            yield Trace(p + (fresh,) * pad, ERROR)
        yield Trace(p + (fresh,) * f, PARTIAL)

    for t in enumerate_members():
        if _tail_member(tail, t) and t not in rhs:
            return t
    return None


def refine_closed(impl: ModuleSet, abs_: ModuleSet, fuel: int, env: ObsEnv) -> Verdict:
    """Closed-program refinement: behavior inclusion at a common bound."""
    return check_inclusion(bounded_beh(impl, fuel, env), bounded_beh(abs_, fuel, env))


def validate_closure(s: TraceSet) -> bool:
    """Partial-prefix closure: each member's partial prefixes are members."""
    if EMPTY_PARTIAL not in s:
        return False
    for t in s.concrete:
        for k in range(len(t.events) + 1):
            if Trace(t.events[:k], PARTIAL) not in s:
                return False
    for p, _ in s.tails:
        for k in range(len(p) + 1):
            if Trace(p[:k], PARTIAL) not in s:
                return False
    return True
