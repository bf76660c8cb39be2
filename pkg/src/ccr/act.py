"""Replay of assumption cancellation on a closed wrapped system.

Every take in the wrappers is resolved deterministically from the
matching guarantee: the call resource is the one the preceding guarantee
chose, the external resource is the sum of all other module and frame
resources, auxiliary variables mirror the caller's choice. Guarantee
chooses follow the canonical discharge strategy: candidates are exact
redistributions of the pool the frame holds (module resource + frame
holdings + in-flight resource), ordered to keep resources at home and
ship the smallest satisfying call resource; registered update hints
supply frame-preserving rewrites exact splitting cannot express. A
candidate commits as soon as the guarantee it feeds passes; when no
candidate passes, that guarantee site is reported as failed.

The runner asserts the conservation invariant across every
guarantee-to-assumption handoff: the sum of all module resources, live
frame resources, and the in-flight resource is unchanged and valid. It
records pure-call depth edges, which must strictly decrease, and checks
that wrapped module states stay paired with their module resource.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

from .behavior import ERROR, PARTIAL, TERM, ObsEnv, Trace, TraceSet, Verdict
from .engine import StepResult, SystemState, load, step
from .errors import CcrError
from .events import Call, Done, Trigger, ordinal_value
from .modules import ModuleSet
from .ordinals import Depth, INFINITY, Ordinal
from .pcm import EPSILON, Resource, add, splits, valid
from .values import FALSE, NIL, TRUE, UNIT, Value, VList, VPair, VRes, VStr


def _mres_of(state: Value) -> Resource | None:
    if isinstance(state, VPair) and isinstance(state.snd, VRes):
        return state.snd.res
    return None


@dataclass(frozen=True)
class _Fr:
    module: str
    fn: str
    arg: Value
    held: Resource = EPSILON
    last_return: Value = UNIT
    depth: Depth = INFINITY


@dataclass(frozen=True)
class _Ledger:
    frames: tuple[_Fr, ...]
    sigma: Resource
    w_inflight: Value
    census_at_grt: Resource | None
    pending_depth: Depth
    script_pos: int = 0

    def top(self) -> _Fr:
        return self.frames[-1]

    def with_top(self, fr: _Fr) -> "_Ledger":
        return replace(self, frames=self.frames[:-1] + (fr,))


@dataclass(frozen=True)
class GrtHint:
    """Extra candidate pools for a guarantee's redistribution search,
    realizing frame-preserving updates that exact splitting cannot express
    (the authoritative rewrite, for instance). Receives the argument of
    the function being wrapped and the pool it holds."""

    where: str
    pools: Callable[[Value, Resource], list[Resource]] = field(compare=False)


@dataclass
class ActReport:
    discharged_asm_count: int = 0
    guarantee_failures: list[str] = field(default_factory=list)
    assume_failures: list[str] = field(default_factory=list)
    conservation_violations: list[str] = field(default_factory=list)
    depth_edges: list[tuple[str, Depth, Depth]] = field(default_factory=list)
    depth_violations: list[str] = field(default_factory=list)
    pairing_violations: list[str] = field(default_factory=list)
    traces: TraceSet | None = None
    inclusion: Verdict | None = None

    @property
    def all_asm_discharged(self) -> bool:
        return not self.assume_failures and not self.guarantee_failures

    def to_json(self):
        return {
            "discharged_asm": self.discharged_asm_count,
            "guarantee_failures": self.guarantee_failures,
            "assume_failures": self.assume_failures,
            "conservation_violations": self.conservation_violations,
            "depth_violations": self.depth_violations,
            "pairing_violations": self.pairing_violations,
            "inclusion": None if self.inclusion is None else self.inclusion.to_json(),
        }


def _is_local_grt_failure(res: StepResult, where: str) -> bool:
    return (
        res.kind == "needs-choice"
        and not res.angelic
        and res.domain is not None
        and res.domain.tag in (f"grt-cond:{where}", f"grt-valid:{where}")
        and next(iter(res.domain.enumerate()), None) is None
    )


def _advance_internal(sys: SystemState) -> tuple[StepResult, SystemState]:
    """Step through internal transitions; stop at the next interaction."""
    cur = sys
    while True:
        res = step(cur)
        if res.kind == "continue":
            cur = res.state
            continue
        return res, cur


class ActRunner:
    """Drives a loaded, fully wrapped system under the discharge strategy."""

    def __init__(
        self,
        mods: ModuleSet,
        env: ObsEnv,
        fuel: int,
        sigma_main: Resource,
        w_main: Value,
        conds: dict,
        *,
        grt_hints: Iterable[GrtHint] = (),
        w_hints: dict[str, list[Value]] | None = None,
        apc_script: list[tuple] | None = None,
        xr_candidates: Iterable[Value] = (),
        max_engine_steps: int = 500_000,
    ):
        self.env = env
        self.fuel = fuel
        self.conds = conds
        self.grt_hints = {h.where: h for h in grt_hints}
        self.w_hints = dict(w_hints or {})
        self.apc_script = list(apc_script or [])
        self.xr_candidates = list(xr_candidates)
        self.max_engine_steps = max_engine_steps
        self.report = ActReport()
        self.leaves: list[Trace] = []
        self.sys0 = load(mods)
        main_fr = _Fr(self.sys0.module, self.sys0.program.main, NIL)
        self.ledger0 = _Ledger(
            frames=(main_fr,),
            sigma=sigma_main,
            w_inflight=w_main,
            census_at_grt=None,
            pending_depth=INFINITY,
        )

    # -- resource census ------------------------------------------------------

    def _census(self, sys: SystemState, led: _Ledger) -> Resource:
        total = led.sigma
        for st in sys.module_states.values():
            m = _mres_of(st)
            if m is not None:
                total = add(total, m)
        for fr in led.frames:
            total = add(total, fr.held)
        return total

    def _census_with(
        self, sys: SystemState, led: _Ledger, module: str, mres2: Resource
    ) -> Resource:
        """The census as it will stand once the wrapper writes mres2."""
        total = led.sigma
        for name, st in sys.module_states.items():
            m = _mres_of(st)
            if m is not None:
                total = add(total, mres2 if name == module else m)
        for fr in led.frames:
            total = add(total, fr.held)
        return total

    def _eres_for(self, sys: SystemState, led: _Ledger) -> Resource:
        top = led.top()
        total = EPSILON
        for name, st in sys.module_states.items():
            m = _mres_of(st)
            if m is not None and name != top.module:
                total = add(total, m)
        for fr in led.frames[:-1]:
            total = add(total, fr.held)
        return total

    # -- public ---------------------------------------------------------------

    def run(self) -> ActReport:
        self._go(self.sys0, self.ledger0, (), self.fuel)
        closure: set[Trace] = set(self.leaves)
        for t in self.leaves:
            for k in range(len(t.events) + 1):
                closure.add(Trace(t.events[:k], PARTIAL))
        self.report.traces = TraceSet.make(closure, (), self.fuel, self.env)
        return self.report

    # -- the protocol machine ----------------------------------------------------

    def _go(self, sys: SystemState, led: _Ledger, events: tuple, left: int) -> None:
        budget = self.max_engine_steps
        while True:
            budget -= 1
            if budget <= 0 or left <= 0:
                self.leaves.append(Trace(events, PARTIAL))
                return
            comp = sys.comp
            if isinstance(comp, Trigger) and isinstance(comp.event, Call):
                led = self._observe_call(sys, led, comp.event)
            if isinstance(comp, Done) and sys.stack:
                led = self._observe_return(led, comp.value)
            res = step(sys)
            if res.kind == "terminated":
                assert res.value is not None
                self.leaves.append(Trace(events, TERM, res.value))
                return
            if res.kind == "errored":
                self.leaves.append(Trace(events, ERROR))
                return
            if res.kind == "continue":
                sys = res.state
                continue
            if res.kind == "needs-obs":
                self._check_pairing(sys)
                dom = self.env.response_domain(res.obs_name)
                assert res.obs_arg is not None
                for ans in dom.enumerate():
                    child = step(sys, answer=ans).state
                    ev = (res.obs_name, res.obs_arg, ans)
                    self._go(child, led, events + (ev,), left - 1)
                return
            assert res.kind == "needs-choice" and res.domain is not None
            tag = res.domain.tag
            if res.angelic:
                resolved = self._resolve_take(sys, led, tag)
                if resolved is None:
                    self.report.assume_failures.append(tag or "take-empty")
                    self.leaves.append(Trace(events, PARTIAL))
                    return
                value, led = resolved
                sys = step(sys, answer=value).state
                left -= 1
                continue
            if tag.startswith(("grt-cond:", "grt-valid:", "depth:", "no-spec:")):
                # A guarantee that no earlier greedy choice shields.
                self.report.guarantee_failures.append(tag)
                self.leaves.append(Trace(events, PARTIAL))
                return
            if tag.startswith("grt:"):
                picked = self._resolve_grt(sys, led, tag[len("grt:"):],
                                           res.domain.meta)
                if picked is None:
                    self.report.guarantee_failures.append(tag)
                    self.leaves.append(Trace(events, PARTIAL))
                    return
                sys, led = picked
                left -= 1
                continue
            if tag.startswith("callw:call:"):
                picked, fail_site = self._resolve_callw(
                    sys, led, tag[len("callw:call:"):]
                )
                if picked is None:
                    self.report.guarantee_failures.append(fail_site or tag)
                    self.leaves.append(Trace(events, PARTIAL))
                    return
                sys, led = picked
                left -= 1
                continue
            if tag.startswith("apc-"):
                picked = self._resolve_apc(sys, led, tag)
                if picked is None:
                    self.report.guarantee_failures.append(tag)
                    self.leaves.append(Trace(events, PARTIAL))
                    return
                sys, led = picked
                left -= 1
                continue
            # A body-level demonic choice: every branch must discharge.
            options = list(res.domain.enumerate())
            if not options:
                self.leaves.append(Trace(events, PARTIAL))
                return
            for x in options:
                self._go(step(sys, answer=x).state, led, events, left - 1)
            return

    # -- call/return observation ----------------------------------------------

    def _observe_call(self, sys: SystemState, led: _Ledger, ev: Call) -> _Ledger:
        owner = sys.program.owner.get(ev.fn)
        if owner is None:
            return led
        parent = led.top()
        child = _Fr(owner, ev.fn, ev.arg, depth=led.pending_depth)
        if led.pending_depth.is_pure:
            self.report.depth_edges.append((ev.fn, parent.depth, led.pending_depth))
            if not (led.pending_depth < parent.depth):
                self.report.depth_violations.append(
                    f"{ev.fn}: {led.pending_depth} not below {parent.depth}"
                )
        return replace(led, frames=led.frames + (child,), pending_depth=INFINITY)

    def _observe_return(self, led: _Ledger, value: Value) -> _Ledger:
        frames = led.frames[:-1]
        parent = replace(frames[-1], last_return=value)
        return replace(led, frames=frames[:-1] + (parent,))

    def _check_pairing(self, sys: SystemState) -> None:
        if _mres_of(sys.module_states[sys.module]) is None:
            self.report.pairing_violations.append(
                f"state of {sys.module} lost its resource pairing"
            )

    # -- take resolution (the cancellation strategy) -----------------------------

    def _resolve_take(
        self, sys: SystemState, led: _Ledger, tag: str
    ) -> tuple[Value, _Ledger] | None:
        if tag.startswith("w:"):
            return led.w_inflight, led
        if tag.startswith("asm:"):
            where = tag[len("asm:"):]
            top = led.top()
            xa = top.last_return if where.startswith("call:") else top.arg
            eres = self._eres_for(sys, led)
            sigma = led.sigma
            packed = VList((xa, VRes(eres), VRes(sigma)))
            census = self._census(sys, led)
            if led.census_at_grt is not None and census != led.census_at_grt:
                self.report.conservation_violations.append(
                    f"{tag}: census changed across the handoff "
                    f"({led.census_at_grt} -> {census})"
                )
            if not valid(census):
                self.report.conservation_violations.append(
                    f"{tag}: census {census} is invalid"
                )
            self.report.discharged_asm_count += 1
            led = led.with_top(replace(top, held=add(top.held, sigma)))
            return packed, replace(led, sigma=EPSILON)
        if tag.startswith(("asm-cond:", "asm-valid:", "downcast:")):
            return None
        # A body-level angelic choice: follow one canonical instance.
        if led.script_pos < len(self.apc_script):
            entry = self.apc_script[led.script_pos]
            if entry[0] == "take":
                return entry[1], self._script_next(led)
        raise CcrError(f"cancellation replay met an unexpected take {tag!r}")

    # -- guarantee resolution (canonical greedy commits) ---------------------------

    def _resolve_grt(
        self, sys: SystemState, led: _Ledger, where: str, meta: tuple = ()
    ) -> tuple[SystemState, _Ledger] | None:
        """Pick the first candidate whose guarantees pass; commit it."""
        for value, led2 in self._grt_candidates(sys, led, where, meta):
            after = step(sys, answer=value).state
            res, _probe = _advance_internal(after)
            if _is_local_grt_failure(res, where):
                continue
            return after, led2
        return None

    def _resolve_callw(
        self, sys: SystemState, led: _Ledger, fn: str
    ) -> tuple[tuple[SystemState, _Ledger] | None, str | None]:
        """Choose the callee's auxiliary variable: try hinted (then
        enumerated) values; accept one whose depth guarantee and pre-call
        guarantee both pass. Returns the committed state or the site that
        blocked every option."""
        hinted = self.w_hints.get(fn)
        if hinted is not None:
            options = list(hinted)
        else:
            cond = self.conds.get(fn)
            if cond is None or not cond.w_domain.is_enumerable:
                return None, None
            options = list(cond.w_domain.enumerate())
        fail_site: str | None = None
        for w in options:
            led_w = replace(led, w_inflight=w)
            after = step(sys, answer=w).state
            res, probe = _advance_internal(after)
            if (
                res.kind == "needs-choice"
                and not res.angelic
                and res.domain is not None
                and res.domain.tag == f"depth:call:{fn}"
                and next(iter(res.domain.enumerate()), None) is None
            ):
                fail_site = fail_site or res.domain.tag
                continue
            if (
                res.kind == "needs-choice"
                and not res.angelic
                and res.domain is not None
                and res.domain.tag == f"grt:call:{fn}.pre"
            ):
                picked = self._resolve_grt(probe, led_w, f"call:{fn}.pre",
                                           res.domain.meta)
                if picked is None:
                    fail_site = f"grt:call:{fn}.pre"
                    continue
                return picked, None
            return (after, led_w), None
        return None, fail_site

    def _resolve_apc(
        self, sys: SystemState, led: _Ledger, tag: str
    ) -> tuple[SystemState, _Ledger] | None:
        entry = None
        if led.script_pos < len(self.apc_script):
            entry = self.apc_script[led.script_pos]
        if tag == "apc-budget":
            if entry is not None and entry[0] == "apc":
                value, led = ordinal_value(entry[1]), self._script_next(led)
            else:
                value = ordinal_value(Ordinal())
            return step(sys, answer=value).state, led
        if tag == "apc-again":
            value = TRUE if entry is not None and entry[0] == "call" else FALSE
            return step(sys, answer=value).state, led
        if tag == "apc-call":
            if entry is None or entry[0] != "call":
                return None
            _, fn, xa, depth = entry
            led = replace(self._script_next(led), pending_depth=depth)
            from .spc import depth_value
            value = VList((VStr(fn), xa, depth_value(depth)))
            return step(sys, answer=value).state, led
        if tag == "apc-i":
            if entry is not None and entry[0] == "i":
                value, led = ordinal_value(entry[1]), self._script_next(led)
            else:
                value = ordinal_value(Ordinal())
            return step(sys, answer=value).state, led
        if tag == "apc-ret":
            if entry is not None and entry[0] == "ret":
                return step(sys, answer=entry[1]).state, self._script_next(led)
            top = led.top()
            for v in dict.fromkeys([top.last_return] + self.xr_candidates):
                after = step(sys, answer=v).state
                res, _probe = _advance_internal(after)
                if res.kind == "needs-choice" and not res.angelic and \
                        res.domain is not None and \
                        res.domain.tag.startswith("grt:") :
                    return after, led
                if not _is_empty_choice(res):
                    return after, led
            return None
        raise CcrError(f"cancellation replay met an unexpected choose {tag!r}")

    def _script_next(self, led: _Ledger) -> _Ledger:
        return replace(led, script_pos=led.script_pos + 1)

    # -- guarantee candidates -------------------------------------------------

    def _grt_candidates(self, sys: SystemState, led: _Ledger, where: str,
                        meta: tuple = ()):
        """Candidate (value, ledger) pairs, canonical order: exact
        redistributions of the held pool first, hinted rewrites after;
        within a pool, smaller call resources first and empty frame
        leftovers preferred, so resources stay at home unless the
        condition demands them. The wrapper advertises the abstract value
        the condition relates, so it leads the concrete-value candidates
        (conditions usually force them equal)."""
        top = led.top()
        mres = _mres_of(sys.module_states[top.module]) or EPSILON
        pool = add(add(mres, top.held), led.sigma)
        pools = [pool]
        hint = self.grt_hints.get(where) or self.grt_hints.get(top.fn + ".post")
        if hint is not None:
            pools += hint.pools(top.arg, pool)
        xrs = list(dict.fromkeys(
            list(meta) + [top.last_return, top.arg] + self.xr_candidates
        ))
        for p in pools:
            triples = []
            for rest, sigma2 in splits(p):
                for mres2, lres2 in splits(rest):
                    triples.append((mres2, lres2, sigma2))
            triples = list(dict.fromkeys(triples))
            triples.sort(key=_candidate_rank)
            for mres2, lres2, sigma2 in triples:
                new_led = led.with_top(replace(top, held=lres2))
                new_led = replace(new_led, sigma=sigma2)
                new_led = replace(
                    new_led,
                    census_at_grt=self._census_with(sys, new_led, top.module, mres2),
                )
                for xr in xrs:
                    yield VList((xr, VRes(mres2), VRes(lres2), VRes(sigma2))), new_led


def _weight(r: Resource) -> int:
    if r.invalid:
        return 1_000_000
    total = 0
    for _s, e in r.slots:
        total += 1 + (len(e) if isinstance(e, tuple) else 0)
    return total


def _candidate_rank(triple: tuple[Resource, Resource, Resource]):
    mres2, lres2, sigma2 = triple
    return (_weight(sigma2), _weight(lres2), -_weight(mres2))


def _is_empty_choice(res: StepResult) -> bool:
    return (
        res.kind == "needs-choice"
        and res.domain is not None
        and next(iter(res.domain.enumerate()), None) is None
    )
