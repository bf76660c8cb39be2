"""Per-function resource conditions and the wrapper translation.

A condition gives an auxiliary-variable domain W, a depth measure D, and
pre/post predicates P/Q over (concrete value, abstract value, call
resource). Wrapping a pre-abstraction with conditions generates, for each
function, the assume/guarantee protocol code:

    take w; assume the precondition against a taken call resource and a
    taken external resource; run the body (calls bracketed by the callee's
    condition, abstract pure calls expanded to bounded arbitrary pure
    calls, state access redirected through the paired module state) or,
    for pure invocations, only abstract pure calls; finally guarantee the
    postcondition with chosen replacement resources.

Assumption failures are undefined behavior (the caller's fault), failed
guarantees are no behavior (the wrapped module refuses). The cancellation
replay resolves every take from the matching guarantee and checks that
the whole wrapped system runs with no guarantee failing, conserving the
global resource census across every handoff.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator

from . import pcm
from .behavior import (
    ERROR,
    PARTIAL,
    TERM,
    ObsEnv,
    Trace,
    TraceSet,
    Verdict,
    bounded_beh,
    check_inclusion,
)
from .engine import Frame, SystemState, load, step
from .errors import (
    CcrError,
    DomainMismatch,
    GlobalInvalidity,
    PreconditionUnsatisfied,
)
from .events import (
    Apc,
    Call,
    Choose,
    ChoiceDomain,
    Computation,
    Done,
    Event,
    Get,
    Obs,
    Put,
    Silent,
    Take,
    Trigger,
    assume,
    from_generator,
    guarantee,
    ordinal_value,
    trigger,
    value_ordinal,
)
from .modules import FunctionDef, Module, ModuleSet, link_all
from .ordinals import INFINITY, Depth, Ordinal
from .pcm import (
    EPSILON,
    Resource,
    RProp,
    add,
    add_all,
    eval_rprop,
    valid,
)
from .values import NIL, UNIT, Value, VBool, VList, VOpaque, VPair, VRes, VStr


# --- conditions ---------------------------------------------------------------

@dataclass(frozen=True)
class Cond:
    """One function's specification: (W, D, P, Q)."""

    w_domain: ChoiceDomain
    depth: Callable[[Value], Depth] = field(compare=False)
    pre: Callable[[Value, Value, Value], RProp] = field(compare=False)
    post: Callable[[Value, Value, Value], RProp] = field(compare=False)
    label: str = ""


Conds = dict[str, Cond]

UNIT_W = ChoiceDomain.explicit((UNIT,), tag="w:unit")


def simple_cond(
    pre: Callable[[Value], RProp],
    post: Callable[[Value], RProp],
    depth: Depth = INFINITY,
    w_domain: ChoiceDomain = UNIT_W,
    depth_of: Callable[[Value], Depth] | None = None,
    label: str = "",
) -> Cond:
    """The common shorthand: abstract values forced equal to concrete ones,
    P/Q depending on the argument/return value and the call resource."""

    def mk(cond_of: Callable[[Value], RProp]):
        def p(w: Value, x: Value, x_a: Value) -> RProp:
            if x != x_a:
                return pcm.FALSE_P
            return cond_of(x)
        return p

    d = depth_of if depth_of is not None else (lambda w: depth)
    return Cond(w_domain, d, mk(pre), mk(post), label=label)


def cond_with_w(
    w_domain: ChoiceDomain,
    depth_of: Callable[[Value], Depth],
    pre: Callable[[Value, Value], RProp],
    post: Callable[[Value, Value], RProp],
    label: str = "",
) -> Cond:
    """Value-equality shorthand with an auxiliary variable: P/Q get (w, x)."""

    def p(w: Value, x: Value, x_a: Value) -> RProp:
        if x != x_a:
            return pcm.FALSE_P
        return pre(w, x)

    def q(w: Value, r: Value, r_a: Value) -> RProp:
        if r != r_a:
            return pcm.FALSE_P
        return post(w, r)

    return Cond(w_domain, depth_of, p, q, label=label)


# --- pre-abstractions and erasure ----------------------------------------------

@dataclass(frozen=True)
class PreAbstraction:
    """A module whose bodies may trigger abstract pure calls, plus the
    module's initial resource."""

    name: str
    init: Value = UNIT
    funs: dict[str, Callable[[Value], Computation]] = field(default_factory=dict)
    initial_resource: Resource = EPSILON

    def __post_init__(self):
        object.__setattr__(self, "funs", dict(self.funs))


def _erase_comp(comp: Computation) -> Computation:
    if isinstance(comp, Done):
        return comp
    if isinstance(comp, Silent):
        return Silent(lambda: _erase_comp(comp.next))
    assert isinstance(comp, Trigger)
    if isinstance(comp.event, Apc):
        return Silent(lambda: _erase_comp(comp.resume(UNIT)))
    return Trigger(comp.event, lambda a: _erase_comp(comp.resume(a)))


def erase(a: PreAbstraction) -> Module:
    """Strip abstract pure calls: the plain abstraction module."""
    funs = {
        name: FunctionDef(lambda x, _b=body: _erase_comp(_b(x)))
        for name, body in a.funs.items()
    }
    return Module(a.name, a.init, funs)


def erase_all(pre_abs: Iterable[PreAbstraction]) -> ModuleSet:
    return ModuleSet.of(*(erase(a) for a in pre_abs))


# --- checking modes -------------------------------------------------------------

def depth_value(d: Depth) -> Value:
    if d.ordinal is None:
        return VOpaque("depth", VStr("inf"))
    return VOpaque("depth", ordinal_value(d.ordinal))


def value_depth(v: Value) -> Depth:
    assert isinstance(v, VOpaque) and v.tag == "depth"
    if isinstance(v.payload, VStr):
        return INFINITY
    return Depth.pure(value_ordinal(v.payload))


@dataclass(frozen=True)
class CheckDomains:
    """Finite universes for the wrapper's take/choose domains.

    In exhaustive mode every domain enumerates over these universes; in
    replay mode the domains are left unbounded (tagged) and resolved by
    the cancellation strategy, so no enumeration happens.
    """

    mode: str = "exhaustive"  # or "act"
    values: tuple[Value, ...] = (UNIT, NIL)
    resources: tuple[Resource, ...] = (EPSILON,)
    depths: tuple[Depth, ...] = (INFINITY,)
    fn_names: tuple[str, ...] = ()
    apc_budget: Ordinal = Ordinal(0, 1, 8)
    apc_coeff_cap: int = 8

    def _res_values(self) -> tuple[Value, ...]:
        return tuple(VRes(r) for r in self.resources)

    def w_take_domain(self, cond: Cond, where: str) -> ChoiceDomain:
        if self.mode == "act":
            return ChoiceDomain.unbounded(f"w:{where}")
        return replace(cond.w_domain, tag=f"w:{where}")

    def asm_domain(self, where: str) -> ChoiceDomain:
        if self.mode == "act":
            return ChoiceDomain.unbounded(f"asm:{where}")
        res = ChoiceDomain.explicit(self._res_values())
        return ChoiceDomain.product(
            (ChoiceDomain.explicit(self.values), res, res), tag=f"asm:{where}"
        )

    def grt_domain(self, where: str, abstract: Value) -> ChoiceDomain:
        if self.mode == "act":
            return replace(
                ChoiceDomain.unbounded(f"grt:{where}"), meta=(abstract,)
            )
        res = ChoiceDomain.explicit(self._res_values())
        return ChoiceDomain.product(
            (ChoiceDomain.explicit(self.values), res, res, res), tag=f"grt:{where}"
        )

    def w_choose_domain(self, cond: Cond, where: str) -> ChoiceDomain:
        if self.mode == "act":
            return ChoiceDomain.unbounded(f"callw:{where}")
        return replace(cond.w_domain, tag=f"callw:{where}")

    def apc_budget_domain(self) -> ChoiceDomain:
        if self.mode == "act":
            return ChoiceDomain.unbounded("apc-budget")
        return ChoiceDomain.ordinals_below(
            self.apc_budget, self.apc_coeff_cap, tag="apc-budget"
        )

    def apc_step_domain(self, budget: Ordinal) -> ChoiceDomain:
        if self.mode == "act":
            return ChoiceDomain.unbounded("apc-i")
        return ChoiceDomain.ordinals_below(budget, self.apc_coeff_cap, tag="apc-i")

    def apc_again_domain(self) -> ChoiceDomain:
        if self.mode == "act":
            return ChoiceDomain.unbounded("apc-again")
        return ChoiceDomain.booleans(tag="apc-again")

    def apc_call_domain(self) -> ChoiceDomain:
        if self.mode == "act":
            return ChoiceDomain.unbounded("apc-call")
        return ChoiceDomain.product(
            (
                ChoiceDomain.explicit(tuple(VStr(n) for n in self.fn_names)),
                ChoiceDomain.explicit(self.values),
                ChoiceDomain.explicit(tuple(depth_value(d) for d in self.depths)),
            ),
            tag="apc-call",
        )

    def apc_ret_domain(self) -> ChoiceDomain:
        if self.mode == "act":
            return ChoiceDomain.unbounded("apc-ret")
        return ChoiceDomain.explicit(self.values, tag="apc-ret")


ACT_MODE = CheckDomains(mode="act")


# --- the wrapper protocol --------------------------------------------------------

CondPred = Callable[[Value, Value, Resource], bool]


def pred_of(cond_part: Callable[[Value, Value, Value], RProp], w: Value) -> CondPred:
    def p(x: Value, x_a: Value, sigma: Resource) -> bool:
        return eval_rprop(cond_part(w, x, x_a), sigma)
    return p


def _mres_of_state(st: Value) -> Resource | None:
    if isinstance(st, VPair) and isinstance(st.snd, VRes):
        return st.snd.res
    return None


def asm(cond: CondPred, xr: Value, lres: Resource, mode: CheckDomains,
        where: str = "") -> Computation:
    """Receive: take the abstract value, external resource, and call
    resource; then assume the condition and global consistency."""

    def gen():
        packed = yield Take(mode.asm_domain(where))
        assert isinstance(packed, VList) and len(packed.items) == 3
        xa, eres_v, sig_v = packed.items
        assert isinstance(eres_v, VRes) and isinstance(sig_v, VRes)
        eres, sigma = eres_v.res, sig_v.res
        st = yield Get()
        mres = _mres_of_state(st)
        if mres is None:
            yield Take(ChoiceDomain.explicit((), tag=f"downcast:{where}"))
            return UNIT
        yield assume(cond(xr, xa, sigma), tag=f"asm-cond:{where}")
        total = add(add(mres, lres), add(eres, sigma))
        yield assume(valid(total), tag=f"asm-valid:{where}")
        return VPair(xa, VRes(eres))

    return from_generator(gen)


def grt(cond: CondPred, xr_a: Value, eres: Resource, mode: CheckDomains,
        where: str = "") -> Computation:
    """Send: choose the concrete value, replacement module and local
    resources, and the call resource; then guarantee the condition and
    global consistency."""

    def gen():
        packed = yield Choose(mode.grt_domain(where, xr_a))
        assert isinstance(packed, VList) and len(packed.items) == 4
        xr, mres_v, lres_v, sig_v = packed.items
        assert isinstance(mres_v, VRes) and isinstance(lres_v, VRes)
        assert isinstance(sig_v, VRes)
        mres, lres, sigma = mres_v.res, lres_v.res, sig_v.res
        st = yield Get()
        if not isinstance(st, VPair):
            yield Take(ChoiceDomain.explicit((), tag=f"downcast:{where}"))
            return UNIT
        yield Put(VPair(st.fst, VRes(mres)))
        yield guarantee(cond(xr, xr_a, sigma), tag=f"grt-cond:{where}")
        total = add(add(mres, lres), add(eres, sigma))
        yield guarantee(valid(total), tag=f"grt-valid:{where}")
        return VPair(xr, VRes(lres))

    return from_generator(gen)


def call_def(s: Cond | None, d: Depth, eres: Resource, fn: str, x_a: Value,
             mode: CheckDomains) -> Computation:
    """A call bracketed by the callee's condition; unknown callees refuse."""

    def gen():
        if s is None:
            yield guarantee(False, tag=f"no-spec:{fn}")
            return UNIT
        w = yield Choose(mode.w_choose_domain(s, f"call:{fn}"))
        yield guarantee(s.depth(w) <= d, tag=f"depth:call:{fn}")
        pair = yield grt(pred_of(s.pre, w), x_a, eres, mode, where=f"call:{fn}.pre")
        assert isinstance(pair, VPair) and isinstance(pair.snd, VRes)
        x, lres = pair.fst, pair.snd.res
        r = yield Call(fn, x)
        pair2 = yield asm(pred_of(s.post, w), r, lres, mode, where=f"call:{fn}.post")
        assert isinstance(pair2, VPair) and isinstance(pair2.snd, VRes)
        return VPair(pair2.fst, pair2.snd)

    return from_generator(gen)


def apc_def(s_in: Conds, d: Depth, eres: Resource, mode: CheckDomains) -> Computation:
    """A bounded sequence of arbitrary pure calls at strictly smaller depths."""

    def gen():
        budget_v = yield Choose(mode.apc_budget_domain())
        budget = value_ordinal(budget_v)
        frm = eres
        while True:
            again = yield Choose(mode.apc_again_domain())
            if not (isinstance(again, VBool) and again.b):
                ret = yield Choose(mode.apc_ret_domain())
                return VPair(ret, VRes(frm))
            call_v = yield Choose(mode.apc_call_domain())
            assert isinstance(call_v, VList) and len(call_v.items) == 3
            fn_v, xa, d_v = call_v.items
            assert isinstance(fn_v, VStr)
            d2 = value_depth(d_v)
            yield guarantee(d2 < d, tag=f"depth:apc:{fn_v.s}")
            out = yield call_def(s_in.get(fn_v.s), d2, frm, fn_v.s, xa, mode)
            if isinstance(out, VPair) and isinstance(out.snd, VRes):
                frm = out.snd.res
            smaller = yield Choose(mode.apc_step_domain(budget))
            budget = value_ordinal(smaller)

    return from_generator(gen)


def _interp_body(s_in: Conds, body: Computation, eres: Resource,
                 mode: CheckDomains) -> Computation:
    """Interpret a pre-abstraction body per the wrapper translation: calls
    via call_def, abstract pure calls via apc_def, state access through
    the paired module state; the external resource threads through."""

    def gen():
        frm = eres
        cur = body
        while True:
            if isinstance(cur, Done):
                return VPair(cur.value, VRes(frm))
            if isinstance(cur, Silent):
                cur = cur.next
                continue
            assert isinstance(cur, Trigger)
            ev = cur.event
            if isinstance(ev, Call):
                out = yield call_def(s_in.get(ev.fn), INFINITY, frm, ev.fn,
                                     ev.arg, mode)
                assert isinstance(out, VPair) and isinstance(out.snd, VRes)
                frm = out.snd.res
                cur = cur.resume(out.fst)
            elif isinstance(ev, Apc):
                out = yield apc_def(s_in, INFINITY, frm, mode)
                assert isinstance(out, VPair) and isinstance(out.snd, VRes)
                frm = out.snd.res
                cur = cur.resume(UNIT)
            elif isinstance(ev, Put):
                st = yield Get()
                if not isinstance(st, VPair):
                    yield Take(ChoiceDomain.explicit((), tag="downcast:put"))
                    return UNIT
                yield Put(VPair(ev.state, st.snd))
                cur = cur.resume(UNIT)
            elif isinstance(ev, Get):
                st = yield Get()
                if not isinstance(st, VPair):
                    yield Take(ChoiceDomain.explicit((), tag="downcast:get"))
                    return UNIT
                cur = cur.resume(st.fst)
            else:
                ans = yield ev
                cur = cur.resume(ans)

    return from_generator(gen)


def fun_def(s_in: Conds, cond: Cond, body: Callable[[Value], Computation],
            mode: CheckDomains, fname: str) -> Callable[[Value], Computation]:
    def wrapped(x: Value) -> Computation:
        def gen():
            w = yield Take(mode.w_take_domain(cond, fname))
            pair = yield asm(pred_of(cond.pre, w), x, EPSILON, mode,
                             where=f"{fname}.pre")
            assert isinstance(pair, VPair) and isinstance(pair.snd, VRes)
            x_a, eres = pair.fst, pair.snd.res
            d = cond.depth(w)
            if d.is_pure:
                out = yield apc_def(s_in, d, eres, mode)
            else:
                out = yield _interp_body(s_in, body(x_a), eres, mode)
            assert isinstance(out, VPair) and isinstance(out.snd, VRes)
            r_a, eres2 = out.fst, out.snd.res
            rpair = yield grt(pred_of(cond.post, w), r_a, eres2, mode,
                              where=f"{fname}.post")
            assert isinstance(rpair, VPair)
            return rpair.fst
        return from_generator(gen)
    return wrapped


def wrap_module(s_in: Conds, a: PreAbstraction, s_out: Conds,
                mode: CheckDomains) -> Module:
    """The conditional abstraction: every function of the pre-abstraction
    bracketed by its output condition, module state paired with the
    module resource."""
    if set(a.funs) != set(s_out):
        raise DomainMismatch(set(s_out) - set(a.funs), set(a.funs) - set(s_out))
    funs = {
        name: FunctionDef(fun_def(s_in, s_out[name], body, mode, name))
        for name, body in a.funs.items()
    }
    return Module(a.name, VPair(a.init, VRes(a.initial_resource)), funs)


# --- safe pre-abstractions ---------------------------------------------------

def mk_safe(ns_in: Iterable[str], ns_out: Iterable[str],
            mode: CheckDomains) -> PreAbstraction:
    """Functions that nondeterministically invoke arbitrary known functions
    any number of times, then return an arbitrary value."""
    ns_in = tuple(ns_in)
    call_domain = ChoiceDomain.product(
        (
            ChoiceDomain.explicit(tuple(VStr(n) for n in ns_in)),
            ChoiceDomain.explicit(mode.values),
        ),
        tag="safe-call",
    ) if ns_in else None

    def body(_arg: Value):
        def gen():
            while True:
                again = yield Choose(ChoiceDomain.booleans(tag="safe-again"))
                if not (isinstance(again, VBool) and again.b) or call_domain is None:
                    break
                packed = yield Choose(call_domain)
                assert isinstance(packed, VList) and len(packed.items) == 2
                fn_v, arg = packed.items
                assert isinstance(fn_v, VStr)
                yield Call(fn_v.s, arg)
            ret = yield Choose(ChoiceDomain.explicit(mode.values, tag="safe-ret"))
            return ret
        return from_generator(gen)

    name = "Safe"
    for n in ns_out:
        name = n.split(".", 1)[0]
        break
    return PreAbstraction(name, UNIT, {n: body for n in ns_out}, EPSILON)


# --- spec ordering ------------------------------------------------------------

@dataclass(frozen=True)
class StrengtheningWitness:
    """Registered evidence that one condition implements another: a mapping
    of auxiliary variables under which depths do not grow, preconditions
    entail, and postconditions entail back, validated on samples."""

    fn: str
    map_w: Callable[[Value], Value] = field(compare=False)
    samples: tuple[tuple[Value, Value, Resource], ...] = ()


def conds_leq(s0: Conds, s1: Conds,
              witnesses: Iterable[StrengtheningWitness] = ()) -> bool:
    """Simple-inclusion ordering: s1 provides everything s0 expects.

    Shared names must carry structurally identical conditions or a
    registered witness whose entailments hold on its samples.
    """
    by_fn = {w.fn: w for w in witnesses}
    for fn, c0 in s0.items():
        c1 = s1.get(fn)
        if c1 is None:
            return False
        if c0 is c1 or c0 == c1:
            continue
        w = by_fn.get(fn)
        if w is None:
            return False
        if not _witness_ok(c0, c1, w):
            return False
    return True


def _witness_ok(c0: Cond, c1: Cond, w: StrengtheningWitness) -> bool:
    if not c0.w_domain.is_enumerable:
        return False
    for w0 in c0.w_domain.enumerate():
        w1 = w.map_w(w0)
        if not (c1.depth(w1) <= c0.depth(w0)):
            return False
        for x, xa, sigma in w.samples:
            if eval_rprop(c0.pre(w0, x, xa), sigma) and not eval_rprop(
                c1.pre(w1, x, xa), sigma
            ):
                return False
            if eval_rprop(c1.post(w1, x, xa), sigma) and not eval_rprop(
                c0.post(w0, x, xa), sigma
            ):
                return False
    return True


# --- assumption cancellation -------------------------------------------------

def act_check(
    wrapped: list[tuple[PreAbstraction, Conds, Resource]],
    s: Conds,
    sigma_main: Resource,
    fuel: int,
    env: ObsEnv,
    *,
    witnesses: Iterable["StrengtheningWitness"] = (),
    w_main: Value = UNIT,
    values: tuple[Value, ...] = (UNIT, NIL),
    grt_hints: Iterable["GrtHint"] = (),
    w_hints: dict[str, list[Value]] | None = None,
    apc_script: list[tuple] | None = None,
    max_engine_steps: int = 500_000,
) -> "ActReport":
    """Replay the cancellation argument on the linked wrapped system and
    check the collected observations against the erased abstractions."""
    from .act import ActRunner

    union_out: Conds = {}
    for _a, s_out, _sig in wrapped:
        union_out.update(s_out)
    if not conds_leq(s, union_out, witnesses):
        raise CcrError(
            "input conditions are not provided by the wrapped modules"
        )
    sigmas = [sig for _a, _s, sig in wrapped]
    total = add_all([sigma_main, *sigmas])
    if not valid(total):
        raise GlobalInvalidity(f"sum {total} of initial resources")
    mains = [n for n in union_out if n == "main" or n.endswith(".main")]
    if len(mains) != 1:
        raise CcrError("wrapped system must define exactly one main")
    main_cond = union_out[mains[0]]
    if not eval_rprop(main_cond.pre(w_main, NIL, NIL), sigma_main):
        raise PreconditionUnsatisfied(str(sigma_main))

    mode = CheckDomains(mode="act", values=values)
    modules = [
        wrap_module(s, replace(a, initial_resource=sig), s_out, mode)
        for a, s_out, sig in wrapped
    ]
    mods = ModuleSet.of(*modules)
    runner = ActRunner(
        mods,
        env,
        fuel,
        sigma_main,
        w_main,
        s,
        grt_hints=grt_hints,
        w_hints=w_hints,
        apc_script=apc_script,
        xr_candidates=values,
        max_engine_steps=max_engine_steps,
    )
    report = runner.run()
    erased = erase_all(a for a, _s, _sig in wrapped)
    assert report.traces is not None
    report.inclusion = check_inclusion(report.traces, bounded_beh(erased, fuel, env))
    return report


# --- declarative condition tables ------------------------------------------------

def conds_from_json(obj: dict) -> Conds:
    """Load simple condition tables from their JSON form.

    Supported predicate forms: true/false, own (call resource includes a
    resource literal), arg-eq / ret-eq against value literals, and / or /
    sep combinations. Abstract values are forced equal to concrete ones,
    per the usual shorthand. Depth expressions are "inf" or ordinal text.
    """
    from .behavior import domain_from_json
    from .values import from_json as value_from_json

    out: Conds = {}
    for fn, desc in obj.items():
        w_dom = (
            domain_from_json(desc["w"]) if "w" in desc else UNIT_W
        )
        depth = Depth.from_json(desc.get("depth", "inf"))
        pre = _cexpr(desc.get("pre", {"op": "true"}))
        post = _cexpr(desc.get("post", {"op": "true"}))
        out[fn] = simple_cond(pre, post, depth=depth, w_domain=w_dom, label=fn)
    return out


def _cexpr(ast: dict) -> Callable[[Value], RProp]:
    from .values import from_json as value_from_json

    op = ast["op"]
    if op == "true":
        return lambda x: pcm.TRUE_P
    if op == "false":
        return lambda x: pcm.FALSE_P
    if op == "own":
        res = Resource.from_json(ast["res"])
        return lambda x: pcm.own(res)
    if op in ("arg-eq", "ret-eq"):
        lit = value_from_json(ast["value"])
        return lambda x: pcm.pure(x == lit, label=op)
    if op in ("and", "or", "sep"):
        parts = [_cexpr(p) for p in ast["args"]]
        combine = {"and": RProp.__and__, "or": RProp.__or__, "sep": pcm.sep}[op]
        def built(x: Value) -> RProp:
            acc = parts[0](x)
            for p in parts[1:]:
                acc = combine(acc, p(x))
            return acc
        return built
    raise ValueError(f"unknown condition expression {op!r}")
