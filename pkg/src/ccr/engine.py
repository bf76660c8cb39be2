"""The closed-system loader and single-step execution engine.

Loading installs every module's initial state, checks global uniqueness of
function names, and positions the system to call main with an empty
argument list. Stepping resolves Call/Get/Put internally; Choose, Take,
and Obs surface to the caller (or to a resolver in ``run``).

States are immutable values: stepping returns fresh states, so exploration
can branch freely.
"""

from __future__ import annotations

import random
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Callable

from .errors import DuplicateNameError, NoMainError, ResolverExhausted, UnresolvableDomain
from .events import (
    Apc,
    Call,
    Choose,
    ChoiceDomain,
    Computation,
    Done,
    Get,
    Obs,
    Put,
    Silent,
    Take,
    Trigger,
)
from .modules import FunctionDef, Module, ModuleSet
from .values import NIL, UNIT, Value

# Test instrumentation: callbacks receive (kind, executing_module, detail).
_hooks: list[Callable[[str, str, object], None]] = []


@contextmanager
def instrument(hook: Callable[[str, str, object], None]):
    _hooks.append(hook)
    try:
        yield
    finally:
        _hooks.remove(hook)


def _emit(kind: str, module: str, detail: object) -> None:
    for h in _hooks:
        h(kind, module, detail)


@dataclass(frozen=True)
class Program:
    """The static part of a loaded system: dispatch tables."""

    modules: tuple[Module, ...]
    owner: dict[str, str]            # function name -> module name
    funs: dict[str, FunctionDef]     # function name -> definition
    main: str                        # the entry function's full name


@dataclass(frozen=True)
class Frame:
    module: str
    resume: Callable[[Value], Computation]


@dataclass(frozen=True)
class SystemState:
    program: Program
    module_states: dict[str, Value]
    stack: tuple[Frame, ...]
    module: str                      # module owning the running computation
    comp: Computation
    steps: int = 0

    def state_of(self, module: str) -> Value:
        return self.module_states[module]

    def key(self):
        """Hashable identity for memoized exploration.

        Computations and resume closures hash by object identity; resume
        caching in Trigger keeps those identities stable along shared
        paths, and holding the objects in memo keys keeps ids from being
        recycled.
        """
        states = sorted(self.module_states.items(), key=lambda kv: kv[0])
        return (self.comp, tuple(f.resume for f in self.stack), tuple(states))


def load(mods: ModuleSet) -> SystemState:
    owner: dict[str, str] = {}
    funs: dict[str, FunctionDef] = {}
    for m in mods:
        for name, fd in m.funs.items():
            if name in funs:
                raise DuplicateNameError(name)
            owner[name] = m.name
            funs[name] = fd
    mains = [n for n in funs if n == "main" or n.endswith(".main")]
    if not mains:
        raise NoMainError()
    if len(mains) > 1:
        raise DuplicateNameError("main")
    main = mains[0]
    states = {m.name: m.init for m in mods}
    return SystemState(
        program=Program(tuple(mods.modules), owner, funs, main),
        module_states=states,
        stack=(),
        module=owner[main],
        comp=funs[main](NIL),
    )


# --- step results -----------------------------------------------------------

@dataclass(frozen=True)
class StepResult:
    kind: str                        # terminated/errored/continue/needs-choice/needs-obs
    state: SystemState
    value: Value | None = None       # terminated
    reason: str = ""                 # errored
    domain: ChoiceDomain | None = None
    angelic: bool = False
    obs_name: str = ""
    obs_arg: Value | None = None


def step(sys: SystemState, answer: Value | None = None) -> StepResult:
    """Advance by one step.

    ``answer`` must be supplied iff the previous result needed an external
    choice or observation answer; it resumes the pending trigger.
    """
    comp = sys.comp
    if answer is not None:
        assert isinstance(comp, Trigger)
        nxt = replace(sys, comp=comp.resume(answer), steps=sys.steps + 1)
        return StepResult("continue", nxt)

    if isinstance(comp, Done):
        if not sys.stack:
            return StepResult("terminated", sys, value=comp.value)
        frame = sys.stack[-1]
        nxt = replace(
            sys,
            stack=sys.stack[:-1],
            module=frame.module,
            comp=frame.resume(comp.value),
            steps=sys.steps + 1,
        )
        return StepResult("continue", nxt)

    if isinstance(comp, Silent):
        return StepResult("continue", replace(sys, comp=comp.next, steps=sys.steps + 1))

    assert isinstance(comp, Trigger)
    ev = comp.event
    if isinstance(ev, Call):
        target = sys.program.funs.get(ev.fn)
        if target is None:
            return StepResult("errored", sys, reason=f"unknown function {ev.fn!r}")
        frame = Frame(sys.module, comp.resume)
        nxt = replace(
            sys,
            stack=sys.stack + (frame,),
            module=sys.program.owner[ev.fn],
            comp=target(ev.arg),
            steps=sys.steps + 1,
        )
        _emit("call", sys.module, ev.fn)
        return StepResult("continue", nxt)
    if isinstance(ev, Get):
        _emit("get", sys.module, sys.module)
        got = sys.module_states[sys.module]
        return StepResult("continue", replace(sys, comp=comp.resume(got), steps=sys.steps + 1))
    if isinstance(ev, Put):
        _emit("put", sys.module, sys.module)
        states = dict(sys.module_states)
        states[sys.module] = ev.state
        nxt = replace(sys, module_states=states, comp=comp.resume(UNIT), steps=sys.steps + 1)
        return StepResult("continue", nxt)
    if isinstance(ev, Obs):
        _emit("obs", sys.module, ev.name)
        return StepResult("needs-obs", sys, obs_name=ev.name, obs_arg=ev.arg)
    if isinstance(ev, Choose):
        return StepResult("needs-choice", sys, domain=ev.domain, angelic=False)
    if isinstance(ev, Take):
        return StepResult("needs-choice", sys, domain=ev.domain, angelic=True)
    if isinstance(ev, Apc):
        raise RuntimeError(
            "abstract-pure-call event reached the engine; wrap or erase the "
            "pre-abstraction before loading it"
        )
    raise RuntimeError(f"unhandled event {ev!r}")


# --- resolvers and top-level runs --------------------------------------------

class Resolver:
    """Resolves external nondeterminism and observation answers."""

    def choice(self, domain: ChoiceDomain, angelic: bool) -> Value:
        raise NotImplementedError

    def obs(self, name: str, arg: Value) -> Value:
        raise NotImplementedError


class SeededResolver(Resolver):
    """Pseudo-random resolution over enumerable domains.

    Obs answers come from per-name response tables; unbounded domains need
    a registered sampler keyed by the domain tag.
    """

    def __init__(
        self,
        seed: int,
        obs_tables: dict[str, ChoiceDomain] | None = None,
        samplers: dict[str, Callable[[random.Random], Value]] | None = None,
    ):
        self.rng = random.Random(seed)
        self.obs_tables = dict(obs_tables or {})
        self.samplers = dict(samplers or {})

    def choice(self, domain: ChoiceDomain, angelic: bool) -> Value:
        if not domain.is_enumerable:
            sampler = self.samplers.get(domain.tag)
            if sampler is None:
                raise UnresolvableDomain(domain.tag)
            return sampler(self.rng)
        options = list(domain.enumerate())
        if not options:
            raise EmptyDomain(angelic, domain.tag)
        return self.rng.choice(options)

    def obs(self, name: str, arg: Value) -> Value:
        table = self.obs_tables.get(name)
        if table is None:
            return UNIT
        options = list(table.enumerate())
        if not options:
            return UNIT
        return self.rng.choice(options)


class ScriptedResolver(Resolver):
    """Replays a fixed list of choice answers and per-name obs answers."""

    def __init__(self, choices=(), obs: dict[str, list[Value]] | None = None,
                 obs_default: dict[str, Value] | None = None):
        self.choices = list(choices)
        self.obs_scripts = {k: list(v) for k, v in (obs or {}).items()}
        self.obs_default = dict(obs_default or {})

    def choice(self, domain: ChoiceDomain, angelic: bool) -> Value:
        if domain.is_enumerable:
            options = list(domain.enumerate())
            if not options:
                raise EmptyDomain(angelic, domain.tag)
        if not self.choices:
            raise ResolverExhausted(f"choice over {domain.describe()}")
        return self.choices.pop(0)

    def obs(self, name: str, arg: Value) -> Value:
        script = self.obs_scripts.get(name)
        if script:
            return script.pop(0)
        if name in self.obs_default:
            return self.obs_default[name]
        if script is not None:
            raise ResolverExhausted(f"obs {name!r}")
        return UNIT


class InteractiveResolver(Resolver):
    """Prompts on the terminal for every choice and observation answer."""

    def __init__(self, echo: Callable[[str], None] = print,
                 ask: Callable[[str], str] = input):
        self.echo = echo
        self.ask = ask
        self.echoed: list[str] = []

    def choice(self, domain: ChoiceDomain, angelic: bool) -> Value:
        verb = "take" if angelic else "choose"
        if domain.is_enumerable:
            options = list(domain.enumerate())
            if not options:
                raise EmptyDomain(angelic, domain.tag)
            self.echo(f"{verb} from {domain.describe()}:")
            for i, v in enumerate(options):
                self.echo(f"  [{i}] {v.text()}")
            while True:
                raw = self.ask(f"{verb}> ")
                try:
                    picked = options[int(raw)]
                    break
                except (ValueError, IndexError):
                    self.echo("invalid index")
        else:
            from .values import from_text
            raw = self.ask(f"{verb} from {domain.describe()} (canonical value)> ")
            picked = from_text(raw)
        self.echoed.append(f"{verb}:{picked.text()}")
        return picked

    def obs(self, name: str, arg: Value) -> Value:
        from .values import from_text
        raw = self.ask(f"obs {name}({arg.text()})> ")
        if raw.strip() == "":
            return UNIT
        try:
            return from_text(raw)
        except Exception:
            from .values import VStr
            return VStr(raw)


class EmptyDomain(Exception):
    """Internal signal: a run reached choose/take over the empty set."""

    def __init__(self, angelic: bool, tag: str):
        super().__init__(tag)
        self.angelic = angelic
        self.tag = tag


@dataclass(frozen=True)
class LogEntry:
    kind: str            # "obs" or "echo"
    name: str = ""
    arg: Value = UNIT
    ret: Value = UNIT
    note: str = ""

    def to_json(self):
        if self.kind == "obs":
            return {"obs": self.name, "arg": self.arg.to_json(), "ret": self.ret.to_json()}
        return {"echo": self.note}


@dataclass(frozen=True)
class RunOutcome:
    log: tuple[LogEntry, ...]
    kind: str            # "term" | "error" | "partial"
    value: Value | None = None
    reason: str = ""

    @property
    def obs_entries(self) -> tuple[LogEntry, ...]:
        return tuple(e for e in self.log if e.kind == "obs")

    def log_json_lines(self) -> list[dict]:
        lines = [e.to_json() for e in self.log if e.kind == "obs"]
        end: dict = {"end": self.kind}
        if self.kind == "term" and self.value is not None:
            end["value"] = self.value.to_json()
        if self.reason:
            end["reason"] = self.reason
        lines.append(end)
        return lines


def run(mods: ModuleSet, resolver: Resolver, max_steps: int) -> RunOutcome:
    """Execute the linked system to completion, a fault, or fuel exhaustion.

    Empty angelic domains (undefined behavior: the program's fault)
    surface as an error outcome; empty demonic domains (no behavior: the
    specification refuses) stop the run as partial termination.
    """
    sys = load(mods)
    log: list[LogEntry] = []
    budget = max_steps
    while budget > 0:
        res = step(sys)
        if res.kind == "terminated":
            return RunOutcome(tuple(log), "term", value=res.value)
        if res.kind == "errored":
            return RunOutcome(tuple(log), "error", reason=res.reason)
        if res.kind == "continue":
            sys = res.state
            budget -= 1
            continue
        try:
            if res.kind == "needs-obs":
                ans = resolver.obs(res.obs_name, res.obs_arg)
                log.append(LogEntry("obs", name=res.obs_name, arg=res.obs_arg, ret=ans))
            else:
                assert res.domain is not None
                ans = resolver.choice(res.domain, res.angelic)
                if isinstance(resolver, InteractiveResolver):
                    log.append(LogEntry("echo", note=resolver.echoed[-1]))
        except EmptyDomain as empty:
            if empty.angelic:
                return RunOutcome(
                    tuple(log), "error",
                    reason=f"undefined behavior: empty take ({empty.tag})",
                )
            return RunOutcome(
                tuple(log), "partial",
                reason=f"no behavior: empty choose ({empty.tag})",
            )
        sys = step(sys, answer=ans).state
        budget -= 1
    return RunOutcome(tuple(log), "partial", reason="fuel exhausted")
