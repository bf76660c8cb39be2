"""The executable example corpus: implementations, pre-abstractions, and
condition tables for the shipped module stacks.

Implementations are parsed from the bundled sources; abstractions are
hand-built computations (they manipulate mathematical maps no imperative
program could hold). Condition tables follow the published shapes with
finite auxiliary-variable universes configured per suite.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources

from .. import pcm
from ..act import GrtHint
from ..events import (
    Apc,
    Call,
    ChoiceDomain,
    Choose,
    Get,
    Obs,
    Put,
    Take,
    from_generator,
    guarantee,
)
from ..imp import ImpModule, embed, mem_module, parse
from ..imp.syntax import ImpFunction, Seq, While
from ..modules import FunctionDef, Module, ModuleSet
from ..ordinals import Depth, INFINITY, Ordinal, nat
from ..pcm import (
    EPSILON,
    MEM,
    MEM_INNER,
    MW_AUTH,
    Resource,
    RProp,
    _EX,
    add,
    ball,
    do_token,
    encode_int_map,
    fired,
    init_token,
    maps_to_map,
    mw_full,
    mwhas,
    mwhas_res,
    own,
    points_to,
    pure,
    ready,
    run_token,
    sep,
)
from ..spc import Cond, Conds, PreAbstraction, cond_with_w, simple_cond
from ..values import (
    NIL,
    UNIT,
    PtrVal,
    Value,
    VInt,
    VList,
    VPair,
    VPtr,
    VStr,
    vint,
)


def load_source(name: str) -> str:
    return (
        resources.files("ccr.harness").joinpath(f"programs/{name}.imp").read_text()
    )


def load_program(name: str) -> ImpModule:
    return parse(load_source(name))


def unroll_main(m: ImpModule, k: int) -> ImpModule:
    """Replace the top-level loop of main with k copies of its body."""

    def unroll(stmt):
        if isinstance(stmt, While):
            out = None
            for _ in range(k):
                out = stmt.body if out is None else Seq(out, stmt.body)
            return out if out is not None else stmt
        if isinstance(stmt, Seq):
            return Seq(unroll(stmt.a), unroll(stmt.b))
        return stmt

    functions = []
    for f in m.functions:
        if f.name == "main":
            functions.append(ImpFunction(f.name, f.params, unroll(f.body)))
        else:
            functions.append(f)
    return ImpModule(m.name, m.localvars, tuple(functions))


def cannon_main_source(num_fire: int) -> str:
    return (
        "module Main\n"
        f"local NUM_FIRE := {num_fire}\n"
        "def main() {\n"
        "  var i := 0\n"
        "  while (i < NUM_FIRE) {\n"
        "    var r := Cannon.fire()\n"
        "    print(str(r))\n"
        "    i := i + 1\n"
        "  }\n"
        "  return 0\n"
        "}\n"
    )


# --- helpers over encoded integer maps -----------------------------------------

def map_lookup(m: Value, k: int) -> int | None:
    assert isinstance(m, VList)
    for item in m.items:
        assert isinstance(item, VPair) and isinstance(item.fst, VInt)
        if item.fst.n == k:
            assert isinstance(item.snd, VInt)
            return item.snd.n
    return None


def map_insert(m: Value, k: int, v: int) -> Value:
    assert isinstance(m, VList)
    out = {item.fst.n: item.snd.n for item in m.items}  # type: ignore[union-attr]
    out[k] = v
    return encode_int_map(out)


def _ub(reason: str):
    return Take(ChoiceDomain.explicit((), tag=f"ub:{reason}"))


def _two_ints(arg: Value) -> tuple[int, int] | None:
    if isinstance(arg, VList) and len(arg.items) == 2:
        a, b = arg.items
        if isinstance(a, VInt) and isinstance(b, VInt):
            return a.n, b.n
    return None


def _one_int(arg: Value) -> int | None:
    if isinstance(arg, VList) and len(arg.items) == 1 and isinstance(
        arg.items[0], VInt
    ):
        return arg.items[0].n
    return None


# --- abstractions for the middleware stack ---------------------------------------

def sigma_mw() -> Resource:
    return mw_full({})


def sigma_app() -> Resource:
    return run_token()


def sigma_mem() -> Resource:
    return pcm.registry().inject("Mem", MEM.full(MEM_INNER.unit()))


def a_mw(unroll: int | None = 2) -> PreAbstraction:
    def main(arg: Value):
        def gen():
            yield Put(encode_int_map({}))
            yield Call("App.init", NIL)
            if unroll is None:
                while True:
                    yield Call("App.run", NIL)
            else:
                for _ in range(unroll):
                    yield Call("App.run", NIL)
            return vint(0)
        return from_generator(gen)

    def put(arg: Value):
        def gen():
            iv = _two_ints(arg)
            if iv is None:
                yield _ub("MW.put args")
                return UNIT
            i, v = iv
            full = yield Get()
            yield Put(map_insert(full, i, v))
            yield Obs("print", VStr(f"put:{i}{v}"))
            return vint(0)
        return from_generator(gen)

    def get(arg: Value):
        def gen():
            i = _one_int(arg)
            if i is None:
                yield _ub("MW.get args")
                return UNIT
            full = yield Get()
            r = map_lookup(full, i)
            r = 0 if r is None else r
            yield Obs("print", VStr(f"get:{i}{r}"))
            return vint(r)
        return from_generator(gen)

    return PreAbstraction(
        "MW",
        encode_int_map({}),
        {"MW.main": main, "MW.put": put, "MW.get": get},
        sigma_mw(),
    )


def i_mw(unroll: int | None = 2) -> Module:
    """The intermediate middleware abstraction: a nondeterministic class
    map decides, per index, between the optimized store and the map
    module. State: (cls, opt, map handle)."""

    def classes(st: Value) -> Value:
        return st.items[0]  # type: ignore[union-attr]

    def main(arg: Value):
        def gen():
            h = yield Call("Map.new", NIL)
            yield Put(VList((encode_int_map({}), encode_int_map({}), h)))
            yield Call("App.init", NIL)
            if unroll is None:
                while True:
                    yield Call("App.run", NIL)
            else:
                for _ in range(unroll):
                    yield Call("App.run", NIL)
            return vint(0)
        return from_generator(gen)

    def put(arg: Value):
        def gen():
            iv = _two_ints(arg)
            if iv is None:
                yield _ub("MW.put args")
                return UNIT
            i, v = iv
            st = yield Get()
            cls, opt, h = st.items
            if map_lookup(cls, i) in (None, 0):
                c = yield Choose(
                    ChoiceDomain.explicit((vint(1), vint(2)), tag="mw-class")
                )
                cls = map_insert(cls, i, c.n)
            if map_lookup(cls, i) == 1:
                opt = map_insert(opt, i, v)
            else:
                yield Call("Map.update", VList((h, vint(i), vint(v))))
            yield Put(VList((cls, opt, h)))
            yield Obs("print", VStr(f"put:{i}{v}"))
            return vint(0)
        return from_generator(gen)

    def get(arg: Value):
        def gen():
            i = _one_int(arg)
            if i is None:
                yield _ub("MW.get args")
                return UNIT
            st = yield Get()
            cls, opt, h = st.items
            c = map_lookup(cls, i)
            if c in (None, 0):
                yield _ub("MW.get of an unused index")
                return UNIT
            if c == 1:
                r = map_lookup(opt, i)
                r = 0 if r is None else r
                rv = vint(r)
            else:
                rv = yield Call("Map.get", VList((h, vint(i))))
                if not isinstance(rv, VInt):
                    yield _ub("MW.get result")
                    return UNIT
            yield Obs("print", VStr(f"get:{i}{rv.n}"))
            return rv
        return from_generator(gen)

    return Module(
        "MW",
        VList((encode_int_map({}), encode_int_map({}), vint(0))),
        {
            "MW.main": FunctionDef(main),
            "MW.put": FunctionDef(put),
            "MW.get": FunctionDef(get),
        },
    )


def a_app(run_print: int = 42) -> PreAbstraction:
    """The application abstraction; run prints the constant the conditions
    prove the middleware must return. A mutated constant is used by the
    differential tests."""

    def init(arg: Value):
        def gen():
            yield Call("MW.put", VList((vint(0), vint(42))))
            return vint(0)
        return from_generator(gen)

    def run(arg: Value):
        def gen():
            yield Call("MW.get", VList((vint(0),)))
            yield Obs("print", VStr(f"val:{run_print}"))
            return vint(0)
        return from_generator(gen)

    return PreAbstraction(
        "App", UNIT, {"App.init": init, "App.run": run}, sigma_app()
    )


def i_app() -> PreAbstraction:
    """Intermediate application abstraction: error checks dropped, the
    fetched value still printed."""

    def init(arg: Value):
        def gen():
            yield Call("MW.put", VList((vint(0), vint(42))))
            return vint(0)
        return from_generator(gen)

    def run(arg: Value):
        def gen():
            v = yield Call("MW.get", VList((vint(0),)))
            if not isinstance(v, VInt):
                yield _ub("App.run result")
                return UNIT
            yield Obs("print", VStr(f"val:{v.n}"))
            return vint(0)
        return from_generator(gen)

    return PreAbstraction(
        "App", UNIT, {"App.init": init, "App.run": run}, sigma_app()
    )


def _nb_body(name: str):
    def body(arg: Value):
        def gen():
            yield guarantee(False, tag=f"nb:{name}")
            return UNIT
        return from_generator(gen)
    return body


def a_map() -> PreAbstraction:
    """Every map function is pure, so the abstraction refuses direct
    (impure) invocation; wrapped purely, its body is never consulted."""
    return PreAbstraction(
        "Map",
        UNIT,
        {name: _nb_body(name) for name in ("Map.new", "Map.update", "Map.get")},
        EPSILON,
    )


def a_mem() -> PreAbstraction:
    """The memory abstraction coincides with the implementation."""
    mem = mem_module()
    return PreAbstraction(
        "Mem", mem.init, {n: fd.body for n, fd in mem.funs.items()}, sigma_mem()
    )


# --- once / cannon ---------------------------------------------------------------

def a_once() -> PreAbstraction:
    def do(arg: Value):
        def gen():
            return vint(0)
            yield
        return from_generator(gen)
    return PreAbstraction("Once", UNIT, {"Once.do": do}, EPSILON)


def a_test(n: int) -> PreAbstraction:
    name = f"Test{n}"

    def main(arg: Value):
        def gen():
            for _ in range(n):
                yield Call("Once.do", NIL)
            return vint(0)
        return from_generator(gen)

    return PreAbstraction(name, UNIT, {f"{name}.main": main}, EPSILON)


def a_cannon() -> PreAbstraction:
    def fire(arg: Value):
        def gen():
            return vint(1)
            yield
        return from_generator(gen)
    return PreAbstraction("Cannon", UNIT, {"Cannon.fire": fire}, ready())


def a_cannon_main(num_fire: int) -> PreAbstraction:
    def main(arg: Value):
        def gen():
            for _ in range(num_fire):
                r = yield Call("Cannon.fire", NIL)
                if not isinstance(r, VInt):
                    yield _ub("fire result")
                    return UNIT
                yield Obs("print", VStr(str(r.n)))
            return vint(0)
        return from_generator(gen)

    return PreAbstraction("Main", UNIT, {"Main.main": main}, EPSILON)


# --- repeat -----------------------------------------------------------------------

def a_rp() -> PreAbstraction:
    return PreAbstraction("RP", UNIT, {"RP.repeat": _nb_body("RP.repeat")}, EPSILON)


def a_sc() -> PreAbstraction:
    return PreAbstraction("SC", UNIT, {"SC.succ": _nb_body("SC.succ")}, EPSILON)


def a_ad() -> PreAbstraction:
    def main(arg: Value):
        def gen():
            n = yield Obs("getint", NIL)
            if not isinstance(n, VInt):
                yield _ub("getint result")
                return UNIT
            yield Apc()
            yield Obs("print", VStr(str(n.n + n.n)))
            return vint(0)
        return from_generator(gen)

    return PreAbstraction("AD", UNIT, {"AD.main": main}, EPSILON)


# --- condition tables ----------------------------------------------------------------

def _is_val(v: Value) -> bool:
    return isinstance(v, (VInt, VPtr))


def s_once() -> Conds:
    return {
        "Once.do": simple_cond(
            lambda x: own(do_token()) & pure(x == NIL, "no-args"),
            lambda r: pcm.TRUE_P,
            label="Once.do",
        )
    }


def s_test_main(n: int) -> Conds:
    name = f"Test{n}.main"
    return {
        name: simple_cond(
            lambda x: own(do_token()),
            lambda r: pcm.TRUE_P,
            label=name,
        )
    }


def s_cannon() -> Conds:
    return {
        "Cannon.fire": simple_cond(
            lambda x: own(ball()) & pure(x == NIL, "no-args"),
            lambda r: pure(r == vint(1), "returns-one"),
            label="Cannon.fire",
        )
    }


def s_cannon_main() -> Conds:
    return {
        "Main.main": simple_cond(
            lambda x: own(ball()),
            lambda r: pcm.TRUE_P,
            label="Main.main",
        )
    }


@dataclass(frozen=True)
class MwSpecUniverse:
    """Finite auxiliary-variable universes for the middleware conditions."""

    maps: tuple[tuple[tuple[int, int], ...], ...] = ((), ((0, 42),))
    keys: tuple[int, ...] = (0,)
    vals: tuple[int, ...] = (42,)

    def map_values(self) -> list[Value]:
        return [encode_int_map(dict(m)) for m in self.maps]

    def w_maps(self) -> ChoiceDomain:
        return ChoiceDomain.explicit(tuple(self.map_values()), tag="w:maps")

    def w_triples(self) -> ChoiceDomain:
        values = []
        for m in self.map_values():
            for k in self.keys:
                for v in self.vals:
                    values.append(VList((m, vint(k), vint(v))))
        return ChoiceDomain.explicit(tuple(values), tag="w:map-key-val")


def _decode_map(v: Value) -> dict[int, int]:
    assert isinstance(v, VList)
    return {p.fst.n: p.snd.n for p in v.items}  # type: ignore[union-attr]


def s_mw(u: MwSpecUniverse = MwSpecUniverse()) -> Conds:
    def put_pre(w: Value, x: Value) -> RProp:
        f, k, v = w.items  # type: ignore[union-attr]
        return own(mwhas_res(_decode_map(f))) & pure(
            x == VList((k, v)), "args-are-kv"
        )

    def put_post(w: Value, r: Value) -> RProp:
        f, k, v = w.items  # type: ignore[union-attr]
        updated = map_insert(f, k.n, v.n)  # type: ignore[union-attr]
        return own(mwhas_res(_decode_map(updated))) & pure(_is_val(r), "ret-val")

    def get_pre(w: Value, x: Value) -> RProp:
        f, k, v = w.items  # type: ignore[union-attr]
        looked = map_lookup(f, k.n)  # type: ignore[union-attr]
        return own(mwhas_res(_decode_map(f))) & pure(
            x == VList((k,)) and looked == v.n, "key-maps-to",  # type: ignore[union-attr]
        )

    def get_post(w: Value, r: Value) -> RProp:
        f, k, v = w.items  # type: ignore[union-attr]
        return own(mwhas_res(_decode_map(f))) & pure(r == v, "ret-mapped")

    return {
        "MW.main": simple_cond(
            lambda x: sep(own(init_token()), mwhas({})) & pure(x == NIL, "no-args"),
            lambda r: pure(_is_val(r), "ret-val"),
            label="MW.main",
        ),
        "MW.put": cond_with_w(
            u.w_triples(), lambda w: INFINITY, put_pre, put_post, label="MW.put"
        ),
        "MW.get": cond_with_w(
            u.w_triples(), lambda w: INFINITY, get_pre, get_post, label="MW.get"
        ),
    }


def s_app(u: MwSpecUniverse = MwSpecUniverse()) -> Conds:
    def init_pre(w: Value, x: Value) -> RProp:
        return sep(own(init_token()), mwhas(_decode_map(w))) & pure(
            x == NIL, "no-args"
        )

    def init_post(w: Value, r: Value) -> RProp:
        f = map_insert(w, 0, 42)
        return sep(own(run_token()), mwhas(_decode_map(f))) & pure(
            _is_val(r), "ret-val"
        )

    def run_pre(w: Value, x: Value) -> RProp:
        return sep(own(run_token()), mwhas(_decode_map(w))) & pure(
            x == NIL and map_lookup(w, 0) == 42, "has-42"
        )

    def run_post(w: Value, r: Value) -> RProp:
        return sep(own(run_token()), mwhas(_decode_map(w))) & pure(
            _is_val(r) and map_lookup(w, 0) == 42, "has-42"
        )

    return {
        "App.init": cond_with_w(
            u.w_maps(), lambda w: INFINITY, init_pre, init_post, label="App.init"
        ),
        "App.run": cond_with_w(
            u.w_maps(), lambda w: INFINITY, run_pre, run_post, label="App.run"
        ),
    }


def mw_put_hint() -> GrtHint:
    """The authoritative rewrite for the middleware's put: the full map and
    the client fragment advance to the updated map together."""

    def pools(arg: Value, pool: Resource) -> list[Resource]:
        kv = _two_ints(arg)
        if kv is None:
            return []
        k, v = kv
        a = pool.slot_value("MW.auth")
        if not (isinstance(a, tuple) and a[0] == "auth"):
            return []
        _, full, frag = a
        if full is None or full != frag or full[0] != "ex":
            return []
        current = _decode_map(full[1])
        current[k] = v
        enc = encode_int_map(current)
        e = _EX.just(enc)
        rest = {s: el for s, el in pool.slots if s != "MW.auth"}
        rest["MW.auth"] = MW_AUTH.both(e, e)
        return [Resource.make(rest)]

    return GrtHint("MW.put.post", pools)


# --- map and memory condition tables -------------------------------------------------

@dataclass(frozen=True)
class MapSpecUniverse:
    handles: tuple[Value, ...] = (VPtr(PtrVal.heap(1, 0)),)
    maps: tuple[tuple[tuple[int, int], ...], ...] = ((), ((0, 42),))
    keys: tuple[int, ...] = (0,)
    vals: tuple[int, ...] = (42,)


def s_map(u: MapSpecUniverse = MapSpecUniverse()) -> Conds:
    handle_domain = ChoiceDomain.explicit(u.handles, tag="w:handles")

    def quads() -> ChoiceDomain:
        values = []
        for h in u.handles:
            for m in u.maps:
                for k in u.keys:
                    for v in u.vals:
                        values.append(
                            VList((h, encode_int_map(dict(m)), vint(k), vint(v)))
                        )
        return ChoiceDomain.explicit(tuple(values), tag="w:map-quads")

    def new_post(w: Value, r: Value) -> RProp:
        return pcm.exists(
            handle_domain,
            lambda h: maps_to_map(h, {}) & pure(r == h, "ret-handle"),
        )

    def update_pre(w: Value, x: Value) -> RProp:
        h, f, k, v = w.items  # type: ignore[union-attr]
        return maps_to_map(h, _decode_map(f)) & pure(x == VList((h, k, v)), "args")

    def update_post(w: Value, r: Value) -> RProp:
        h, f, k, v = w.items  # type: ignore[union-attr]
        nf = map_insert(f, k.n, v.n)  # type: ignore[union-attr]
        return maps_to_map(h, _decode_map(nf)) & pure(_is_val(r), "ret-val")

    def get_pre(w: Value, x: Value) -> RProp:
        h, f, k, v = w.items  # type: ignore[union-attr]
        return maps_to_map(h, _decode_map(f)) & pure(
            x == VList((h, k)) and map_lookup(f, k.n) == v.n, "key-maps-to",  # type: ignore[union-attr]
        )

    def get_post(w: Value, r: Value) -> RProp:
        h, f, k, v = w.items  # type: ignore[union-attr]
        return maps_to_map(h, _decode_map(f)) & pure(r == v, "ret-mapped")

    return {
        "Map.new": cond_with_w(
            ChoiceDomain.explicit((UNIT,), tag="w:unit"),
            lambda w: Depth.pure(nat(1)),
            lambda w, x: pure(x == NIL, "no-args"),
            new_post,
            label="Map.new",
        ),
        "Map.update": cond_with_w(
            quads(), lambda w: Depth.pure(nat(1)), update_pre, update_post,
            label="Map.update",
        ),
        "Map.get": cond_with_w(
            quads(), lambda w: Depth.pure(Ordinal(0, 1, 0)), get_pre, get_post,
            label="Map.get",
        ),
    }


@dataclass(frozen=True)
class MemSpecUniverse:
    depths: tuple[Depth, ...] = (INFINITY, Depth.pure(nat(1)))
    sizes: tuple[int, ...] = (1,)
    pointers: tuple[Value, ...] = (VPtr(PtrVal.heap(1, 0)),)
    cells: tuple[Value, ...] = (vint(7),)


def s_mem(u: MemSpecUniverse = MemSpecUniverse()) -> Conds:
    from ..spc import depth_value, value_depth

    def dn_domain() -> ChoiceDomain:
        values = []
        for d in u.depths:
            for n in u.sizes:
                values.append(VList((depth_value(d), vint(n))))
        return ChoiceDomain.explicit(tuple(values), tag="w:mem-alloc")

    def dpv_domain() -> ChoiceDomain:
        values = []
        for d in u.depths:
            for p in u.pointers:
                for v in u.cells:
                    values.append(VList((depth_value(d), p, v)))
        return ChoiceDomain.explicit(tuple(values), tag="w:mem-pv")

    def impure(w: Value) -> bool:
        return value_depth(w.items[0]) == INFINITY  # type: ignore[union-attr]

    def alloc_pre(w: Value, x: Value) -> RProp:
        if impure(w):
            return pcm.TRUE_P
        n = w.items[1]  # type: ignore[union-attr]
        return pure(x == VList((n,)) and n.n >= 0, "size")  # type: ignore[union-attr]

    def alloc_post(w: Value, r: Value) -> RProp:
        if impure(w):
            return pcm.TRUE_P
        n = w.items[1].n  # type: ignore[union-attr]
        options = []
        for p in u.pointers:
            cells = list(u.cells[:1]) * n
            options.append((p, cells))
        return pcm.exists(
            ChoiceDomain.explicit(tuple(p for p, _ in options), tag="alloc-ptr"),
            lambda p: points_to(p, [u.cells[0]] * n) & pure(r == p, "ret-ptr"),
        )

    def load_pre(w: Value, x: Value) -> RProp:
        if impure(w):
            return pcm.TRUE_P
        _, p, v = w.items  # type: ignore[union-attr]
        return points_to(p, [v]) & pure(x == VList((p,)), "arg-ptr")

    def load_post(w: Value, r: Value) -> RProp:
        if impure(w):
            return pcm.TRUE_P
        _, p, v = w.items  # type: ignore[union-attr]
        return points_to(p, [v]) & pure(r == v, "ret-cell")

    def store_pre(w: Value, x: Value) -> RProp:
        if impure(w):
            return pcm.TRUE_P
        _, p, v = w.items  # type: ignore[union-attr]
        return pcm.exists(
            ChoiceDomain.explicit(u.cells, tag="old-cell"),
            lambda old: points_to(p, [old]),
        ) & pure(
            isinstance(x, VList) and len(x.items) == 2 and x.items[0] == p, "args"
        )

    def store_post(w: Value, r: Value) -> RProp:
        if impure(w):
            return pcm.TRUE_P
        _, p, v = w.items  # type: ignore[union-attr]
        return points_to(p, [v]) & pure(_is_val(r), "ret-val")

    def free_pre(w: Value, x: Value) -> RProp:
        if impure(w):
            return pcm.TRUE_P
        _, p, v = w.items  # type: ignore[union-attr]
        return points_to(p, [v]) & pure(x == VList((p,)), "arg-ptr")

    def free_post(w: Value, r: Value) -> RProp:
        if impure(w):
            return pcm.TRUE_P
        return pure(_is_val(r), "ret-val")

    def d_of(w: Value) -> Depth:
        return value_depth(w.items[0])  # type: ignore[union-attr]

    return {
        "Mem.alloc": cond_with_w(dn_domain(), d_of, alloc_pre, alloc_post,
                                 label="Mem.alloc"),
        "Mem.free": cond_with_w(dpv_domain(), d_of, free_pre, free_post,
                                label="Mem.free"),
        "Mem.load": cond_with_w(dpv_domain(), d_of, load_pre, load_post,
                                label="Mem.load"),
        "Mem.store": cond_with_w(dpv_domain(), d_of, store_pre, store_post,
                                 label="Mem.store"),
        "Mem.cmp": cond_with_w(
            ChoiceDomain.explicit((UNIT,), tag="w:unit"),
            lambda w: INFINITY,
            lambda w, x: pcm.TRUE_P,
            lambda w, r: pcm.TRUE_P,
            label="Mem.cmp",
        ),
    }


# --- repeat conditions ------------------------------------------------------------

FSEM = {"succ": lambda m: m + 1}


def s_sc(max_m: int = 12) -> Conds:
    return {
        "SC.succ": cond_with_w(
            ChoiceDomain.int_range(0, max_m, tag="w:m"),
            lambda w: Depth.pure(nat(0)),
            lambda w, x: pure(x == VList((w,)), "arg-m"),
            lambda w, r: pure(
                isinstance(w, VInt) and r == vint(w.n + 1), "ret-succ"
            ),
            label="SC.succ",
        )
    }


def s_ad() -> Conds:
    return {
        "AD.main": simple_cond(
            lambda x: pure(x == NIL, "no-args"),
            lambda r: pure(_is_val(r), "ret-val"),
            label="AD.main",
        )
    }


def expected_fn_spec(fsem_name: str, max_m: int = 12) -> Conds:
    """The specification the repeat condition expects of the argument
    function: pure at depth omega, computing the named semantics."""
    sem = FSEM[fsem_name]
    return {
        "SC.succ": cond_with_w(
            ChoiceDomain.int_range(0, max_m, tag="w:m"),
            lambda w: Depth.pure(Ordinal(0, 1, 0)),
            lambda w, x: pure(x == VList((w,)), "arg-m"),
            lambda w, r: pure(
                isinstance(w, VInt) and r == vint(sem(w.n)), "ret-fsem"
            ),
            label="expected(*f)",
        )
    }


def h_rp(s_f: Conds, witnesses=(), max_n: int = 5, max_m: int = 12) -> Conds:
    """The higher-order repeat condition instantiated at a function spec."""
    from ..spc import conds_leq

    fptr = VPtr(PtrVal.of_func("SC.succ"))
    values = []
    for n in range(max_n + 1):
        for m in range(max_m + 1):
            values.append(VList((fptr, vint(n), vint(m), VStr("succ"))))
    w_dom = ChoiceDomain.explicit(tuple(values), tag="w:repeat")

    def depth_of(w: Value) -> Depth:
        n = w.items[1].n  # type: ignore[union-attr]
        return Depth.pure(Ordinal(0, 1, n))

    def pre(w: Value, x: Value) -> RProp:
        f, n, m, fname = w.items  # type: ignore[union-attr]
        expected = expected_fn_spec(fname.s, max_m)  # type: ignore[union-attr]
        return pure(
            x == VList((f, n, m))
            and n.n >= 0  # type: ignore[union-attr]
            and conds_leq(expected, s_f, witnesses),
            "expected-fn-spec",
        )

    def post(w: Value, r: Value) -> RProp:
        f, n, m, fname = w.items  # type: ignore[union-attr]
        sem = FSEM[fname.s]  # type: ignore[union-attr]
        out = m.n  # type: ignore[union-attr]
        for _ in range(n.n):  # type: ignore[union-attr]
            out = sem(out)
        return pure(r == vint(out), "ret-iterated")

    return {
        "RP.repeat": cond_with_w(w_dom, depth_of, pre, post, label="RP.repeat")
    }


def rp_act_script(n: int) -> list[tuple]:
    """Drive the abstract pure call of the repeat suite through the real
    call chain repeat(&succ, n, n), recording strictly decreasing depths."""
    fptr = VPtr(PtrVal.of_func("SC.succ"))
    script: list[tuple] = []

    def go(k: int, m: int) -> int:
        script.append(("apc", nat(2)))
        if k == 0:
            script.append(("ret", vint(m)))
            return m
        script.append(("call", "SC.succ", VList((vint(m),)), Depth.pure(nat(0))))
        script.append(("apc", nat(0)))
        script.append(("ret", vint(m + 1)))
        script.append(("i", nat(1)))
        script.append(
            ("call", "RP.repeat",
             VList((fptr, vint(k - 1), vint(m + 1))),
             Depth.pure(Ordinal(0, 1, k - 1)))
        )
        out = go(k - 1, m + 1)
        script.append(("i", nat(0)))
        script.append(("ret", vint(out)))
        return out

    script.append(("apc", nat(1)))
    script.append(
        ("call", "RP.repeat", VList((fptr, vint(n), vint(n))),
         Depth.pure(Ordinal(0, 1, n)))
    )
    go(n, n)
    script.append(("i", nat(0)))
    script.append(("ret", vint(2 * n)))
    return script
