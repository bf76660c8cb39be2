"""The memory module: a block/offset model with allocation, invalidation,
loads, stores, and pointer equality.

Blocks are issued by a monotone counter and never reused within a run;
cells start undefined. Out-of-bounds access, use after free, loading an
undefined cell, freeing a non-base pointer, and comparing a dangling
pointer are all undefined behavior.
"""

from __future__ import annotations

from ..events import ChoiceDomain, Computation, Get, Put, Take, from_generator
from ..modules import FunctionDef, Module
from ..values import (
    FALSE,
    PtrVal,
    TRUE,
    UNIT,
    Value,
    VBool,
    VInt,
    VList,
    VOpaque,
    VPair,
    VPtr,
    vint,
)

UNDEF_CELL = VOpaque("undef", UNIT)


def _ub(reason: str):
    return Take(ChoiceDomain.explicit((), tag=f"ub:mem:{reason}"))


def empty_heap() -> Value:
    return VPair(vint(1), VList(()))


def _blocks(state: Value) -> list[tuple[int, bool, tuple[Value, ...]]]:
    assert isinstance(state, VPair) and isinstance(state.snd, VList)
    out = []
    for b in state.snd.items:
        assert isinstance(b, VPair) and isinstance(b.fst, VInt)
        live_cells = b.snd
        assert isinstance(live_cells, VPair) and isinstance(live_cells.fst, VBool)
        cells = live_cells.snd
        assert isinstance(cells, VList)
        out.append((b.fst.n, live_cells.fst.b, cells.items))
    return out


def _heap_value(next_block: int, blocks) -> Value:
    items = tuple(
        VPair(vint(bid), VPair(TRUE if live else FALSE, VList(cells)))
        for bid, live, cells in sorted(blocks)
    )
    return VPair(vint(next_block), VList(items))


def _decode(state: Value):
    assert isinstance(state, VPair) and isinstance(state.fst, VInt)
    return state.fst.n, _blocks(state)


def _find(blocks, bid: int):
    for i, (b, live, cells) in enumerate(blocks):
        if b == bid:
            return i, live, cells
    return None, False, ()


def _args(arg: Value, n: int):
    if isinstance(arg, VList) and len(arg.items) == n:
        return arg.items
    return None


def _alloc(arg: Value) -> Computation:
    def gen():
        a = _args(arg, 1)
        if a is None or not isinstance(a[0], VInt) or a[0].n < 0:
            yield _ub("alloc size")
            return UNIT
        st = yield Get()
        nxt, blocks = _decode(st)
        blocks.append((nxt, True, (UNDEF_CELL,) * a[0].n))
        yield Put(_heap_value(nxt + 1, blocks))
        return VPtr(PtrVal.heap(nxt, 0))
    return from_generator(gen)


def _free(arg: Value) -> Computation:
    def gen():
        a = _args(arg, 1)
        if a is None or not isinstance(a[0], VPtr) or a[0].p.kind != "heap":
            yield _ub("free target")
            return UNIT
        p = a[0].p
        if p.offset != 0:
            yield _ub("free of a non-base pointer")
            return UNIT
        st = yield Get()
        nxt, blocks = _decode(st)
        i, live, cells = _find(blocks, p.block)
        if i is None or not live:
            yield _ub("double or invalid free")
            return UNIT
        blocks[i] = (p.block, False, ())
        yield Put(_heap_value(nxt, blocks))
        return vint(0)
    return from_generator(gen)


def _load(arg: Value) -> Computation:
    def gen():
        a = _args(arg, 1)
        if a is None or not isinstance(a[0], VPtr) or a[0].p.kind != "heap":
            yield _ub("load target")
            return UNIT
        p = a[0].p
        st = yield Get()
        _nxt, blocks = _decode(st)
        i, live, cells = _find(blocks, p.block)
        if i is None or not live:
            yield _ub("load from a freed block")
            return UNIT
        if not (0 <= p.offset < len(cells)):
            yield _ub("load out of bounds")
            return UNIT
        cell = cells[p.offset]
        if cell == UNDEF_CELL:
            yield _ub("load of an undefined cell")
            return UNIT
        return cell
    return from_generator(gen)


def _store(arg: Value) -> Computation:
    def gen():
        a = _args(arg, 2)
        if a is None or not isinstance(a[0], VPtr) or a[0].p.kind != "heap":
            yield _ub("store target")
            return UNIT
        if not isinstance(a[1], (VInt, VPtr)):
            yield _ub("store of a non-value")
            return UNIT
        p = a[0].p
        st = yield Get()
        nxt, blocks = _decode(st)
        i, live, cells = _find(blocks, p.block)
        if i is None or not live:
            yield _ub("store to a freed block")
            return UNIT
        if not (0 <= p.offset < len(cells)):
            yield _ub("store out of bounds")
            return UNIT
        cells = cells[: p.offset] + (a[1],) + cells[p.offset + 1:]
        blocks[i] = (p.block, True, cells)
        yield Put(_heap_value(nxt, blocks))
        return vint(0)
    return from_generator(gen)


def _cmp(arg: Value) -> Computation:
    def gen():
        a = _args(arg, 2)
        if a is None or not isinstance(a[0], VPtr) or not isinstance(a[1], VPtr):
            yield _ub("cmp of non-pointers")
            return UNIT
        p, q = a[0].p, a[1].p
        st = yield Get()
        _nxt, blocks = _decode(st)

        def heap_ok(r: PtrVal) -> bool:
            _i, live, cells = _find(blocks, r.block)
            return live and 0 <= r.offset <= len(cells)

        for r in (p, q):
            if r.kind == "heap" and not heap_ok(r):
                yield _ub("cmp of a dangling pointer")
                return UNIT
        if p.kind == "null" and q.kind == "null":
            return vint(1)
        if p.kind != q.kind:
            return vint(0)
        if p.kind == "func":
            return vint(1 if p.func == q.func else 0)
        if p.kind == "heap":
            eq = p.block == q.block and p.offset == q.offset
            return vint(1 if eq else 0)
        return vint(0)
    return from_generator(gen)


def mem_module() -> Module:
    """The module serving alloc/free/load/store/cmp to embedded programs."""
    return Module(
        "Mem",
        empty_heap(),
        {
            "Mem.alloc": FunctionDef(_alloc),
            "Mem.free": FunctionDef(_free),
            "Mem.load": FunctionDef(_load),
            "Mem.store": FunctionDef(_store),
            "Mem.cmp": FunctionDef(_cmp),
        },
    )
