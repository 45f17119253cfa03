"""The reference interpreter: solution streams for goals and negation as failure.

One machine serves three uses.  ``solve`` runs Horn and hereditary Harrop
goals with hypotheses carried per goal frame, ``ll_solve`` runs the I/O
linear system with a threaded resource context, and the kernel runs the
same loop with certificate callbacks gating every rule.

Choice points hold generators.  A generator that binds metavariables
before yielding an alternative must undo those bindings itself when it is
resumed (bind, yield, undo); the machine only undoes what happened after
the yield.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .syntax import Program, Query, TT, parse_goal
from .terms import (Abs, App, BVar, Const, Eigen, Meta, Store, Term, const, instantiate,
                    instantiate_many, metas, unspine)
from .unify import unify

DEFAULT_FUEL = int(os.environ.get("PBT_FUEL", 100_000))

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class EngineError(Exception):
    pass


class FuelExhausted(EngineError):
    def __init__(self, budget: int):
        super().__init__(f"search exceeded its budget of {budget} steps")
        self.budget = budget


class NonGroundNegation(EngineError):
    def __init__(self, goal: Term, var: Meta, name: str | None = None):
        label = name or f"_G{var.id}"
        super().__init__(f"negated goal is not ground: metavariable {label} is unbound")
        self.goal = goal
        self.var = var
        self.name = name


class UnknownPredicate(EngineError):
    pass


class ModeMismatch(EngineError):
    pass


class Fuel:
    """A step budget shared by every search that holds a reference to it."""

    def __init__(self, budget: Optional[int] = None):
        self.budget = DEFAULT_FUEL if budget is None else budget
        self.used = 0

    def spend(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.budget:
            raise FuelExhausted(self.budget)


# -- resource contexts ------------------------------------------------------

@dataclass(frozen=True)
class Del:
    def __repr__(self) -> str:
        return "del"


@dataclass(frozen=True)
class Bnd:
    atom: Term


@dataclass(frozen=True)
class Ubnd:
    atom: Term


DEL = Del()
Option = Del | Bnd | Ubnd
Context = tuple


@dataclass
class Solution:
    bindings: dict[str, Term]
    context: Optional[tuple] = None
    cert: Optional[Term] = None


# -- the ungated callback table --------------------------------------------

class Ungated:
    """Callbacks that never refuse and never record anything."""

    def on_tt(self, k, cert):
        yield None

    def on_eq(self, k, cert):
        yield None

    def on_and(self, k, cert):
        yield cert, cert

    def on_or(self, k, cert):
        yield cert, 1
        yield cert, 2

    def on_some(self, k, cert, witness):
        yield cert

    def on_all(self, k, cert):
        yield lambda e: cert

    def on_imp(self, k, cert):
        yield cert

    def on_limp(self, k, cert):
        yield cert

    def on_bang(self, k, cert):
        yield cert

    def on_backchain(self, k, atom, cert):
        yield cert

    def on_init(self, k, cert, index):
        yield cert


UNGATED = Ungated()

_AND, _OR, _EQ, _SOME, _PI = Const(","), Const(";"), Const("="), Const("some"), Const("pi")
_IMP, _LIMP, _BANG, _TT, _FF = Const("=>"), Const("-o"), Const("!"), Const("tt"), Const("ff")

# frame tags
_GOAL, _END_IMP, _END_LIMP, _END_BANG, _DONE = 0, 1, 2, 3, 4


class Machine:
    """Depth-first search over one goal with a choice-point stack.

    ``linear`` selects the I/O system (implications go to the threaded
    context); otherwise hypotheses travel with each goal frame.
    """

    def __init__(self, prog: Program, store: Store, fpc=None, linear: bool = False,
                 fuel: Optional[Fuel] = None):
        self.prog = prog
        self.store = store
        self.fpc = fpc or UNGATED
        self.linear = linear
        self.fuel = fuel if fuel is not None else Fuel()

    def run(self, goal: Term, cert: Term = TT, hyps: Sequence[Term] = (),
            ctx: Context = ()) -> Iterator[Context]:
        """Yield the output context of each proof; bindings live in the store."""
        store = self.store
        goals = ((_GOAL, goal, tuple(hyps), cert), ((_DONE,), None))
        state = (goals, tuple(ctx))
        stack: list[list] = []
        while True:
            if state is None:
                while stack:
                    top = stack[-1]
                    store.undo(top[1])
                    nxt = next(top[0], None)
                    if nxt is None:
                        store.undo(top[2])
                        stack.pop()
                        continue
                    top[1] = store.mark()
                    state = nxt
                    break
                else:
                    return
            goals, ctx = state
            if goals is None:
                yield ctx
                state = None
                continue
            frame, rest = goals
            r = self.step(frame, rest, ctx)
            if r is None or isinstance(r, tuple):
                state = r
            else:
                m = store.mark()
                stack.append([r, m, m])
                state = None

    # each step returns a successor state, None for failure, or a generator of states
    def step(self, frame, rest, ctx):
        tag = frame[0]
        if tag == _END_LIMP:
            pos = frame[1]
            if ctx[pos] is not DEL:
                return None
            return rest, ctx[:pos] + ctx[pos + 1:]
        if tag == _END_IMP:
            pos = frame[1]
            return rest, ctx[:pos] + ctx[pos + 1:]
        if tag == _DONE:
            # an FPC may hold constraints that are settled only once the proof is whole
            done = getattr(self.fpc, "on_done", None)
            if done is None:
                return rest, ctx
            return self._each(done(self), lambda _: (rest, ctx))
        if tag == _END_BANG:
            if not _same_shape(frame[1], ctx):
                return None
            return rest, ctx
        _, goal, hyps, cert = frame
        store = self.store
        goal = store.whnf(goal)
        head, args = unspine(goal)
        fpc = self.fpc
        if isinstance(head, Const):
            if head == _TT and not args:
                return self._each(fpc.on_tt(self, cert), lambda _: (rest, ctx))
            if head == _AND and len(args) == 2:
                g1, g2 = args
                return self._each(fpc.on_and(self, cert), lambda cs: (
                    ((_GOAL, g1, hyps, cs[0]), ((_GOAL, g2, hyps, cs[1]), rest)), ctx))
            if head == _OR and len(args) == 2:
                return self._each(fpc.on_or(self, cert), lambda cs: (
                    ((_GOAL, args[cs[1] - 1], hyps, cs[0]), rest), ctx))
            if head == _EQ and len(args) == 2:
                return self._eq(fpc.on_eq(self, cert), args[0], args[1], rest, ctx)
            if head == _SOME and len(args) == 1:
                x = store.fresh_meta()
                body = _open(args[0], x)
                return self._each(fpc.on_some(self, cert, x), lambda c: (
                    ((_GOAL, body, hyps, c), rest), ctx))
            if head == _PI and len(args) == 1:
                e = store.fresh_eigen()
                body = _open(args[0], e)
                return self._each(fpc.on_all(self, cert), lambda f: (
                    ((_GOAL, body, hyps, f(e)), rest), ctx))
            if head == _IMP and len(args) == 2:
                a, g = args
                if self.linear:
                    pos = len(ctx)
                    return self._each(fpc.on_imp(self, cert), lambda c: (
                        ((_GOAL, g, hyps, c), ((_END_IMP, pos), rest)), ctx + (Ubnd(a),)))
                return self._each(fpc.on_imp(self, cert), lambda c: (
                    ((_GOAL, g, hyps + (a,), c), rest), ctx))
            if head == _LIMP and len(args) == 2:
                if not self.linear:
                    raise ModeMismatch("linear implication outside the linear interpreter")
                a, g = args
                pos = len(ctx)
                return self._each(fpc.on_limp(self, cert), lambda c: (
                    ((_GOAL, g, hyps, c), ((_END_LIMP, pos), rest)), ctx + (Bnd(a),)))
            if head == _BANG and len(args) == 1:
                if not self.linear:
                    raise ModeMismatch("'!' outside the linear interpreter")
                shape = ctx
                return self._each(fpc.on_bang(self, cert), lambda c: (
                    ((_GOAL, args[0], hyps, c), ((_END_BANG, shape), rest)), ctx))
            if head == _FF and not args:
                return None
            return self._atom(goal, head, args, hyps, cert, rest, ctx)
        if isinstance(head, Eigen):
            return self._atom(goal, head, args, hyps, cert, rest, ctx)
        raise EngineError(f"goal has a flexible head: {goal!r}")

    def _each(self, callbacks, build):
        for c in callbacks:
            yield build(c)

    def _eq(self, callbacks, a, b, rest, ctx):
        store = self.store
        for _ in callbacks:
            m = store.mark()
            if unify(store, a, b):
                yield rest, ctx
                store.undo(m)

    def _atom(self, goal, head, args, hyps, cert, rest, ctx):
        return self._atom_gen(goal, head, args, hyps, cert, rest, ctx)

    def _atom_gen(self, goal, head, args, hyps, cert, rest, ctx):
        store, fpc, fuel = self.store, self.fpc, self.fuel
        # hypotheses: the most recent first
        if self.linear:
            for pos in range(len(ctx) - 1, -1, -1):
                opt = ctx[pos]
                if opt is DEL:
                    continue
                if not _may_match(store, opt.atom, head, len(args)):
                    continue
                m = store.mark()
                if unify(store, goal, opt.atom):
                    fuel.spend()
                    out = ctx if isinstance(opt, Ubnd) else ctx[:pos] + (DEL,) + ctx[pos + 1:]
                    for _ in fpc.on_init(self, cert, pos):
                        yield rest, out
                store.undo(m)
        else:
            for i in range(len(hyps) - 1, -1, -1):
                h = hyps[i]
                if not _may_match(store, h, head, len(args)):
                    continue
                m = store.mark()
                if unify(store, goal, h):
                    fuel.spend()
                    for _ in fpc.on_init(self, cert, i):
                        yield rest, ctx
                store.undo(m)
        if not isinstance(head, Const):
            return
        name = head.name
        if name in self.prog.axioms:
            fuel.spend()
            for _ in fpc.on_init(self, cert, -1):
                yield rest, ctx
            return
        clause = self.prog.predicates.get(name)
        if clause is None:
            if name in self.prog.arities:
                return
            raise UnknownPredicate(f"unknown predicate {name!r}")
        if clause.nvars != len(args):
            return
        fuel.spend()
        m = store.mark()
        # compound arguments enter the body behind a bound metavariable, so
        # opening the body's binders never walks a large argument again
        shared = [a if isinstance(a, (Const, Meta, Eigen)) else _share(store, a) for a in args]
        # runtime atoms are closed: binders were opened with eigens or metas
        body = instantiate_many(clause.body, shared, closed_values=True)
        for c in fpc.on_backchain(self, goal, cert):
            yield ((_GOAL, body, hyps, c), rest), ctx
        store.undo(m)


def _share(store: Store, t: Term) -> Meta:
    m = store.fresh_meta()
    store.bind(m, t)
    return m


def _open(abs_term: Term, value: Term) -> Term:
    if isinstance(abs_term, Abs):
        return instantiate(abs_term.body, value)
    return App(abs_term, value)


def _may_match(store: Store, hyp: Term, head: Term, nargs: int) -> bool:
    h, args = unspine(store.whnf(hyp))
    if isinstance(h, Meta):
        return True
    return h == head and len(args) == nargs


def _same_shape(a: tuple, b: tuple) -> bool:
    if len(a) != len(b):
        return False
    return all((x is DEL) == (y is DEL) for x, y in zip(a, b))


# -- public entry points ----------------------------------------------------

def _query(prog: Program, goal, store: Optional[Store]) -> Query:
    if isinstance(goal, Query):
        return goal
    if isinstance(goal, str):
        return parse_goal(goal, prog, store)
    store = store if store is not None else Store()
    return Query(goal, {}, store)


def _emit(q: Query, ctx=None, cert=None, linear=False) -> Solution:
    st = q.store
    b = {n: st.resolve(m) for n, m in q.variables.items()}
    out_ctx = None
    if linear:
        out_ctx = tuple(o if o is DEL else type(o)(st.resolve(o.atom)) for o in ctx)
    return Solution(b, out_ctx, st.resolve(cert) if cert is not None else None)


def solve(prog: Program, hypotheses: Sequence[Term], goal, *, store: Optional[Store] = None,
          fuel: Optional[Fuel] = None, limit: Optional[int] = None) -> Iterator[Solution]:
    """Enumerate solutions of ``goal`` depth-first, left to right."""
    q = _query(prog, goal, store)
    machine = Machine(prog, q.store, linear=False, fuel=fuel)
    n = 0
    for _ in machine.run(q.term, TT, hyps=hypotheses):
        yield _emit(q)
        n += 1
        if limit is not None and n >= limit:
            return


def ll_solve(prog: Program, in_ctx: Sequence[Option], goal, *, store: Optional[Store] = None,
             fuel: Optional[Fuel] = None, limit: Optional[int] = None) -> Iterator[Solution]:
    """Enumerate ``(output context, bindings)`` pairs of the I/O linear system."""
    q = _query(prog, goal, store)
    machine = Machine(prog, q.store, linear=True, fuel=fuel)
    n = 0
    for out in machine.run(q.term, TT, ctx=tuple(in_ctx)):
        yield _emit(q, out, linear=True)
        n += 1
        if limit is not None and n >= limit:
            return


def first_unbound(store: Store, t: Term) -> Optional[Meta]:
    return next(metas(store.resolve(t)), None)


def naf(prog: Program, hypotheses: Sequence[Term], goal, *, store: Optional[Store] = None,
        fuel: Optional[Fuel] = None, linear: Optional[bool] = None,
        names: Optional[dict[int, str]] = None) -> bool:
    """Negation as finite failure on a ground goal.

    True iff the search space is exhausted without a solution; a solution
    makes it false.  Running out of fuel raises :class:`FuelExhausted`.
    """
    q = _query(prog, goal, store)
    st = q.store
    x = first_unbound(st, q.term)
    if x is not None:
        if names is None:
            names = {m.id: n for n, m in q.variables.items()}
        raise NonGroundNegation(q.term, x, names.get(x.id))
    if linear is None:
        linear = prog.mode == "linear"
    machine = Machine(prog, st, linear=linear, fuel=fuel if fuel is not None else Fuel())
    mark = st.mark()
    runner = machine.run(q.term, TT, hyps=hypotheses)
    try:
        for _ in runner:
            return False
        return True
    finally:
        runner.close()
        st.undo(mark)
