"""Higher-order pattern unification with a first-order fast path."""

from __future__ import annotations

from .terms import Abs, App, BVar, Const, Eigen, Meta, Store, Term, app, unspine


class NonPatternProblem(Exception):
    """A flexible term outside the pattern fragment had to be solved."""

    def __init__(self, lhs: Term, rhs: Term):
        super().__init__(f"non-pattern unification problem: {lhs!r} =?= {rhs!r}")
        self.lhs = lhs
        self.rhs = rhs


class _Fail(Exception):
    pass


def unify(store: Store, t1: Term, t2: Term) -> bool:
    """Unify two closed terms; on failure the store is left unchanged."""
    mark = store.mark()
    try:
        _unify(store, t1, t2)
    except _Fail:
        store.undo(mark)
        return False
    except NonPatternProblem:
        store.undo(mark)
        raise
    return True


def _unify(store: Store, t1: Term, t2: Term) -> None:
    todo = [(t1, t2)]
    while todo:
        a, b = todo.pop()
        a = store.whnf(a)
        b = store.whnf(b)
        if a is b:
            continue
        if isinstance(a, Abs) or isinstance(b, Abs):
            e = store.fresh_eigen()
            ba = a.body if isinstance(a, Abs) else None
            bb = b.body if isinstance(b, Abs) else None
            from .terms import instantiate
            left = instantiate(ba, e) if ba is not None else App(a, e)
            right = instantiate(bb, e) if bb is not None else App(b, e)
            todo.append((left, right))
            continue
        ha, xs = unspine(a)
        hb, ys = unspine(b)
        if isinstance(ha, Meta):
            if isinstance(hb, Meta):
                _flex_flex(store, ha, xs, hb, ys, a, b)
            else:
                _flex_rigid(store, ha, xs, b)
            continue
        if isinstance(hb, Meta):
            _flex_rigid(store, hb, ys, a)
            continue
        if len(xs) != len(ys) or not _same_rigid(ha, hb):
            raise _Fail
        todo.extend(zip(xs, ys))


def _same_rigid(a: Term, b: Term) -> bool:
    if isinstance(a, Const) and isinstance(b, Const):
        return a.name == b.name
    if isinstance(a, Eigen) and isinstance(b, Eigen):
        return a.id == b.id
    return False


def _pattern_args(store: Store, args: list[Term]) -> list[Eigen] | None:
    out = []
    for a in args:
        a = store.whnf(a)
        if not isinstance(a, Eigen) or a in out:
            return None
        out.append(a)
    return out


def _flex_flex(store, x: Meta, xs, y: Meta, ys, a, b) -> None:
    if not xs and not ys:
        if x.id == y.id:
            return
        if x.level <= y.level:
            store.bind(y, x)
        else:
            store.bind(x, y)
        return
    if x.id == y.id:
        ex = _pattern_args(store, xs)
        ey = _pattern_args(store, ys)
        if ex is None or ey is None:
            # identical spines unify trivially, pattern or not
            if len(xs) == len(ys) and all(store.resolve(p) == store.resolve(q)
                                          for p, q in zip(xs, ys)):
                return
            raise NonPatternProblem(a, b)
        n = len(ex)
        keep = [BVar(n - 1 - i) for i in range(n) if ex[i] == ey[i]]
        fresh = store.fresh_meta(level=x.level)
        store.bind(x, _lams(n, app(fresh, *keep)))
        return
    if _pattern_args(store, xs) is not None:
        _flex_rigid(store, x, xs, b)
    elif _pattern_args(store, ys) is not None:
        _flex_rigid(store, y, ys, a)
    else:
        raise NonPatternProblem(a, b)


def _lams(n: int, body: Term) -> Term:
    for _ in range(n):
        body = Abs(body)
    return body


def _flex_rigid(store: Store, x: Meta, xs: list[Term], t: Term) -> None:
    if not xs:
        store.bind(x, _abstract(store, x, [], t))
        return
    args = _pattern_args(store, xs)
    if args is None:
        raise NonPatternProblem(app(x, *xs), t)
    store.bind(x, _lams(len(args), _abstract(store, x, args, t)))


def _abstract(store: Store, x: Meta, args: list[Eigen], t: Term) -> Term:
    """Build the body of the binding for ``x args = t``.

    Eigenvariables in ``args`` become bound indices.  Performs the occurs
    check and the scope check, pruning or raising nested flexible terms as
    needed (those bindings go on the trail like any other).
    """
    n = len(args)
    position = {e.id: i for i, e in enumerate(args)}

    def go(t: Term, depth: int) -> Term:
        t = store.whnf(t)
        if isinstance(t, Abs):
            return Abs(go(t.body, depth + 1))
        head, targs = unspine(t)
        if isinstance(head, Meta):
            return flex(head, targs, depth)
        if isinstance(head, Eigen):
            head = eigen(head, depth)
        elif isinstance(head, BVar):
            pass
        return app(head, *[go(a, depth) for a in targs])

    def eigen(e: Eigen, depth: int) -> Term:
        i = position.get(e.id)
        if i is not None:
            return BVar(n - 1 - i + depth)
        if e.id < x.level:
            return e
        raise _Fail

    def flex(y: Meta, yargs: list[Term], depth: int) -> Term:
        if y.id == x.id:
            raise _Fail
        ys = []
        for a in yargs:
            a = store.whnf(a)
            if isinstance(a, BVar) and a.index < depth:
                ys.append(a)
            elif isinstance(a, Eigen):
                ys.append(a)
            else:
                return opaque(y, yargs, depth)
        keep = []
        for a in ys:
            if isinstance(a, BVar) or a.id in position or a.id < x.level:
                keep.append(True)
            else:
                keep.append(False)
        # eigenvariables abstracted by x that y could still see: raise y over them
        extra = [e for e in args if e.id < y.level and e not in ys]
        if all(keep) and not extra and y.level <= x.level:
            return app(y, *[BVar(a.index) if isinstance(a, BVar) else eigen(a, depth) for a in ys])
        y2 = store.fresh_meta(level=min(y.level, x.level))
        m = len(ys)
        inner = [BVar(m - 1 - i) for i in range(m) if keep[i]]
        store.bind(y, _lams(m, app(y2, *inner, *extra)))
        out = [BVar(a.index) if isinstance(a, BVar) else eigen(a, depth)
               for a, k in zip(ys, keep) if k]
        out += [eigen(e, depth) for e in extra]
        return app(y2, *out)

    def opaque(y: Meta, yargs: list[Term], depth: int) -> Term:
        # outside the pattern fragment: keep y's arguments whole.  That is
        # only sound when nothing in them needs pruning, since y may later
        # discard an argument that mentions x or a hidden eigenvariable.
        try:
            kept = [go(a, depth) for a in yargs]
        except _Fail:
            raise NonPatternProblem(app(y, *yargs), t) from None
        if y.level <= x.level:
            return app(y, *kept)
        m = len(yargs)
        y2 = store.fresh_meta(level=x.level)
        store.bind(y, _lams(m, app(y2, *[BVar(m - 1 - i) for i in range(m)])))
        return app(y2, *kept)

    return go(t, 0)
