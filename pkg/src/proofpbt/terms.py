"""Terms with binders, metavariables and eigenvariables.

Bound variables use de Bruijn indices.  Metavariables and eigenvariables
share a single monotone counter in the :class:`Store`: an eigenvariable
``e`` is visible to a metavariable ``X`` iff ``e.id < X.level``.  A
metavariable created after an eigenvariable can therefore mention it,
one created before cannot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence, Union


@dataclass(frozen=True, slots=True)
class Const:
    name: Union[str, int]

    def __repr__(self) -> str:
        return f"Const({self.name!r})"


@dataclass(frozen=True, slots=True)
class Meta:
    id: int
    level: int

    def __repr__(self) -> str:
        return f"Meta({self.id}@{self.level})"


@dataclass(frozen=True, slots=True)
class Eigen:
    id: int

    def __repr__(self) -> str:
        return f"Eigen({self.id})"


@dataclass(frozen=True, slots=True)
class BVar:
    index: int


@dataclass(frozen=True, slots=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True, slots=True)
class Abs:
    body: "Term"


Term = Union[Const, Meta, Eigen, BVar, App, Abs]


def app(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def const(name, *args: Term) -> Term:
    return app(Const(name), *args)


def unspine(t: Term) -> tuple[Term, list[Term]]:
    """Split ``f a1 .. an`` into ``(f, [a1, .., an])`` without resolving."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


# -- de Bruijn plumbing -----------------------------------------------------

def shift(t: Term, d: int, cutoff: int = 0) -> Term:
    if d == 0:
        return t
    if isinstance(t, BVar):
        return BVar(t.index + d) if t.index >= cutoff else t
    if isinstance(t, App):
        return App(shift(t.fun, d, cutoff), shift(t.arg, d, cutoff))
    if isinstance(t, Abs):
        return Abs(shift(t.body, d, cutoff + 1))
    return t


def _has_loose(t: Term, depth: int = 0) -> bool:
    if isinstance(t, BVar):
        return t.index >= depth
    if isinstance(t, App):
        return _has_loose(t.fun, depth) or _has_loose(t.arg, depth)
    if isinstance(t, Abs):
        return _has_loose(t.body, depth + 1)
    return False


def instantiate_many(body: Term, values: Sequence[Term], closed_values: bool = False) -> Term:
    """Substitute ``values`` for the outermost ``len(values)`` bound indices.

    ``BVar(i)`` with ``i < n`` becomes ``values[n - 1 - i]``; higher loose
    indices are lowered by ``n``.  Values are closed in the common case,
    in which case no shifting is needed.
    """
    n = len(values)
    if n == 0:
        return body
    # callers that know their values are closed skip the scan
    closed = [True] * n if closed_values else [not _has_loose(v) for v in values]

    def go(t: Term, depth: int) -> Term:
        if isinstance(t, BVar):
            i = t.index
            if i < depth:
                return t
            j = i - depth
            if j < n:
                v = values[n - 1 - j]
                return v if closed[n - 1 - j] else shift(v, depth)
            return BVar(i - n)
        if isinstance(t, App):
            f = go(t.fun, depth)
            a = go(t.arg, depth)
            if f is t.fun and a is t.arg:
                return t
            return App(f, a)
        if isinstance(t, Abs):
            b = go(t.body, depth + 1)
            return t if b is t.body else Abs(b)
        return t

    return go(body, 0)


def instantiate(body: Term, value: Term) -> Term:
    return instantiate_many(body, (value,))


# -- binding store ----------------------------------------------------------

# level of a bookkeeping metavariable that may hold any eigenvariable
ANY_LEVEL = 1 << 62


class Store:
    """Metavariable bindings with a trail for backtracking."""

    def __init__(self) -> None:
        self.bindings: dict[int, Term] = {}
        self.trail: list[int] = []
        self.levels: dict[int, int] = {}
        self.counter = 0

    def fresh_meta(self, level: int | None = None) -> Meta:
        """A new metavariable; ``level=ANY_LEVEL`` lets it see every eigenvariable."""
        self.counter += 1
        return Meta(self.counter, self.counter if level is None else level)

    def fresh_eigen(self) -> Eigen:
        self.counter += 1
        return Eigen(self.counter)

    def bind(self, m: Meta, t: Term) -> None:
        assert m.id not in self.bindings
        self.bindings[m.id] = t
        self.levels[m.id] = m.level
        self.trail.append(m.id)

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        trail, bindings = self.trail, self.bindings
        while len(trail) > mark:
            del bindings[trail.pop()]

    def deref(self, t: Term) -> Term:
        while isinstance(t, Meta):
            v = self.bindings.get(t.id)
            if v is None:
                return t
            t = v
        return t

    def whnf(self, t: Term) -> Term:
        """Weak head normal form: dereference the head and beta-reduce."""
        t = self.deref(t)
        if not isinstance(t, App):
            return t
        head, args = unspine(t)
        h = self.deref(head)
        changed = h is not head
        while True:
            if isinstance(h, App):
                h2, more = unspine(h)
                h = self.deref(h2)
                args = more + args
                changed = True
            elif isinstance(h, Abs) and args:
                k = 0
                body = h
                while isinstance(body, Abs) and k < len(args):
                    body = body.body
                    k += 1
                h = self.deref(instantiate_many(body, args[:k]))
                args = args[k:]
                changed = True
            else:
                break
        if not changed:
            return t
        return app(h, *args)

    def spine(self, t: Term) -> tuple[Term, list[Term]]:
        return unspine(self.whnf(t))

    def resolve(self, t: Term) -> Term:
        """Replace bound metavariables throughout and beta-normalize."""
        t = self.whnf(t)
        if isinstance(t, App):
            head, args = unspine(t)
            return app(head, *[self.resolve(a) for a in args])
        if isinstance(t, Abs):
            b = self.resolve(t.body)
            return t if b is t.body else Abs(b)
        return t

    def audit(self) -> list[str]:
        """Scope-safety check: no binding mentions an eigenvariable its meta cannot see."""
        problems = []
        for mid, t in self.bindings.items():
            level = self.levels[mid]
            for e in eigens(self.resolve(t)):
                if e.id >= level:
                    problems.append(f"meta {mid}@{level} sees eigen {e.id}")
        return problems


def resolve(store: Store, t: Term) -> Term:
    return store.resolve(t)


def metas(t: Term) -> Iterator[Meta]:
    if isinstance(t, Meta):
        yield t
    elif isinstance(t, App):
        yield from metas(t.fun)
        yield from metas(t.arg)
    elif isinstance(t, Abs):
        yield from metas(t.body)


def eigens(t: Term) -> Iterator[Eigen]:
    if isinstance(t, Eigen):
        yield t
    elif isinstance(t, App):
        yield from eigens(t.fun)
        yield from eigens(t.arg)
    elif isinstance(t, Abs):
        yield from eigens(t.body)


def ground(store: Store, t: Term) -> bool:
    return next(metas(store.resolve(t)), None) is None


def alpha_eq(a: Term, b: Term) -> bool:
    """Equality of resolved terms; de Bruijn makes this structural."""
    return a == b


def import_term(t: Term, store: Store, mapping: dict[int, Meta] | None = None) -> Term:
    """Copy a resolved term into ``store``, renaming its metavariables apart."""
    if mapping is None:
        mapping = {}

    def go(t: Term) -> Term:
        if isinstance(t, Meta):
            m = mapping.get(t.id)
            if m is None:
                m = mapping[t.id] = store.fresh_meta()
            return m
        if isinstance(t, App):
            return App(go(t.fun), go(t.arg))
        if isinstance(t, Abs):
            return Abs(go(t.body))
        return t

    return go(t)


# -- subterms ---------------------------------------------------------------

_NEXT_EIGEN = [1 << 40]


def _scratch_eigen() -> Eigen:
    _NEXT_EIGEN[0] += 1
    return Eigen(_NEXT_EIGEN[0])


def subterms(s: Term) -> Iterator[Term]:
    """All closed subterm occurrences of a resolved term, outermost first.

    Abstractions are opened with a scratch eigenvariable; any occurrence
    mentioning it is skipped.
    """
    yield from _subterms(s, frozenset())


def _subterms(s: Term, hidden: frozenset) -> Iterator[Term]:
    if not hidden or not any(e.id in hidden for e in eigens(s)):
        yield s
    if isinstance(s, App):
        # argument positions only: a partial application is not a term of its own
        _, args = unspine(s)
        for a in args:
            yield from _subterms(a, hidden)
    elif isinstance(s, Abs):
        e = _scratch_eigen()
        yield from _subterms(instantiate(s.body, e), hidden | {e.id})


def subterm(t: Term, s: Term) -> bool:
    return any(u == t for u in subterms(s))


def proper_subterm(t: Term, s: Term) -> bool:
    if t == s:
        return False
    it = subterms(s)
    next(it)
    return any(u == t for u in it)


def prune_subsumed(items: Sequence[Term]) -> list[Term]:
    """Drop duplicates and every item that is a proper subterm of another."""
    seen: list[Term] = []
    for t in items:
        if t not in seen:
            seen.append(t)
    return [t for t in seen if not any(proper_subterm(t, u) for u in seen if u is not t)]


def distinct_subterms(universe: Sequence[Term], proper: bool = False) -> list[Term]:
    out: list[Term] = []
    for u in universe:
        it = subterms(u)
        if proper:
            next(it)
        for t in it:
            if t not in out:
                out.append(t)
    return out
