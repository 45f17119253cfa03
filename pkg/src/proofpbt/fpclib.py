"""Built-in certificate families.

Certificates are terms; :class:`Library` dispatches each callback on the
head constructor of the certificate it receives, so families compose
through pairing without knowing about each other.

    height H            bound on backchains along every branch
    sze In Out          bound on backchains and inits, threaded In -> Out
    max M               the full proof tree (records when M is a hole)
    A <c> B             both outlines at once
    random              uniform coin at each disjunction
    noweight / cases    weighted choice among a predicate's disjuncts
    collect In Out      existential witnesses, threaded In -> Out
    huniv U Rel         witnesses restricted to subterms of U
    trust               anything goes
"""

from __future__ import annotations

import random as _random
from typing import Iterable, Optional, Sequence

from .kernel import FPC
from .terms import (ANY_LEVEL, Abs, App, BVar, Const, Meta, Store, Term, app, const, distinct_subterms, metas,
                    unspine)
from .unify import unify


class MalformedBody(Exception):
    pass


class CertificateError(Exception):
    pass


class RandomSource:
    """A seeded bit stream.  ``split(i)`` derives an independent stream."""

    def __init__(self, seed=0, bits: Optional[Sequence[int]] = None):
        self.seed = seed
        self._rng = _random.Random(f"pbt:{seed}")
        self._script = list(bits) if bits is not None else None
        self._pos = 0
        self.drawn = 0

    @classmethod
    def scripted(cls, bits: Sequence[int]) -> "RandomSource":
        return cls(seed="scripted", bits=bits)

    def next_bit(self) -> int:
        self.drawn += 1
        if self._script is not None:
            if self._pos >= len(self._script):
                raise CertificateError("scripted bit stream exhausted")
            b = self._script[self._pos]
            self._pos += 1
            return b
        return self._rng.getrandbits(1)

    def next_7bits(self) -> int:
        n = 0
        for _ in range(7):
            n = (n << 1) | self.next_bit()
        return n

    def split(self, index: int) -> "RandomSource":
        return RandomSource(f"{self.seed}/{index}")


# -- certificate constructors ----------------------------------------------

def height(h: int) -> Term:
    return const("height", Const(h))


def sze(n: int, out: Term) -> Term:
    return const("sze", Const(n), out)


def max_(m: Term) -> Term:
    return const("max", m)


def pair(a: Term, b: Term) -> Term:
    return const("<c>", a, b)


def pair_all(*certs: Term) -> Term:
    out = certs[-1]
    for c in reversed(certs[:-1]):
        out = pair(c, out)
    return out


def collect(out: Term, acc: Term = Const("nil")) -> Term:
    return const("collect", acc, out)


def huniv(universe: Sequence[Term], relation: str = "subterm") -> Term:
    lst: Term = Const("nil")
    for t in reversed(list(universe)):
        lst = const("::", t, lst)
    return const("huniv", lst, Const(relation))


RANDOM = Const("random")
NOWEIGHT = Const("noweight")
TRUST = Const("trust")


def list_items(store: Store, t: Term) -> list[Term]:
    out = []
    t = store.whnf(t)
    while True:
        h, args = unspine(t)
        if h == Const("::") and len(args) == 2:
            out.append(args[0])
            t = store.whnf(args[1])
        elif h == Const("nil"):
            return out
        else:
            raise CertificateError("expected a list in certificate")


def _int(store: Store, t: Term) -> int:
    t = store.whnf(t)
    if isinstance(t, Const) and isinstance(t.name, int):
        return t.name
    raise CertificateError(f"certificate expects an integer, found {store.resolve(t)!r}")


def _unify_each(store: Store, a: Term, b: Term):
    m = store.mark()
    if unify(store, a, b):
        yield
        store.undo(m)


# -- the dispatching table --------------------------------------------------

class Library(FPC):
    """All built-in families behind one callback table.

    ``source`` feeds ``random`` and ``noweight``; weights come from the
    program being checked.
    """

    def __init__(self, source: Optional[RandomSource] = None):
        self.source = source or RandomSource(0)
        self._universes: dict = {}
        # huniv witnesses of the current branch, checked once they are ground
        self._pending: list[tuple[Term, dict, list[Term]]] = []
        self._indexes: dict = {}

    def _head(self, k, cert):
        cert = k.store.whnf(cert)
        h, args = unspine(cert)
        if not isinstance(h, Const):
            raise CertificateError("certificate is an unbound hole")
        return h.name, args

    # tt / eq / init share their shape: consume nothing, close the thread
    def _leaf(self, k, cert, node: Term, counts: bool):
        name, a = self._head(k, cert)
        st = k.store
        if name == "height" or name in ("random", "noweight", "trust", "huniv"):
            yield None
        elif name == "sze":
            n = _int(st, a[0])
            if counts:
                if n <= 0:
                    return
                n -= 1
            yield from _unify_each(st, a[1], Const(n))
        elif name == "collect":
            yield from _unify_each(st, a[1], a[0])
        elif name == "max":
            yield from _unify_each(st, a[0], node)
        elif name == "<c>":
            for _ in self._leaf(k, a[0], node, counts):
                yield from self._leaf(k, a[1], node, counts)
        elif name == "cases":
            yield None
        else:
            raise CertificateError(f"unknown certificate {name!r}")

    def on_tt(self, k, cert):
        return self._gate(k, self._leaf(k, cert, Const("mtt"), False))

    def on_eq(self, k, cert):
        return self._gate(k, self._leaf(k, cert, Const("meq"), False))

    def on_init(self, k, cert, index):
        return self._gate(k, self._leaf(k, cert, const("minit", Const(index)), True))

    # -- huniv witnesses --------------------------------------------------
    # A witness is not enumerated from the universe when its quantifier is
    # introduced: the clause's own equations usually fix it a step later.
    # It is recorded, rejected as soon as it is ground and outside the
    # universe, and only enumerated if still open when the proof is done.

    def _gate(self, k, gen):
        if self._pending and not self._universe_ok(k.store):
            return iter(())
        return gen

    def _universe_ok(self, st: Store) -> bool:
        for w, index, _ in self._pending:
            if not _fits_some(st, w, index):
                return False
        return True

    def _register(self, st: Store, cert: Term, witness: Term):
        cands = self.candidates(st, cert)
        self._pending.append((witness, self._index(cands), cands))
        try:
            yield cert
        finally:
            self._pending.pop()

    def on_done(self, k):
        st = k.store
        if not self._universe_ok(st):
            return
        yield from self._settle(st, 0)

    def _settle(self, st: Store, i: int):
        if i == len(self._pending):
            yield None
            return
        w, index, cands = self._pending[i]
        t = st.resolve(w)
        if next(metas(t), None) is None:
            if _fits_some(st, t, index):
                yield from self._settle(st, i + 1)
            return
        for c in cands:
            for _ in _unify_each(st, w, c):
                yield from self._settle(st, i + 1)

    def on_and(self, k, cert):
        name, a = self._head(k, cert)
        st = k.store
        if name in ("height", "random", "noweight", "trust", "huniv", "cases"):
            yield cert, cert
        elif name == "sze":
            m = st.fresh_meta()
            yield const("sze", a[0], m), const("sze", m, a[1])
        elif name == "collect":
            # the left conjunct may open binders whose witnesses end up here
            m = st.fresh_meta(level=ANY_LEVEL)
            yield const("collect", a[0], m), const("collect", m, a[1])
        elif name == "max":
            l, r = st.fresh_meta(), st.fresh_meta()
            for _ in _unify_each(st, a[0], const("mand", l, r)):
                yield max_(l), max_(r)
        elif name == "<c>":
            for x1, x2 in self.on_and(k, a[0]):
                for y1, y2 in self.on_and(k, a[1]):
                    yield pair(x1, y1), pair(x2, y2)
        else:
            raise CertificateError(f"unknown certificate {name!r}")

    def on_or(self, k, cert):
        name, a = self._head(k, cert)
        st = k.store
        if name in ("height", "sze", "collect", "huniv", "trust"):
            yield cert, 1
            yield cert, 2
        elif name == "random":
            yield cert, 1 if self.source.next_bit() == 0 else 2
        elif name == "noweight":
            yield cert, 1 if self.source.next_bit() == 0 else 2
        elif name == "cases":
            rnd = _int(st, a[0])
            ws = [_int(st, w) for w in list_items(st, a[1])]
            acc = _int(st, a[2])
            if not ws:
                raise MalformedBody("more disjuncts than weights")
            w = ws[0]
            total = acc + sum(ws)
            if rnd * total < 128 * (acc + w):
                yield NOWEIGHT, 1
            else:
                rest: Term = Const("nil")
                for x in reversed(ws[1:]):
                    rest = const("::", Const(x), rest)
                yield const("cases", Const(rnd), rest, Const(acc + w)), 2
        elif name == "max":
            for side in (1, 2):
                m = st.fresh_meta()
                for _ in _unify_each(st, a[0], const("mor", Const(side), m)):
                    yield max_(m), side
        elif name == "<c>":
            for x, s in self.on_or(k, a[0]):
                for y, t in self.on_or(k, a[1]):
                    if s == t:
                        yield pair(x, y), s
        else:
            raise CertificateError(f"unknown certificate {name!r}")

    def on_some(self, k, cert, witness):
        name, a = self._head(k, cert)
        st = k.store
        if name in ("height", "sze", "random", "noweight", "trust", "cases"):
            yield cert
        elif name == "collect":
            yield const("collect", const("::", witness, a[0]), a[1])
        elif name == "huniv":
            yield from self._register(st, cert, witness)
        elif name == "max":
            m = st.fresh_meta()
            for _ in _unify_each(st, a[0], const("msome", witness, m)):
                yield max_(m)
        elif name == "<c>":
            for x in self.on_some(k, a[0], witness):
                for y in self.on_some(k, a[1], witness):
                    yield pair(x, y)
        else:
            raise CertificateError(f"unknown certificate {name!r}")

    def _index(self, cands: list[Term]) -> dict:
        key = id(cands)
        got = self._indexes.get(key)
        if got is None:
            got = {}
            for c in cands:
                got.setdefault(_shape(c), []).append(c)
            self._indexes[key] = got
        return got

    def candidates(self, st: Store, cert: Term) -> list[Term]:
        _, a = unspine(st.whnf(cert))
        universe = tuple(st.resolve(t) for t in list_items(st, a[0]))
        rel = st.whnf(a[1])
        proper = rel == Const("proper")
        key = (universe, proper)
        got = self._universes.get(key)
        if got is None:
            got = self._universes[key] = distinct_subterms(universe, proper)
        return got

    def on_all(self, k, cert):
        name, a = self._head(k, cert)
        st = k.store
        if name == "max":
            body = st.fresh_meta()
            for _ in _unify_each(st, a[0], const("mall", body)):
                yield lambda e, body=body: max_(App(body, e))
        elif name == "<c>":
            for f in self.on_all(k, a[0]):
                for g in self.on_all(k, a[1]):
                    yield lambda e, f=f, g=g: pair(f(e), g(e))
        else:
            self._head_known(name)
            yield lambda e: cert

    def _unary(self, k, cert, node: str):
        name, a = self._head(k, cert)
        st = k.store
        if name == "max":
            m = st.fresh_meta()
            for _ in _unify_each(st, a[0], const(node, m)):
                yield max_(m)
        elif name == "<c>":
            for x in self._unary(k, a[0], node):
                for y in self._unary(k, a[1], node):
                    yield pair(x, y)
        else:
            self._head_known(name)
            yield cert

    def _head_known(self, name) -> None:
        if name not in ("height", "sze", "random", "noweight", "trust", "huniv", "cases",
                        "collect"):
            raise CertificateError(f"unknown certificate {name!r}")

    def on_imp(self, k, cert):
        return self._unary(k, cert, "mimp")

    def on_limp(self, k, cert):
        return self._unary(k, cert, "mlimp")

    def on_bang(self, k, cert):
        return self._unary(k, cert, "mbang")

    def on_backchain(self, k, atom, cert):
        name, a = self._head(k, cert)
        st = k.store
        if self._pending and not self._universe_ok(st):
            return
        if name == "height":
            h = _int(st, a[0])
            if h > 0:
                yield height(h - 1)
        elif name == "sze":
            n = _int(st, a[0])
            if n > 0:
                yield const("sze", Const(n - 1), a[1])
        elif name == "max":
            m = st.fresh_meta()
            for _ in _unify_each(st, a[0], const("mbc", m)):
                yield max_(m)
        elif name == "noweight":
            h, _ = unspine(st.whnf(atom))
            pred = h.name if isinstance(h, Const) else None
            ws = k.prog.weights.get(pred)
            if ws is None:
                ws = [1] * max(1, k.prog.disjuncts(pred))
            rnd = self.source.next_7bits()
            lst: Term = Const("nil")
            for w in reversed(ws):
                lst = const("::", Const(w), lst)
            yield const("cases", Const(rnd), lst, Const(0))
        elif name == "<c>":
            for x in self.on_backchain(k, atom, a[0]):
                for y in self.on_backchain(k, atom, a[1]):
                    yield pair(x, y)
        elif name == "cases":
            raise MalformedBody("weighted choice reached an atom before a disjunction")
        else:
            self._head_known(name)
            yield cert


def _shape(t: Term):
    h, args = unspine(t)
    if isinstance(h, Abs):
        return ("abs", len(args))
    return (h, len(args))


def _fits(st: Store, t: Term, c: Term) -> bool:
    """Can ``t`` still become the closed term ``c``?  Metavariables fit anything."""
    t = st.whnf(t)
    if isinstance(t, Meta):
        return True
    if isinstance(t, Abs):
        return isinstance(c, Abs) and _fits(st, t.body, c.body)
    h, args = unspine(t)
    if isinstance(h, Meta):
        return True
    ch, cargs = unspine(c)
    if h != ch or len(args) != len(cargs):
        return False
    return all(_fits(st, a, b) for a, b in zip(args, cargs))


def _fits_some(st: Store, w: Term, index: dict) -> bool:
    t = st.whnf(w)
    h, args = unspine(t)
    if isinstance(h, Meta):
        return True
    for c in index.get(_shape(t), ()):
        if _fits(st, t, c):
            return True
    return False


def default_fpc(seed=0) -> Library:
    return Library(RandomSource(seed))


# -- reading results back ---------------------------------------------------

def collected_items(store: Store, cert: Term) -> list[Term]:
    """Items of a finished ``collect`` certificate, in proof order."""
    return list(reversed([store.resolve(t) for t in list_items(store, cert)]))


def find_component(store: Store, cert: Term, name: str) -> Optional[Term]:
    """The first component with head ``name`` inside a pairing."""
    cert = store.whnf(cert)
    h, args = unspine(cert)
    if h == Const(name):
        return cert
    if h == Const("<c>"):
        return find_component(store, args[0], name) or find_component(store, args[1], name)
    return None


def max_height(tree: Term) -> int:
    """The decide-depth of a resolved MaxTree: backchains on the longest branch."""
    h, args = unspine(tree)
    if isinstance(h, Abs):
        return max_height(h.body)
    if not isinstance(h, Const):
        return 0
    name = h.name
    if name == "mbc":
        return 1 + max_height(args[0])
    if name == "mand":
        return max(max_height(args[0]), max_height(args[1]))
    if name in ("mor", "msome"):
        return max_height(args[1])
    if name in ("mimp", "mlimp", "mbang"):
        return max_height(args[0])
    if name == "mall":
        return max_height(args[0].body if isinstance(args[0], Abs) else args[0])
    return 0
