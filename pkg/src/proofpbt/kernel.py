"""The certificate-checking kernel.

Checking runs the interpreter's search with every inference first
consulting the callbacks of an FPC.  A callback is a generator; each value
it yields is one way the certificate allows the rule to be applied,
together with the certificates for the premises.  Callbacks that bind
metavariables before yielding undo those bindings when resumed.
"""

from __future__ import annotations

from typing import Iterator, Optional, Sequence

from .engine import Fuel, Machine, Solution, _emit, _query
from .syntax import Program, parse_cert
from .terms import Store, Term


class FPC:
    """The permissive FPC: every rule is allowed, certificates pass through.

    Subclasses override the callbacks they care about.  ``k`` is the
    running machine (``k.store``, ``k.prog``).
    """

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
        yield None

    def on_done(self, k):
        """Called once the whole proof is built; may refuse or branch."""
        yield None


def _prepare(prog: Program, goal, cert, store: Optional[Store]):
    q = _query(prog, goal, store)
    if isinstance(cert, str):
        cert, _ = parse_cert(cert, prog, q.store)
    return q, cert


def check(fpc: FPC, prog: Program, cert, hypotheses: Sequence[Term], goal, *,
          store: Optional[Store] = None, fuel: Optional[Fuel] = None,
          limit: Optional[int] = None) -> Iterator[Solution]:
    """Enumerate the proofs of ``goal`` that fit the outline ``cert``."""
    q, c = _prepare(prog, goal, cert, store)
    machine = Machine(prog, q.store, fpc=fpc, linear=False, fuel=fuel)
    n = 0
    for _ in machine.run(q.term, c, hyps=hypotheses):
        yield _emit(q, cert=c)
        n += 1
        if limit is not None and n >= limit:
            return


def ll_check(fpc: FPC, prog: Program, cert, in_ctx: Sequence, goal, *,
             store: Optional[Store] = None, fuel: Optional[Fuel] = None,
             limit: Optional[int] = None) -> Iterator[Solution]:
    """The linear counterpart of :func:`check`."""
    q, c = _prepare(prog, goal, cert, store)
    machine = Machine(prog, q.store, fpc=fpc, linear=True, fuel=fuel)
    n = 0
    for out in machine.run(q.term, c, ctx=tuple(in_ctx)):
        yield _emit(q, out, cert=c, linear=True)
        n += 1
        if limit is not None and n >= limit:
            return
