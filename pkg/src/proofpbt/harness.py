"""Generate-and-test driver: properties, deepening, sampling, shrinking."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

from .engine import DEFAULT_FUEL, Fuel, FuelExhausted, Machine, NonGroundNegation, naf
from .fpclib import (Library, RandomSource, collected_items, find_component, height, huniv,
                     max_, max_height, pair, pair_all, sze, NOWEIGHT)
from .syntax import TT, Program, PropertySpec, parse_cert, parse_goal, parse_term, pretty
from .terms import (ANY_LEVEL, Abs, App, Const, Eigen, Meta, Store, Term, eigens, import_term,
                    prune_subsumed)
from .terms import metas as metas_of
from .unify import unify

log = logging.getLogger(__name__)


class PropertyError(Exception):
    pass



class ShrinkUnsupported(PropertyError):
    pass


@dataclass
class Counterexample:
    prop: str
    bindings: dict[str, Term]
    cert: Optional[Term] = None
    bound: Optional[int] = None
    seed: Optional[object] = None
    provenance: str = ""

    def printed(self) -> dict[str, str]:
        return printed_bindings(self.bindings)

    def key(self) -> tuple:
        return tuple(sorted((k, repr(v)) for k, v in self.bindings.items()))

    def height(self) -> Optional[int]:
        return max_height(self.cert) if self.cert is not None else None


def printed_bindings(bindings: dict[str, Term]) -> dict[str, str]:
    """Print bindings, naming leftover metavariables _1, _2, .. by first appearance."""
    names: dict[int, str] = {}
    for v in bindings.values():
        for m in metas_of(v):
            names.setdefault(m.id, f"_{len(names) + 1}")
    return {k: pretty(v, names) for k, v in bindings.items()}


@dataclass
class Limits:
    fuel: int = DEFAULT_FUEL
    gen_fuel: Optional[int] = None
    max_counterexamples: Optional[int] = None


@dataclass
class RunStats:
    generated: int = 0
    discarded: int = 0
    inconclusive: int = 0


def _spec(prog: Program, spec: Union[str, PropertySpec]) -> PropertySpec:
    return prog.prop(spec) if isinstance(spec, str) else spec


def _visible(metas: dict[str, Meta]) -> dict[str, Meta]:
    return {n: m for n, m in metas.items() if not n.endswith("#")}


def _cert_term(prog: Program, cert, store: Store) -> Term:
    if isinstance(cert, str):
        return parse_cert(cert, prog, store)[0]
    return cert


def _linear(prog: Program, spec: PropertySpec) -> bool:
    return spec.mode == "linear" or prog.mode == "linear"


def run_property(prog: Program, spec: Union[str, PropertySpec], cert, fpc: Optional[Library] = None,
                 limits: Optional[Limits] = None, *, elaborate: bool = True,
                 stats: Optional[RunStats] = None, bound: Optional[int] = None,
                 seed=None, fixed: Optional[dict[str, Term]] = None,
                 first_only: bool = False) -> Iterator[Counterexample]:
    """Counterexamples of ``spec`` among the generator's proofs under ``cert``.

    Each generator proof is extended by every solution of the when-goal,
    and a counterexample is reported when the then-goal finitely fails.
    ``fixed`` pre-binds property variables before generation.
    """
    spec = _spec(prog, spec)
    limits = limits or Limits()
    stats = stats if stats is not None else RunStats()
    fpc = fpc or Library(RandomSource(0 if seed is None else seed))
    store = Store()
    gen, metas = spec.gen.instantiate(store)
    when = spec.when.instantiate(store, metas)[0] if spec.when is not None else TT
    then = spec.then.instantiate(store, metas)[0]
    names = {m.id: n for n, m in metas.items()}
    visible = _visible(metas)
    if fixed:
        for n, t in fixed.items():
            if not unify(store, metas[n], import_term(t, store)):
                return
    c = _cert_term(prog, cert, store)
    tree = None
    if elaborate:
        tree = store.fresh_meta()
        c = pair(c, max_(tree))
    linear = _linear(prog, spec)
    gen_fuel = Fuel(limits.gen_fuel) if limits.gen_fuel else Fuel(10 ** 12)
    machine = Machine(prog, store, fpc=fpc, linear=linear, fuel=gen_fuel)
    seen = set()
    found = 0
    for _ in machine.run(gen, c):
        stats.generated += 1
        mark = store.mark()
        fuel = Fuel(limits.fuel)
        tester = Machine(prog, store, linear=linear, fuel=fuel)
        runner = tester.run(when)
        try:
            for _ in runner:
                resolved = store.resolve(then)
                # large test instances pay for their size, so an endless
                # stream of ever longer when-answers runs out of fuel
                fuel.spend(term_size(resolved) // 4)
                x = next(metas_of(resolved), None)
                if x is not None:
                    raise NonGroundNegation(then, x, names.get(x.id)) from PropertyError(
                        f"property {spec.name}: then-goal is not ground")
                if naf(prog, [], then, store=store, fuel=fuel, linear=linear):
                    cex = Counterexample(
                        spec.name, {n: store.resolve(m) for n, m in visible.items()},
                        store.resolve(tree) if tree is not None else None, bound, seed,
                        _provenance(cert, bound, seed))
                    k = cex.key()
                    if k not in seen:
                        seen.add(k)
                        found += 1
                        yield cex
                        if first_only or (limits.max_counterexamples is not None
                                          and found >= limits.max_counterexamples):
                            return
        except FuelExhausted:
            stats.inconclusive += 1
            log.info("property %s: fuel exhausted on a generated case; skipped", spec.name)
        finally:
            runner.close()
            store.undo(mark)
        if first_only and found:
            return


def term_size(t: Term) -> int:
    n, stack = 0, [t]
    while stack:
        u = stack.pop()
        n += 1
        if isinstance(u, App):
            stack.append(u.fun)
            stack.append(u.arg)
        elif isinstance(u, Abs):
            stack.append(u.body)
    return n


def _provenance(cert, bound, seed) -> str:
    if isinstance(cert, str):
        text = cert
    else:
        text = pretty(cert)
    parts = [f"cert {text}"]
    if bound is not None:
        parts.append(f"bound {bound}")
    if seed is not None:
        parts.append(f"seed {seed}")
    return ", ".join(parts)


def deepen(prog: Program, spec: Union[str, PropertySpec], lo: int, hi: int,
           size_factor: Optional[int] = None, limits: Optional[Limits] = None,
           stats: Optional[RunStats] = None) -> Iterator[Counterexample]:
    """Run the property at heights ``lo..hi``; each counterexample once, at its first bound."""
    if not 0 <= lo <= hi:
        raise ValueError("deepen needs 0 <= lo <= hi")
    seen = set()
    for h in range(lo, hi + 1):
        cert = f"height {h}" if size_factor is None else f"height {h} <c> sze {h * size_factor} _"
        for cex in run_property(prog, spec, cert, limits=limits, stats=stats, bound=h):
            k = cex.key()
            if k in seen:
                continue
            seen.add(k)
            yield cex
            if limits is not None and limits.max_counterexamples is not None \
                    and len(seen) >= limits.max_counterexamples:
                return


@dataclass
class SampleReport:
    values: list[dict[str, Term]] = field(default_factory=list)
    counterexamples: list[Counterexample] = field(default_factory=list)
    discarded: int = 0
    attempts: int = 0


def sample(prog: Program, spec_or_goal, n: int, seed=0, limits: Optional[Limits] = None,
           cert="noweight") -> SampleReport:
    """``n`` independent weighted-random generation attempts.

    For a property each generated value also runs the test pipeline; for a
    plain goal the generated bindings are reported.
    """
    limits = limits or Limits()
    report = SampleReport()
    root = RandomSource(seed)
    prop = None
    if isinstance(spec_or_goal, PropertySpec) or (isinstance(spec_or_goal, str)
                                                  and _has_prop(prog, spec_or_goal)):
        prop = _spec(prog, spec_or_goal)
    for i in range(n):
        report.attempts += 1
        fpc = Library(root.split(i))
        store = Store()
        if prop is not None:
            gen, metas = prop.gen.instantiate(store)
            linear = _linear(prog, prop)
        else:
            q = parse_goal(spec_or_goal, prog, store)
            gen, metas = q.term, q.variables
            linear = prog.mode == "linear"
        tree = store.fresh_meta()
        c = pair(_cert_term(prog, cert, store), max_(tree))
        machine = Machine(prog, store, fpc=fpc, linear=linear,
                          fuel=Fuel(limits.gen_fuel or 100_000))
        runner = machine.run(gen, c)
        try:
            got = next(runner, None)
        except FuelExhausted:
            got = None
        finally:
            runner.close()
        if got is None:
            report.discarded += 1
            continue
        bindings = {k: store.resolve(m) for k, m in _visible(metas).items()}
        report.values.append(bindings)
        if prop is None:
            continue
        stats = RunStats()
        for cex in run_property(prog, prop, pretty_tree_cert(store, tree), limits=limits,
                                stats=stats, elaborate=False, seed=(seed, i), first_only=True,
                                fixed=bindings):
            cex.cert = store.resolve(tree)
            cex.provenance = f"cert {cert if isinstance(cert, str) else pretty(cert)}, seed {seed}/{i}"
            report.counterexamples.append(cex)
        if stats.inconclusive:
            report.discarded += 1
    return report


def pretty_tree_cert(store: Store, tree: Term) -> Term:
    return max_(store.resolve(tree))


def _has_prop(prog: Program, name: str) -> bool:
    try:
        prog.prop(name)
        return True
    except KeyError:
        return False


def elaborate(prog: Program, spec: Union[str, PropertySpec], bindings: dict[str, Term],
              bound: int = 12) -> Optional[Term]:
    """Rebuild a max tree for a generator proof of fixed bindings."""
    spec = _spec(prog, spec)
    store = Store()
    gen, metas = spec.gen.instantiate(store)
    for n, t in bindings.items():
        if not unify(store, metas[n], import_term(t, store)):
            return None
    tree = store.fresh_meta()
    c = pair(height(bound), max_(tree))
    machine = Machine(prog, store, fpc=Library(), linear=_linear(prog, spec))
    for _ in machine.run(gen, c):
        return store.resolve(tree)
    return None


def collect_items(prog: Program, spec: Union[str, PropertySpec], cex: Counterexample) -> list[Term]:
    """Witnesses of the counterexample's generator proof, replayed from its tree."""
    spec = _spec(prog, spec)
    store = Store()
    gen, metas = spec.gen.instantiate(store)
    for n, t in cex.bindings.items():
        unify(store, metas[n], import_term(t, store))
    # witnesses under a binder mention its eigenvariable, so the output
    # list must be allowed to see every eigenvariable the replay creates
    out = store.fresh_meta(level=ANY_LEVEL)
    c = pair(max_(import_term(cex.cert, store)), const_collect(out))
    machine = Machine(prog, store, fpc=Library(), linear=_linear(prog, spec))
    for _ in machine.run(gen, c):
        return collected_items(store, out)
    raise PropertyError("counterexample certificate does not replay")


def const_collect(out: Term) -> Term:
    from .fpclib import collect
    return collect(out)


def shrink(prog: Program, spec: Union[str, PropertySpec], cex: Counterexample,
           limits: Optional[Limits] = None, max_rounds: int = 64) -> Counterexample:
    """Search for a smaller counterexample among subterms of the proof's witnesses.

    Each round lowers the height bound by one with witnesses drawn from
    subterms of the current items; once that fails, one pass with proper
    subterms at the same height is tried.  The result is a local minimum.
    """
    spec = _spec(prog, spec)
    if cex.cert is None:
        tree = elaborate(prog, spec, cex.bindings)
        if tree is None:
            raise PropertyError("cannot elaborate counterexample")
        cex = Counterexample(cex.prop, cex.bindings, tree, cex.bound, cex.seed, cex.provenance)
    current = cex
    for _ in range(max_rounds):
        items = prune_subsumed(collect_items(prog, spec, current))
        if any(True for t in items for _ in eigens(t)):
            raise ShrinkUnsupported(f"property {spec.name}: witnesses mention eigenvariables")
        h = current.height()
        better = None
        if h > 0:
            cert = pair_all(huniv(items, "subterm"), height(h - 1))
            better = next(iter(run_property(prog, spec, cert, limits=limits, first_only=True,
                                            bound=h - 1)), None)
        if better is None:
            cert = pair_all(huniv(items, "proper"), height(h))
            better = next(iter(run_property(prog, spec, cert, limits=limits, first_only=True,
                                            bound=h)), None)
            if better is not None and better.key() == current.key():
                better = None
        if better is None:
            return current
        better.provenance = f"shrunk from {cex.provenance}" if cex.provenance else "shrunk"
        current = better
    return current


def replay(prog: Program, spec: Union[str, PropertySpec], bindings: dict[str, Union[Term, str]],
           limits: Optional[Limits] = None) -> bool:
    """Re-check stored bindings: the generator accepts them and the test fails."""
    spec = _spec(prog, spec)
    limits = limits or Limits()
    store = Store()
    fixed = {n: (parse_term(t, prog, store) if isinstance(t, str) else t)
             for n, t in bindings.items()}
    for _ in run_property(prog, spec, "trust", fpc=Library(), limits=limits, elaborate=False,
                          fixed=fixed, first_only=True):
        return True
    return False
