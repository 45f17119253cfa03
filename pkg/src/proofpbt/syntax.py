"""Specification files, goals and certificates: parsing, printing, completion.

Goals are ordinary terms built from reserved connective constants, so a
goal can be passed around as data (continuations in the linear corpus
rely on this).  Clause variables are parsed as placeholder metavariables
with negative ids and abstracted into de Bruijn binders afterwards.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .terms import (ANY_LEVEL, Abs, App, BVar, Const, Eigen, Meta, Store, Term, app, const,
                    instantiate_many, unspine)

TT = Const("tt")
FF = Const("ff")
CONNECTIVES = {"tt": 0, "ff": 0, "=": 2, ",": 2, ";": 2, "some": 1, "pi": 1,
               "=>": 2, "-o": 2, "!": 1}
BUILTIN_CTORS = {"nil": 0, "::": 2, "->": 2}
CERT_CTORS = {"height", "sze", "max", "<c>", "random", "noweight", "cases", "collect",
              "huniv", "trust", "subterm", "proper", "mtt", "meq", "mand", "mor",
              "msome", "mbc", "minit", "mimp", "mall", "mlimp", "mbang"}
MODES = ("horn", "hh", "linear")


class SpecError(Exception):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.col = col


class ParseError(SpecError):
    pass


class ArityError(SpecError):
    pass


class UnknownConstructor(SpecError):
    pass


class WeightsError(SpecError):
    pass


class ModeError(SpecError):
    pass


# -- program data -----------------------------------------------------------

@dataclass(frozen=True)
class Clause:
    """A clause ``forall x1..xn. body => head``; both sides use BVar(n-1..0)."""
    nvars: int
    head: Term
    body: Term


@dataclass(frozen=True)
class Template:
    """A goal closed over named variables (BVar indices, first name outermost)."""
    names: tuple[str, ...]
    body: Term

    def instantiate(self, store: Store, metas: Optional[dict[str, Meta]] = None):
        metas = {} if metas is None else metas
        vals = []
        for n in self.names:
            if n not in metas:
                metas[n] = store.fresh_meta()
            vals.append(metas[n])
        return instantiate_many(self.body, vals), metas


@dataclass(frozen=True)
class PropertySpec:
    name: str
    gen: Template
    when: Optional[Template]
    then: Template
    mode: str

    @property
    def variables(self) -> tuple[str, ...]:
        return self.gen.names


@dataclass
class Program:
    constructors: dict[str, int] = field(default_factory=dict)
    arities: dict[str, int] = field(default_factory=dict)
    predicates: dict[str, Clause] = field(default_factory=dict)
    source: dict[str, list[Clause]] = field(default_factory=dict)
    weights: dict[str, list[int]] = field(default_factory=dict)
    properties: dict[str, PropertySpec] = field(default_factory=dict)
    axioms: set[str] = field(default_factory=set)
    mode: str = "hh"

    def disjuncts(self, pred: str) -> int:
        clause = self.predicates.get(pred)
        if clause is None:
            return 0
        return len(or_list(clause.body))

    def prop(self, name: str) -> PropertySpec:
        if name in self.properties:
            return self.properties[name]
        for candidate in (f"prop_{name}", name.removeprefix("prop_")):
            if candidate in self.properties:
                return self.properties[candidate]
        raise KeyError(f"no property named {name!r}")


def or_list(body: Term) -> list[Term]:
    out = []
    while True:
        h, args = unspine(body)
        if h == Const(";") and len(args) == 2:
            out.append(args[0])
            body = args[1]
        else:
            if body != FF:
                out.append(body)
            return out


# -- lexer ------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<int>\d+)
  | (?P<op>:-|:=|::|=>|->|-o(?![A-Za-z0-9_'])|<c>|\\|\(|\)|\[|\]|,|;|\.|=|!|-|:)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks = []
    pos, line, lstart = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            toks.append(Token(kind, s, line, pos - lstart + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            lstart = pos + s.rindex("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", line, pos - lstart + 1))
    return toks


def _is_var(name: str) -> bool:
    return name[0].isupper() or name[0] == "_"


# -- parser -----------------------------------------------------------------

class _Parser:
    """Recursive descent over one clause or goal at a time.

    ``known`` decides whether a lowercase identifier is a constant; unknown
    names are reported by the caller after the whole file is read.
    """

    def __init__(self, toks: list[Token], pos: int = 0):
        self.toks = toks
        self.pos = pos
        self.vars: dict[str, Meta] = {}
        self.var_order: list[str] = []
        self.anon = 0
        self.scopes: list[str] = []
        self.consts: list[tuple[str, int, Token]] = []

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("op", "ident") and t.text == text

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text or t.kind not in ("op", "ident"):
            found = t.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", t.line, t.col)
        return t

    def var(self, name: str) -> Meta:
        if name == "_":
            self.anon += 1
            name = f"_{self.anon}#"
        if name not in self.vars:
            self.vars[name] = Meta(-(len(self.vars) + 1), 0)
            self.var_order.append(name)
        return self.vars[name]

    # goals: ; < , < => -o < ! some pi < = < term
    def goal(self) -> Term:
        left = self.conj()
        if self.at(";"):
            self.next()
            return const(";", left, self.goal())
        return left

    def conj(self) -> Term:
        left = self.imp()
        if self.at(","):
            self.next()
            return const(",", left, self.conj())
        return left

    def imp(self) -> Term:
        left = self.unary()
        if self.at("=>") or self.at("-o"):
            op = self.next()
            _check_atomic(left, op)
            return const(op.text, left, self.imp())
        return left

    def unary(self) -> Term:
        if self.at("!"):
            self.next()
            return const("!", self.unary())
        if (self.at("some") or self.at("pi")) and self.peek(2).text == "\\":
            q = self.next().text
            return const(q, self.binder())
        return self.eq()

    def eq(self) -> Term:
        left = self.term()
        if self.at("="):
            self.next()
            return const("=", left, self.term())
        return left

    def binder(self) -> Term:
        name = self.next()
        if name.kind != "ident":
            raise ParseError("expected a bound variable name", name.line, name.col)
        self.expect("\\")
        self.scopes.append(name.text)
        body = self.goal()
        self.scopes.pop()
        return Abs(_bind_name(body, name.text))

    def term(self) -> Term:
        left = self.cons()
        if self.at("->"):
            self.next()
            return const("->", left, self.term())
        return left

    def cons(self) -> Term:
        left = self.application()
        if self.at("::"):
            self.next()
            return const("::", left, self.cons())
        return left

    def application(self) -> Term:
        head_tok = self.peek()
        head = self.primary()
        args = []
        while self._starts_primary():
            if self.peek().kind == "ident" and self.peek(1).text == "\\":
                args.append(self.binder())
                break
            args.append(self.primary())
        if args and isinstance(head, Const) and not isinstance(head, _Named) and isinstance(head.name, str):
            for i in range(len(self.consts) - 1, -1, -1):
                if self.consts[i][2] is head_tok:
                    self.consts[i] = (head.name, len(args), head_tok)
                    break
        return app(head, *args)

    def _starts_primary(self) -> bool:
        t = self.peek()
        if t.kind == "int":
            return True
        if t.kind == "ident":
            return t.text not in ("some", "pi") or self.peek(2).text != "\\"
        return t.text in ("(", "[")

    def primary(self) -> Term:
        t = self.peek()
        if t.kind == "ident" and self.peek(1).text == "\\":
            return self.binder()
        t = self.next()
        if t.kind == "int":
            return Const(int(t.text))
        if t.kind == "ident":
            if t.text in self.scopes:
                return _Named(t.text)
            if _is_var(t.text):
                return self.var(t.text)
            self.consts.append((t.text, 0, t))
            return Const(t.text)
        if t.text == "(":
            if self.at("-") and self.peek(1).kind == "int":
                self.next()
                n = self.next()
                self.expect(")")
                return Const(-int(n.text))
            inner = self.goal()
            self.expect(")")
            return inner
        if t.text == "-" and self.peek().kind == "int":
            return Const(-int(self.next().text))
        if t.text == "[":
            items = []
            if not self.at("]"):
                items.append(self.term())
                while self.at(","):
                    self.next()
                    items.append(self.term())
            self.expect("]")
            out: Term = Const("nil")
            for it in reversed(items):
                out = const("::", it, out)
            return out
        raise ParseError(f"unexpected token {t.text or 'end of input'!r}", t.line, t.col)


class _Named(Const):
    """A binder occurrence before it is turned into a de Bruijn index."""
    __slots__ = ()


def _bind_name(t: Term, name: str, depth: int = 0) -> Term:
    if isinstance(t, _Named):
        return BVar(depth) if t.name == name else t
    if isinstance(t, App):
        return App(_bind_name(t.fun, name, depth), _bind_name(t.arg, name, depth))
    if isinstance(t, Abs):
        return Abs(_bind_name(t.body, name, depth + 1))
    return t


def _check_atomic(t: Term, op: Token) -> None:
    h, _ = unspine(t)
    if isinstance(h, Const) and h.name in CONNECTIVES and h.name not in ("tt", "ff"):
        raise ParseError(f"antecedent of {op.text!r} must be atomic", op.line, op.col)


def abstract_placeholders(t: Term, ids: list[int]) -> Term:
    """Replace placeholder metas ``ids`` (first outermost) by bound indices."""
    n = len(ids)
    index = {pid: i for i, pid in enumerate(ids)}

    def go(t: Term, depth: int) -> Term:
        if isinstance(t, Meta) and t.id in index:
            return BVar(n - 1 - index[t.id] + depth)
        if isinstance(t, App):
            return App(go(t.fun, depth), go(t.arg, depth))
        if isinstance(t, Abs):
            return Abs(go(t.body, depth + 1))
        return t

    return go(t, 0)


# -- Clark completion -------------------------------------------------------

def compile_clauses(pred: str, arity: int, clauses: list[tuple[Term, Term, list[Meta]]]) -> Clause:
    """Complete the surface clauses of one predicate into a single clause.

    Each surface clause is ``(head, body, variables)`` with placeholder
    metas.  The result has head ``pred Y1 .. Yn`` and body
    ``D1 ; D2 ; .. ; ff`` where each ``Di`` existentially closes the
    clause variables not eliminated by renaming onto a ``Yj``.
    """
    base = -10_000_000
    ys = [Meta(base - j, 0) for j in range(arity)]
    disjuncts = []
    for head, body, variables in clauses:
        _, targs = unspine(head)
        rename: dict[int, Meta] = {}
        eqs = []
        for j, tj in enumerate(targs):
            if isinstance(tj, Meta) and tj.id < 0 and tj.id not in rename:
                rename[tj.id] = ys[j]
            else:
                eqs.append(const("=", ys[j], tj))
        d = body
        for eq in reversed(eqs):
            d = const(",", eq, d)
        d = _rename(d, rename)
        for v in reversed([v for v in variables if v.id not in rename]):
            d = const("some", Abs(abstract_placeholders(d, [v.id])))
        disjuncts.append(d)
    out: Term = FF
    for d in reversed(disjuncts):
        out = const(";", d, out)
    return Clause(arity, const(pred, *[BVar(arity - 1 - j) for j in range(arity)]),
                  abstract_placeholders(out, [y.id for y in ys]))


def _rename(t: Term, mapping: dict[int, Meta]) -> Term:
    if not mapping:
        return t
    if isinstance(t, Meta):
        return mapping.get(t.id, t)
    if isinstance(t, App):
        return App(_rename(t.fun, mapping), _rename(t.arg, mapping))
    if isinstance(t, Abs):
        return Abs(_rename(t.body, mapping))
    return t


# -- file parsing -----------------------------------------------------------

def parse_program(text: str | Iterable[str], mode: Optional[str] = None) -> Program:
    """Parse one or more specification texts into a compiled program.

    ``mode``, when given, overrides any ``mode`` directive in the texts.
    """
    if mode is not None and mode not in MODES:
        raise ModeError(f"unknown mode {mode!r}")
    texts = [text] if isinstance(text, str) else list(text)
    prog = Program()
    surface: dict[str, list[tuple[Term, Term, list[Meta]]]] = {}
    checks: list[tuple[str, int, Token]] = []
    weight_decls: list[tuple[str, list[int], Token]] = []
    prop_decls: list[tuple[str, _Parser, Term, Optional[Term], Term]] = []
    body_modes: list[tuple[Term, Token]] = []
    declared_preds: dict[str, int] = {}
    for src in texts:
        toks = tokenize(src)
        p = _Parser(toks)
        while p.peek().kind != "eof":
            start = p.peek()
            if start.text == "ctor" and p.peek(1).kind in ("ident", "op") and p.peek(2).kind == "int":
                p.next()
                name = p.next().text
                arity = int(p.next().text)
                p.expect(".")
                if name in CONNECTIVES or name in CERT_CTORS:
                    raise SpecError(f"{name!r} is reserved", start.line, start.col)
                prog.constructors[name] = arity
                continue
            if start.text == "pred" and p.peek(2).kind == "int":
                p.next()
                name = p.next().text
                declared_preds[name] = int(p.next().text)
                p.expect(".")
                continue
            if start.text == "axiom" and p.peek(1).kind == "ident" and p.peek(2).text == ".":
                p.next()
                prog.axioms.add(p.next().text)
                p.next()
                continue
            if start.text == "mode" and p.peek(2).text == ".":
                p.next()
                m = p.next().text
                if m not in MODES:
                    raise ParseError(f"unknown mode {m!r}", start.line, start.col)
                prog.mode = m
                p.next()
                continue
            if start.text == "weights" and p.peek(2).text == "[":
                p.next()
                name = p.next().text
                p.expect("[")
                ws = []
                while not p.at("]"):
                    t = p.next()
                    if t.kind != "int":
                        raise ParseError("weights must be nonnegative integers", t.line, t.col)
                    ws.append(int(t.text))
                    if p.at(","):
                        p.next()
                p.expect("]")
                p.expect(".")
                weight_decls.append((name, ws, start))
                continue
            if start.text == "prop" and p.peek(2).text == ":=":
                p.next()
                name = p.next().text
                p.next()
                q = _Parser(toks, p.pos)
                q.expect("gen")
                q.expect(":")
                gen = q.goal()
                q.expect(".")
                when = None
                if q.at("when"):
                    q.next()
                    q.expect(":")
                    when = q.goal()
                    q.expect(".")
                q.expect("then")
                q.expect(":")
                then = q.goal()
                q.expect(".")
                p.pos = q.pos
                checks.extend(q.consts)
                prop_decls.append((name, q, gen, when, then))
                for g in (gen, when, then):
                    if g is not None:
                        body_modes.append((g, start))
                continue
            # a clause
            q = _Parser(toks, p.pos)
            head = q.term()
            body: Term = TT
            if q.at(":-"):
                q.next()
                body = q.goal()
            q.expect(".")
            p.pos = q.pos
            h, hargs = unspine(head)
            if not isinstance(h, Const) or not isinstance(h.name, str) or h.name in CONNECTIVES:
                raise ParseError("clause head must be an atom", start.line, start.col)
            name = h.name
            if name in prog.arities and prog.arities[name] != len(hargs):
                raise ArityError(f"predicate {name!r} used with arity {len(hargs)} "
                                 f"but defined with {prog.arities[name]}", start.line, start.col)
            prog.arities[name] = len(hargs)
            checks.extend(q.consts[1:] if q.consts and q.consts[0][2] is start else q.consts)
            variables = [q.vars[n] for n in q.var_order]
            surface.setdefault(name, []).append((head, body, variables))
            body_modes.append((body, start))

    for name, arity in declared_preds.items():
        if name in prog.arities and prog.arities[name] != arity:
            raise ArityError(f"predicate {name!r} declared with arity {arity}")
        prog.arities.setdefault(name, arity)
    for name in prog.axioms:
        prog.arities.setdefault(name, 0)
    overlap = set(prog.arities) & set(prog.constructors)
    if overlap:
        raise SpecError(f"names used both as constructor and predicate: {sorted(overlap)}")

    if mode is not None:
        prog.mode = mode
    _check_consts(prog, checks)
    for g, tok in body_modes:
        check_mode(g, prog.mode, tok, prog.arities)

    for name, cls in surface.items():
        prog.predicates[name] = compile_clauses(name, prog.arities[name], cls)
        prog.source[name] = [_surface_clause(h, b, vs) for h, b, vs in cls]

    for name, ws, tok in weight_decls:
        if name in prog.weights:
            raise WeightsError(f"duplicate weights declaration for {name!r}", tok.line, tok.col)
        if name not in prog.predicates:
            raise WeightsError(f"weights for unknown predicate {name!r}", tok.line, tok.col)
        n = prog.disjuncts(name)
        if len(ws) != n:
            raise WeightsError(f"weights for {name!r} has {len(ws)} entries, "
                               f"but {name!r} has {n} disjuncts", tok.line, tok.col)
        prog.weights[name] = ws

    for name, q, gen, when, then in prop_decls:
        names = tuple(n for n in q.var_order)
        ids = [q.vars[n].id for n in names]
        mk = lambda g: Template(names, abstract_placeholders(g, ids))
        prog.properties[name] = PropertySpec(name, mk(gen), mk(when) if when is not None else None,
                                             mk(then), prog.mode)
    return prog


def _surface_clause(head: Term, body: Term, variables: list[Meta]) -> Clause:
    ids = [v.id for v in variables]
    return Clause(len(ids), abstract_placeholders(head, ids), abstract_placeholders(body, ids))


def _check_consts(prog: Program, checks: list[tuple[str, int, Token]]) -> None:
    for name, nargs, tok in checks:
        if name in CONNECTIVES:
            continue
        if name in BUILTIN_CTORS:
            arity = BUILTIN_CTORS[name]
            if nargs not in (0, arity):
                raise ArityError(f"{name!r} expects {arity} arguments, got {nargs}", tok.line, tok.col)
            continue
        if name in prog.constructors:
            arity = prog.constructors[name]
            if nargs != arity:
                raise ArityError(f"constructor {name!r} expects {arity} arguments, got {nargs}",
                                 tok.line, tok.col)
        elif name in prog.arities:
            arity = prog.arities[name]
            if nargs > arity:
                raise ArityError(f"predicate {name!r} expects {arity} arguments, got {nargs}",
                                 tok.line, tok.col)
        else:
            raise UnknownConstructor(f"unknown constructor {name!r}", tok.line, tok.col)


def check_mode(goal: Term, mode: str, tok: Token | None = None,
               arities: dict[str, int] | None = None) -> None:
    """Reject connectives the mode forbids and, given ``arities``, unsaturated atoms."""
    line, col = (tok.line, tok.col) if tok else (None, None)

    def go(t: Term) -> None:
        h, args = unspine(t)
        if arities and isinstance(h, Const) and h.name in arities \
                and len(args) != arities[h.name]:
            raise ArityError(f"predicate {h.name!r} expects {arities[h.name]} arguments, "
                             f"got {len(args)}", line, col)
        if isinstance(h, Const) and h.name in CONNECTIVES:
            n = h.name
            if n in ("-o", "!") and mode != "linear":
                raise ModeError(f"linear connective {n!r} outside linear mode", line, col)
            if n in ("pi", "=>") and mode == "horn":
                raise ModeError(f"connective {n!r} not allowed in horn mode", line, col)
            for a in args:
                go(a.body if isinstance(a, Abs) else a)

    go(goal)


@dataclass
class Query:
    term: Term
    variables: dict[str, Meta]
    store: Store


def parse_goal(text: str, prog: Program | None = None, store: Store | None = None) -> Query:
    """Parse a goal; capitalized identifiers become query metavariables."""
    store = store or Store()
    toks = tokenize(text)
    p = _Parser(toks)
    g = p.goal()
    if p.peek().text == ".":
        p.next()
    if p.peek().kind != "eof":
        t = p.peek()
        raise ParseError(f"unexpected token {t.text!r}", t.line, t.col)
    if prog is not None:
        _check_consts(prog, p.consts)
        check_mode(g, prog.mode, arities=prog.arities)
    names = [n for n in p.var_order]
    tmpl = Template(tuple(names), abstract_placeholders(g, [p.vars[n].id for n in names]))
    term, metas = tmpl.instantiate(store)
    visible = {n: m for n, m in metas.items() if not n.endswith("#")}
    return Query(term, visible, store)


def parse_term(text: str, prog: Program | None = None, store: Store | None = None) -> Term:
    return parse_goal(text, prog, store).term


_CERT_ARGS = {"height": 1, "sze": 2, "max": 1, "random": 0, "noweight": 0, "collect": 1,
              "huniv": 2, "trust": 0}


def parse_cert(text: str, prog: Program | None = None, store: Store | None = None):
    """Parse certificate syntax into a certificate term (holes become metas).

    Returns ``(term, variables)``.
    """
    store = store or Store()
    toks = tokenize(text)
    p = _Parser(toks)
    c = _cert(p)
    if p.peek().kind != "eof":
        t = p.peek()
        raise ParseError(f"unexpected token {t.text!r} in certificate", t.line, t.col)
    if prog is not None:
        _check_consts(prog, [x for x in p.consts if x[0] not in CERT_CTORS])
    names = list(p.var_order)
    tmpl = Template(tuple(names), abstract_placeholders(c, [p.vars[n].id for n in names]))
    # certificate holes may record witnesses found under binders (collect),
    # so they see every eigenvariable; goal metas keep their own scope
    term, metas = tmpl.instantiate(store, {n: store.fresh_meta(level=ANY_LEVEL) for n in names})
    return term, {n: m for n, m in metas.items() if not n.endswith("#")}


def _cert(p: _Parser) -> Term:
    left = _cert_atom(p)
    if p.at("<c>"):
        p.next()
        return const("<c>", left, _cert(p))
    return left


def _cert_atom(p: _Parser) -> Term:
    t = p.peek()
    if t.text == "(":
        p.next()
        c = _cert(p)
        p.expect(")")
        return c
    if t.kind != "ident" or t.text not in _CERT_ARGS:
        raise ParseError(f"unknown certificate constructor {t.text!r}", t.line, t.col)
    p.next()
    name = t.text
    args = []
    while p.peek().kind in ("int", "ident") or p.peek().text in ("(", "["):
        if p.peek().kind == "ident" and p.peek().text in _CERT_ARGS and name != "huniv":
            break
        args.append(p.primary())
    if name == "huniv":
        if len(args) == 1:
            args.append(Const("subterm"))
        if len(args) == 2 and args[1] not in (Const("subterm"), Const("proper")):
            raise ParseError("huniv relation must be 'subterm' or 'proper'", t.line, t.col)
    if name == "collect":
        args = [Const("nil")] + args
        if len(args) != 2:
            raise ArityError("collect expects 1 argument", t.line, t.col)
        return const("collect", *args)
    if len(args) != _CERT_ARGS[name]:
        raise ArityError(f"certificate {name!r} expects {_CERT_ARGS[name]} arguments, "
                         f"got {len(args)}", t.line, t.col)
    return const(name, *args)


# -- printing ---------------------------------------------------------------

_BOUND_NAMES = ["x", "y", "z"]
_INFIX = {";": (0, "right"), ",": (1, "right"), "=>": (2, "right"), "-o": (2, "right"),
          "=": (3, "none"), "->": (4, "right"), "::": (5, "right"), "<c>": (0, "right")}
_APP = 6


def _consts(t: Term, acc: set) -> set:
    if isinstance(t, Const):
        acc.add(str(t.name))
    elif isinstance(t, App):
        _consts(t.fun, acc)
        _consts(t.arg, acc)
    elif isinstance(t, Abs):
        _consts(t.body, acc)
    return acc


def pretty(t: Term, names: Optional[dict[int, str]] = None) -> str:
    """Print a resolved term in surface syntax.

    Bound variables are named by binding depth, skipping names that clash
    with constants in the term, so alpha-equivalent terms print identically.
    """
    taken = _consts(t, set())
    pool = []
    i = 0
    while len(pool) < 64:
        cand = _BOUND_NAMES[i] if i < len(_BOUND_NAMES) else f"x{i - len(_BOUND_NAMES) + 1}"
        if cand not in taken:
            pool.append(cand)
        i += 1
    names = names or {}

    def bound(depth: int) -> str:
        return pool[depth] if depth < len(pool) else f"x{depth + 64}"

    def go(t: Term, env: list[str], prec: int, open_right: bool) -> str:
        if isinstance(t, Abs):
            nm = bound(len(env))
            s = f"{nm}\\ {go(t.body, env + [nm], 0, True)}"
            return s if open_right and prec <= _APP else f"({s})"
        head, args = unspine(t)
        if isinstance(head, Const) and isinstance(head.name, str) and head.name in _INFIX and len(args) == 2:
            p, assoc = _INFIX[head.name]
            lhs = go(args[0], env, p + 1, False)
            rhs = go(args[1], env, p if assoc == "right" else p + 1, open_right or p < prec)
            s = f"{lhs}, {rhs}" if head.name == "," else f"{lhs} {head.name} {rhs}"
            return s if p >= prec else f"({s})"
        if isinstance(head, Const) and head.name in ("some", "pi") and len(args) == 1 and isinstance(args[0], Abs):
            nm = bound(len(env))
            s = f"{head.name} {nm}\\ {go(args[0].body, env + [nm], 0, True)}"
            return s if open_right and prec <= 2 else f"({s})"
        if isinstance(head, Const) and head.name == "!" and len(args) == 1:
            s = f"! {go(args[0], env, 3, open_right)}"
            return s if prec <= 2 else f"({s})"
        hs = atom(head, env)
        if not args:
            return hs
        paren = prec > _APP
        parts = [hs]
        for k, a in enumerate(args):
            if k == len(args) - 1 and isinstance(a, Abs):
                parts.append(go(a, env, _APP, open_right or paren))
            else:
                parts.append(go(a, env, _APP + 1, False))
        s = " ".join(parts)
        return f"({s})" if paren else s

    def atom(h: Term, env: list[str]) -> str:
        if isinstance(h, Const):
            if isinstance(h.name, int):
                return f"(- {-h.name})" if h.name < 0 else str(h.name)
            return h.name if h.name not in _INFIX else f"({h.name})"
        if isinstance(h, BVar):
            return env[len(env) - 1 - h.index] if h.index < len(env) else f"#b{h.index}"
        if isinstance(h, Meta):
            return names.get(h.id, f"_G{h.id}")
        if isinstance(h, Eigen):
            return f"#e{h.id}"
        return go(h, env, _APP + 1, False)

    return go(t, [], 0, True)


def print_program_clause(pred: str, clause: Clause) -> str:
    store = Store()
    vals = [store.fresh_meta() for _ in range(clause.nvars)]
    names = {m.id: f"Y{i + 1}" for i, m in enumerate(vals)}
    head = instantiate_many(clause.head, vals)
    body = instantiate_many(clause.body, vals)
    return f"{pretty(head, names)} :- {pretty(body, names)}."
