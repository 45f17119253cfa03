"""Bundled programs with their golden expectations.

Each :class:`Golden` names a property, the certificate (or deepening
range) it runs under, and the counterexamples expected, written in
surface syntax.  Bindings compare as terms, so bound-variable names in
the expected text do not matter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Optional

from ..syntax import Program, parse_program, parse_term
from ..terms import Term

FILES = ("lists.sl", "lambda.sl", "eta.sl", "perm.sl", "counter.sl", "linear_terms.sl")


@dataclass(frozen=True)
class Golden:
    prop: str
    cert: Optional[str] = None
    deepen: Optional[tuple[int, int]] = None
    expected: tuple[dict[str, str], ...] = ()
    # "member": every expected binding appears; "exact": the emitted set is
    # exactly the expected one; "first": the first emitted one matches;
    # "absent": nothing is emitted.
    match: str = "member"
    citation: str = ""
    fuel: int = 20_000


@dataclass(frozen=True)
class SolveGolden:
    goal: str
    count: int
    citation: str = ""


@dataclass(frozen=True)
class CorpusEntry:
    file: str
    mode: str
    citation: str
    goldens: tuple[Golden, ...] = ()
    solves: tuple[SolveGolden, ...] = ()
    generators: tuple[str, ...] = field(default=())

    def source(self) -> str:
        return source(self.file)

    def program(self) -> Program:
        return load(self.file)


def source(name: str) -> str:
    return resources.files(__name__).joinpath(name).read_text(encoding="utf-8")


def path(name: str) -> str:
    return str(resources.files(__name__).joinpath(name))


@lru_cache(maxsize=None)
def load(name: str) -> Program:
    return parse_program(source(name))


def expected_terms(prog: Program, bindings: dict[str, str]) -> dict[str, Term]:
    return {k: parse_term(v, prog) for k, v in bindings.items()}


def corpus_specs() -> list[CorpusEntry]:
    return [
        CorpusEntry(
            "lists.sl", "horn", "Fig. 1 and the prop_rev listings of section 5",
            goldens=(
                Golden("rev_id", "height 3", expected=({"Xs": "s z :: z :: nil"},),
                       citation='section 5, "the answer Xs = s z :: z :: nil"'),
                Golden("rev_sym", "height 3", match="absent",
                       citation='section 5, "without finding a counterexample"'),
                Golden("rev_sym", deepen=(1, 5), match="absent",
                       citation='section 5, "without finding a counterexample"'),
            ),
            generators=("nlist Xs", "isnat N"),
        ),
        CorpusEntry(
            "lambda.sl", "hh", "Fig. 16 and the beta-diamond discussion of section 6",
            goldens=(
                Golden("beta_diamond", deepen=(1, 6), match="first",
                       expected=({"M": "app (lam x\\ app x x) (app (lam x\\ x) (lam x\\ x))"},),
                       citation='section 6, "A minimal counterexample found by exhaustive generation"'),
                Golden("beta_star_diamond", "height 3", match="absent",
                       citation='section 6, "such queries do not report any counterexample"'),
            ),
            generators=("is_exp M",),
        ),
        CorpusEntry(
            "eta.sl", "hh", "Fig. 18 and the eta listings of section 6",
            goldens=(
                Golden("eta_pres_bug", "height 2",
                       expected=({"A": "unitTy", "N": "app (lam x\\ unit) (lam x\\ x)",
                                  "M": "app (lam x\\ x) (lam x\\ x)"},),
                       citation="section 6, preservation counterexample for E-App-L-BUG"),
                Golden("eta_pres", "height 2", match="absent",
                       citation='section 6, "does not report any problem"'),
                Golden("eta_diamond", "height 3",
                       expected=({"M": "lam x\\ lam y\\ app x y",
                                  "A": "(unitTy -> unitTy) -> unitTy -> unitTy"},),
                       citation="section 6, eta-diamond counterexample"),
            ),
            generators=("is_exp M", "is_ty A"),
        ),
        CorpusEntry(
            "perm.sl", "linear", "section 7.1",
            goldens=(
                Golden("perm_pres_bug", "height 2", expected=({"L": "z :: nil", "K": "nil"},),
                       citation='section 7.1, "K = nil / L = z :: nil"'),
                Golden("perm_pres", "height 2", match="absent",
                       citation="section 7.1, correct load"),
            ),
            solves=(SolveGolden("perm (1 :: 2 :: 3 :: nil) K", 6,
                                'section 7.1, "six solutions"'),),
            generators=("nlist L",),
        ),
        CorpusEntry(
            "counter.sl", "linear", "section 7.2",
            goldens=(
                Golden("cbnv", "height 3",
                       expected=({"M": "app (lam w\\ get) (set (- 1))", "V": "0", "U": "(- 1)"},),
                       citation='section 7.2, "app (lam (w\\ get)) (set (- 1))"'),
            ),
            solves=(SolveGolden("eval_cbn (app (lam w\\ get) (set (- 1))) V", 1,
                                'section 7.2, "call-by-name value of 0"'),
                    SolveGolden("eval_cbv (app (lam w\\ get) (set (- 1))) V", 1,
                                'section 7.2, "call-by-value value of -1"')),
            generators=("is_prog M",),
        ),
        CorpusEntry(
            "linear_terms.sl", "linear", "section 7.3",
            goldens=tuple(
                [Golden(f"pres2_{ev}", "height 4", match="exact",
                        expected=tuple({"M": m} for m in PRES2_TERMS),
                        citation='section 7.3, "the smallest such terms"') for ev in ("cbn", "cbv")]
                + [Golden(f"pres1_{ev}", "height 4", match="absent",
                          citation='section 7.3, "no such term is possible"') for ev in ("cbn", "cbv")]),
            generators=("is_exp M",),
        ),
    ]


PRES2_TERMS = (
    "app (lam x\\ lam y\\ y) (app (lam x\\ x) (lam x\\ x))",
    "app (lam x\\ lam y\\ y) (lam x\\ x)",
    "app (lam x\\ lam y\\ y) (lam x\\ lam y\\ y)",
    "app (lam x\\ lam y\\ y) (lam x\\ lam y\\ x)",
)


def entry(file: str) -> CorpusEntry:
    for e in corpus_specs():
        if e.file == file:
            return e
    raise KeyError(file)


def run_golden(prog: Program, golden: Golden) -> tuple[bool, list]:
    """Run one golden and report whether it holds, with what was emitted.

    For "member" and "first" goldens the run stops as soon as the verdict
    is known, so unbounded tails of further counterexamples are not paid for.
    """
    from ..harness import Limits, deepen, run_property

    limits = Limits(fuel=golden.fuel)
    if golden.deepen is not None:
        stream = deepen(prog, golden.prop, *golden.deepen, limits=limits)
    else:
        stream = run_property(prog, golden.prop, golden.cert, limits=limits)
    wanted = [expected_terms(prog, b) for b in golden.expected]

    def hit(cex, want):
        return all(cex.bindings.get(k) == v for k, v in want.items())

    emitted = []
    if golden.match == "first":
        first = next(iter(stream), None)
        return first is not None and hit(first, wanted[0]), [first] if first else []
    if golden.match == "member":
        pending = list(wanted)
        for cex in stream:
            emitted.append(cex)
            pending = [w for w in pending if not hit(cex, w)]
            if not pending:
                return True, emitted
        return False, emitted
    emitted = list(stream)
    if golden.match == "absent":
        return not emitted, emitted
    got = [c for c in emitted]
    ok = len(got) == len(wanted) and all(any(hit(c, w) for c in got) for w in wanted)
    return ok, emitted
