"""Acceptance criteria 1 to 17, one test each.

Every test records its verdict through the ``criterion`` fixture; the
terminal summary prints one PASS/FAIL line per criterion.  Each test
also asserts its own wall-clock budget of 60 seconds.
"""

import json
import math
import random
import time
from collections import Counter

import pytest

from oracle import Horn, from_term, is_exp_height, is_exp_size, to_term
from proofpbt.cli import main
from proofpbt.corpus import PRES2_TERMS, load
from proofpbt.engine import FuelExhausted, Fuel, ll_solve, solve
from proofpbt.fpclib import FPC, Library, RandomSource
from proofpbt.harness import (Counterexample, Limits, collect_items, deepen, elaborate,
                              printed_bindings, replay, run_property, sample, shrink)
from proofpbt.kernel import check, ll_check
from proofpbt.syntax import parse_goal, parse_term, pretty
from proofpbt.terms import Store, import_term, subterms
from proofpbt.unify import unify

def terms(prog, bindings):
    return {k: parse_term(v, prog) for k, v in bindings.items()}


def emitted(prog, prop, cert=None, lo_hi=None, **kw):
    if lo_hi is not None:
        return list(deepen(prog, prop, *lo_hi, limits=Limits(**kw)))
    return list(run_property(prog, prop, cert, limits=Limits(**kw)))


def has(cexs, want):
    return any(all(c.bindings.get(k) == v for k, v in want.items()) for c in cexs)


def first_hit(stream, want):
    """Consume counterexamples until one matches ``want``."""
    for c in stream:
        if all(c.bindings.get(k) == v for k, v in want.items()):
            return c
    return None


def test_c01_rev_id(criterion):
    criterion(1, "prop_rev_id at height 3 emits Xs = s z :: z :: nil")
    prog = load("lists.sl")
    cexs = emitted(prog, "rev_id", "height 3")
    assert has(cexs, terms(prog, {"Xs": "s z :: z :: nil"}))


def test_c02_rev_sym(criterion):
    criterion(2, "prop_rev_sym emits nothing at height 3 and under deepen 1..5")
    prog = load("lists.sl")
    assert emitted(prog, "rev_sym", "height 3") == []
    assert emitted(prog, "rev_sym", lo_hi=(1, 5)) == []


def test_c03_perm(criterion):
    criterion(3, "perm (1::2::3::nil) K has exactly the 6 permutations")
    prog = load("perm.sl")
    sols = list(ll_solve(prog, [], "perm (1 :: 2 :: 3 :: nil) K"))
    ks = [s.bindings["K"] for s in sols]
    assert len(ks) == 6 and len(set(ks)) == 6
    import itertools
    want = {parse_term(" :: ".join(map(str, p)) + " :: nil", prog)
            for p in itertools.permutations([1, 2, 3])}
    assert set(ks) == want


def test_c04_perm_pres(criterion):
    criterion(4, "perm_pres: buggy load' emits {L = z :: nil, K = nil}; correct load emits nothing")
    prog = load("perm.sl")
    bug = emitted(prog, "perm_pres_bug", "height 2")
    assert has(bug, terms(prog, {"L": "z :: nil", "K": "nil"}))
    assert emitted(prog, "perm_pres", "height 2") == []


def test_c05_beta_diamond(criterion):
    criterion(5, "beta diamond: first deepen counterexample is app (lam x\\ app x x) (app (lam x\\ x) (lam x\\ x))")
    prog = load("lambda.sl")
    first = next(iter(deepen(load("lambda.sl"), "beta_diamond", 1, 6)))
    want = parse_term("app (lam x\\ app x x) (app (lam x\\ x) (lam x\\ x))", prog)
    assert first.bindings["M"] == want


def test_c06_eta_pres(criterion):
    criterion(6, "eta preservation: E-App-L-BUG counterexample found; correct rules emit nothing")
    prog = load("eta.sl")
    bug = emitted(prog, "eta_pres_bug", "height 2")
    assert has(bug, terms(prog, {"A": "unitTy", "N": "app (lam x\\ unit) (lam x\\ x)",
                                 "M": "app (lam x\\ x) (lam x\\ x)"}))
    assert emitted(prog, "eta_pres", "height 2") == []


def test_c07_eta_diamond(criterion):
    criterion(7, "eta diamond: lam x\\ lam y\\ app x y at (unitTy -> unitTy) -> unitTy -> unitTy, reducts checked")
    prog = load("eta.sl")
    m, a = "lam x\\ lam y\\ app x y", "(unitTy -> unitTy) -> unitTy -> unitTy"
    want = terms(prog, {"M": m, "A": a})
    assert first_hit(run_property(prog, "eta_diamond", "height 3"), want) is not None
    r1, r2 = "lam x\\ x", "lam x\\ lam y\\ unit"
    assert next(solve(prog, [], f"teta ({m}) ({r1}) ({a})"), None) is not None
    assert next(solve(prog, [], f"teta ({m}) ({r2}) ({a})"), None) is not None
    assert next(solve(prog, [], f"joinable ({r1}) ({r2}) ({a})"), None) is None


def test_c08_cbnv(criterion):
    criterion(8, "prop_cbnv at height 3 emits app (lam w\\ get) (set (- 1)) with cbn 0, cbv -1")
    prog = load("counter.sl")
    m = "app (lam w\\ get) (set (- 1))"
    # membership: stop at the match, before the diverging omega-like
    # programs of the same bound spend their fuel
    want = terms(prog, {"M": m, "V": "0", "U": "(- 1)"})
    assert first_hit(run_property(prog, "cbnv", "height 3"), want) is not None
    cbn = [s.bindings["V"] for s in ll_solve(prog, [], f"eval_cbn ({m}) V")]
    cbv = [s.bindings["V"] for s in ll_solve(prog, [], f"eval_cbv ({m}) V")]
    assert cbn == [parse_term("0", prog)] and cbv == [parse_term("- 1", prog)]


def test_c09_linear_terms(criterion):
    criterion(9, "prop_pres2 at height 4 emits exactly the four terms, each evaluating to lam x\\ x; prop_pres1 emits nothing")
    prog = load("linear_terms.sl")
    want = {parse_term(t, prog) for t in PRES2_TERMS}
    ident = parse_term("lam x\\ x", prog)
    for ev in ("cbn", "cbv"):
        got = [c.bindings["M"] for c in emitted(prog, f"pres2_{ev}", "height 4")]
        assert len(got) == len(set(got)) and set(got) == want
        for t in PRES2_TERMS:
            vals = [s.bindings["N"] for s in ll_solve(prog, [], f"{ev} ({t}) N")]
            assert vals == [ident]
        assert emitted(prog, f"pres1_{ev}", "height 4") == []


# -- 10: kernel soundness fuzz ----------------------------------------------

FUZZ_GOALS = {
    "lists.sl": ["nlist X", "isnat N", "append X Y Z", "append X Y (z :: s z :: nil)",
                 "rev X Y", "reverse X Y", "member X Y", "member z X", "rev_acc X nil Y"],
    # relations over terms run in their intended mode: generate first
    "lambda.sl": ["is_exp M", "is_exp M, step M N", "is_exp M, step M N, joinable M N"],
    "eta.sl": ["is_exp M", "is_ty A", "wt M A", "wt M A, teta M N A"],
    "perm.sl": ["nlist L", "nlist L, perm L K", "member X L", "nlist L, perm_bug L K"],
    "counter.sl": ["is_prog M", "is_prog M, eval_cbn M V", "is_prog M, eval_cbv M V"],
    "linear_terms.sl": ["closed_exp M", "closed_lexp M", "closed_exp M, cbn M N",
                        "closed_exp M, wt M A"],
}

UNIVERSES = {
    "lists.sl": ["s z :: z :: nil", "z :: s (s z) :: nil", "s (s z)"],
    "lambda.sl": ["lam x\\ app x x", "app (lam x\\ x) (lam x\\ lam y\\ y)"],
    "eta.sl": ["app (lam x\\ x) unit", "lam x\\ unit", "unitTy -> unitTy"],
    "perm.sl": ["s z :: z :: nil", "z :: z :: nil"],
    "counter.sl": ["app (lam x\\ get) (set 1)", "set (- 1)"],
    "linear_terms.sl": ["lam x\\ app x x", "app (lam x\\ x) (lam x\\ lam y\\ y)"],
}


def random_cert(rng: random.Random, file: str) -> str:
    h = rng.randint(0, 3)
    n = rng.randint(0, 7)
    u = rng.choice(UNIVERSES[file])
    return rng.choice([
        f"height {h}",
        f"sze {n} _",
        f"sze {n} 0",
        f"height {h} <c> sze {n} _",
        f"height {h} <c> max _",
        f"random <c> height {h}",
        f"noweight <c> height {h}",
        f"huniv (({u}) :: nil) subterm <c> height {h}",
        f"huniv (({u}) :: nil) proper <c> sze {n} _",
        f"collect _ <c> height {h}",
    ])


def solve_has(prog, goal: str, sol, linear: bool) -> bool:
    """Whether solve, run on the goal with the solution's bindings, finds a variant of it."""
    store = Store()
    q = parse_goal(goal, prog, store)
    mapping = {}
    for n, t in sol.bindings.items():
        assert unify(store, q.variables[n], import_term(t, store, mapping))
    want = printed_bindings({n: store.resolve(m) for n, m in q.variables.items()})
    run = ll_solve if linear else solve
    for s in run(prog, [], q, fuel=Fuel(200_000), limit=200):
        if printed_bindings(s.bindings) == want and (not linear or s.context == sol.context):
            return True
    return False


def test_c10_kernel_soundness_fuzz(criterion):
    criterion(10, "kernel soundness: 1000 random (FPC, certificate, goal) triples, every check solution is a solve solution")
    rng = random.Random("acceptance/10")
    files = sorted(FUZZ_GOALS)
    violations, checked, triples = [], 0, 0
    while triples < 1000:
        file = rng.choice(files)
        prog = load(file)
        linear = prog.mode == "linear"
        goal = rng.choice(FUZZ_GOALS[file])
        if rng.random() < 0.15:
            fpc, cert = FPC(), "trust"
        else:
            fpc, cert = Library(RandomSource(rng.randrange(10 ** 6))), random_cert(rng, file)
        triples += 1
        run = ll_check if linear else check
        sols = []
        try:
            for s in run(fpc, prog, cert, [], goal, fuel=Fuel(1_000), limit=6):
                sols.append(s)
        except FuelExhausted:
            pass
        for s in sols:
            checked += 1
            if not solve_has(prog, goal, s, linear):
                violations.append((file, cert, goal, printed_bindings(s.bindings)))
    print(f"criterion 10: {triples} triples, {checked} solutions checked, {len(violations)} violations")
    assert checked > 1000
    assert violations == []


# -- 11: oracle equivalence -------------------------------------------------

def test_c11_oracle_equivalence(criterion):
    criterion(11, "check under height h <= 4 and sze n <= 8 equals the independent enumerator (nlist, is_exp)")
    lists, lam = load("lists.sl"), load("lambda.sl")
    horn = Horn(lists)
    x = ("?", 0)

    def nlist_oracle(**kw):
        return Counter(to_term(a[0]) for a in horn.answers(("nlist", x), [x], **kw))

    def kernel(prog, cert, goal, var):
        return Counter(s.bindings[var] for s in check(Library(), prog, cert, [], goal))

    for h in range(5):
        assert kernel(lists, f"height {h}", "nlist X", "X") == nlist_oracle(height=h), h
        assert kernel(lam, f"height {h}", "is_exp M", "M") == Counter(is_exp_height(h)), h
    for n in range(9):
        assert kernel(lists, f"sze {n} _", "nlist X", "X") == nlist_oracle(size=n), n
        assert kernel(lists, f"sze {n} 0", "nlist X", "X") == nlist_oracle(size=n, exact_size=True), n
        assert kernel(lam, f"sze {n} _", "is_exp M", "M") == Counter(is_exp_size(n)), n
        assert kernel(lam, f"sze {n} 0", "is_exp M", "M") == Counter(is_exp_size(n, exact=True)), n


# -- 12: max round trip -----------------------------------------------------

ROUND_TRIP = [
    ("lists.sl", "nlist X", 3), ("lists.sl", "append X Y Z", 3), ("lists.sl", "reverse X Y", 3),
    ("lambda.sl", "is_exp M", 3), ("lambda.sl", "is_exp M, step M N", 3),
    ("eta.sl", "wt M A", 3), ("perm.sl", "perm L K", 3), ("counter.sl", "is_prog M", 2),
    ("linear_terms.sl", "closed_lexp M", 4), ("eta.sl", "wt M A, teta M N A", 3),
    ("counter.sl", "is_prog M, eval_cbn M V", 3),
]


def test_c12_max_round_trip(criterion):
    criterion(12, "100 proofs elaborated with max _ replay to exactly one solution with identical bindings")
    done = 0
    for file, goal, h in ROUND_TRIP:
        prog = load(file)
        run = ll_check if prog.mode == "linear" else check
        for s in run(Library(), prog, f"height {h} <c> max _", [], goal, limit=15):
            tree = s.cert.arg.arg
            replayed = list(run(Library(), prog, f"max ({pretty(tree)})", [], goal))
            assert len(replayed) == 1, (file, goal, pretty(tree))
            assert printed_bindings(replayed[0].bindings) == printed_bindings(s.bindings)
            done += 1
            if done == 100:
                return
    pytest.fail(f"only {done} proofs elaborated")


# -- 13: pairing is intersection --------------------------------------------

# goals whose answers are always ground, so bindings identify proofs'
# results; an open answer under one certificate could be grounded by huniv
PAIR_GOALS = [("lists.sl", "nlist X"), ("lists.sl", "append X Y (s z :: z :: nil)"),
              ("lists.sl", "nlist X, rev X Y"), ("lambda.sl", "is_exp M"),
              ("eta.sl", "is_ty A"), ("perm.sl", "nlist L")]


def _component(rng, file):
    kind = rng.choice(["height", "sze", "huniv"])
    if kind == "height":
        return f"height {rng.randint(0, 3)}"
    if kind == "sze":
        return f"sze {rng.randint(0, 6)} _"
    u = rng.choice(UNIVERSES[file])
    return f"huniv (({u}) :: nil) {rng.choice(['subterm', 'proper'])}"


def test_c13_pairing(criterion):
    criterion(13, "50 sampled (A, B, goal): solutions(A <c> B) = solutions(A) & solutions(B)")
    rng = random.Random("acceptance/13")

    def sols(prog, cert, goal):
        run = ll_check if prog.mode == "linear" else check
        return {tuple(sorted(printed_bindings(s.bindings).items()))
                for s in run(Library(), prog, cert, [], goal, fuel=Fuel(400_000))}

    nonempty = 0
    for _ in range(50):
        file, goal = rng.choice(PAIR_GOALS)
        prog = load(file)
        a, b = _component(rng, file), _component(rng, file)
        both = sols(prog, f"({a}) <c> ({b})", goal)
        assert not any("_" in v for s in both for _, v in s)
        assert both == sols(prog, a, goal) & sols(prog, b, goal), (file, goal, a, b)
        nonempty += bool(both)
    assert nonempty >= 10


# -- 14: weighted statistics ------------------------------------------------

def test_c14_weighted_statistics(criterion):
    criterion(14, "weights isnat [1,3]: first-disjunct frequency over 10000 draws within 3 sigma of 1/4")
    prog = load("lists.sl")
    assert prog.weights["isnat"] == [1, 3]
    n, first = 10_000, 0
    zero = parse_term("z", prog)
    for i in range(n):
        sols = list(check(Library(RandomSource(f"acceptance/14/{i}")), prog, "noweight", [],
                          "isnat X"))
        assert len(sols) == 1
        first += sols[0].bindings["X"] == zero
    sigma = math.sqrt(n * 0.25 * 0.75)
    print(f"criterion 14: {first}/{n} first-disjunct draws, expected {n / 4:.0f} +- {3 * sigma:.1f}")
    assert abs(first - n / 4) <= 3 * sigma


# -- 15: Horn agreement -----------------------------------------------------

HORN_GOALS = ["nlist X", "isnat N", "append X Y Z", "append X Y (z :: s z :: nil)", "rev X Y",
              "reverse X Y", "member X Y", "rev_acc X A Y", "reverse (z :: s z :: nil) R",
              "rev (s z :: z :: nil) R", "member X (z :: s z :: z :: nil)"]


def test_c15_horn_agreement(criterion):
    criterion(15, "Horn programs: ll_solve with empty contexts and solve agree up to depth 4")
    prog = load("lists.sl")
    assert prog.mode == "horn"

    def bag(sols):
        return Counter(tuple(sorted(printed_bindings(s.bindings).items())) for s in sols)

    for goal in HORN_GOALS:
        for h in range(5):
            plain = list(check(Library(), prog, f"height {h}", [], goal))
            linear = list(ll_check(Library(), prog, f"height {h}", [], goal))
            assert bag(plain) == bag(linear), (goal, h)
            assert all(s.context == () for s in linear)
    for goal in HORN_GOALS[-3:]:
        assert bag(solve(prog, [], goal)) == bag(ll_solve(prog, [], goal))


# -- 16: shrinking ----------------------------------------------------------

def test_c16_shrinking(criterion):
    criterion(16, "20 seeded prop_rev_id counterexamples shrink to 2-element lists of distinct items")
    prog = load("lists.sl")
    cexs, seen, i = [], set(), 0
    while len(cexs) < 20:
        rep = sample(prog, "rev_id", 1, seed=f"acceptance/16/{i}")
        i += 1
        for c in rep.counterexamples:
            if c.key() not in seen:
                seen.add(c.key())
                cexs.append(c)
    sizes = []
    for cex in cexs:
        start = {t for item in collect_items(prog, "rev_id", cex) for t in subterms(item)}
        small = shrink(prog, "rev_id", cex)
        xs = small.printed()["Xs"].split(" :: ")
        assert xs[-1] == "nil" and len(xs) == 3 and xs[0] != xs[1], small.printed()
        for w in collect_items(prog, "rev_id", small):
            assert w in start
        assert replay(prog, "rev_id", small.bindings)
        sizes.append(len(cex.printed()["Xs"].split(" :: ")) - 1)
    print(f"criterion 16: shrank 20 counterexamples of lengths {sorted(sizes)}")


# -- 17: determinism --------------------------------------------------------

def _json_without_timings(capsys, argv) -> str:
    main(argv)
    report = json.loads(capsys.readouterr().out)

    def strip(x):
        if isinstance(x, dict):
            return {k: strip(v) for k, v in x.items() if k != "timings"}
        if isinstance(x, list):
            return [strip(v) for v in x]
        return x
    return json.dumps(strip(report), indent=2, sort_keys=True)


def test_c17_determinism(criterion, capsys):
    criterion(17, "identical seeds and configs give byte-identical JSON reports (timings excluded)")
    runs = [
        ["sample", "--program", "lists.sl", "--prop", "rev_id", "--n", "25", "--seed", "11",
         "--shrink", "--format", "json"],
        ["prop", "--program", "lists.sl", "--prop", "rev_id", "--cert", "random <c> height 4",
         "--seed", "5", "--format", "json"],
        ["prop", "--program", "lambda.sl", "--prop", "beta_diamond", "--deepen", "1..3",
         "--format", "json"],
        ["check", "--program", "perm.sl", "--goal", "perm (1 :: 2 :: nil) K", "--cert", "max _",
         "--all", "--format", "json"],
    ]
    for argv in runs:
        first = _json_without_timings(capsys, argv)
        second = _json_without_timings(capsys, argv)
        assert first == second, argv
        assert '"timings"' not in first
