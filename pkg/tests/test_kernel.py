import itertools

from proofpbt.corpus import load
from proofpbt.engine import ll_solve, solve
from proofpbt.fpclib import Library
from proofpbt.kernel import FPC, check, ll_check
from proofpbt.syntax import pretty


def keys(sols):
    return sorted(tuple(sorted((k, pretty(v)) for k, v in s.bindings.items())) for s in sols)


def test_height_one_nlist_is_nil():
    sols = list(check(Library(), load("lists.sl"), "height 1", [], "nlist X"))
    assert [pretty(s.bindings["X"]) for s in sols] == ["nil"]


def test_height_three_contains_golden():
    sols = check(Library(), load("lists.sl"), "height 3", [], "nlist X")
    assert "s z :: z :: nil" in [pretty(s.bindings["X"]) for s in sols]


def test_sze_bounds_counted_steps():
    prog = load("lists.sl")
    assert next(check(Library(), prog, "sze 5 _", [], "nlist (s z :: nil)"), None) is not None
    # nlist (s (s z) :: nil) needs nlist, isnat x3, nlist nil: five backchains
    assert next(check(Library(), prog, "sze 5 _", [], "nlist (s (s z) :: nil)"), None) is not None
    assert next(check(Library(), prog, "sze 4 _", [], "nlist (s (s z) :: nil)"), None) is None


def test_permissive_fpc_equals_solve():
    prog = load("lists.sl")
    for g in ["append X Y (z :: s z :: nil)", "reverse (z :: s z :: nil) R", "member X (z :: s z :: nil)"]:
        assert keys(check(FPC(), prog, "trust", [], g)) == keys(solve(prog, [], g))


def test_permissive_fpc_equals_ll_solve():
    prog = load("perm.sl")
    g = "perm (1 :: 2 :: 3 :: nil) K"
    assert keys(ll_check(FPC(), prog, "trust", [], g)) == keys(ll_solve(prog, [], g))


def test_ll_check_height_two_nlist():
    prog = load("perm.sl")
    got = [pretty(s.bindings["L"]) for s in ll_check(Library(), prog, "height 2", [], "nlist L")]
    assert got == ["nil", "z :: nil"]


def test_ll_check_max_perm():
    prog = load("perm.sl")
    sols = list(ll_check(Library(), prog, "max _", [], "perm (1 :: nil) K"))
    assert len(sols) == 1
    assert pretty(sols[0].bindings["K"]) == "1 :: nil"
    assert "_" not in pretty(sols[0].cert)


def test_check_sub_multiset_of_solve():
    prog = load("lists.sl")
    for cert in ["height 3", "sze 6 _", "height 3 <c> sze 5 _"]:
        for g in ["append X Y Z", "nlist X"]:
            got = keys(check(Library(), prog, cert, [], g))
            for k in got:
                assert next(solve(prog, [], _ground(g, dict(k)), limit=1), None) is not None


def _ground(goal, bindings):
    for v, t in bindings.items():
        goal = goal.replace(f" {v}", f" ({t})")
    return goal
