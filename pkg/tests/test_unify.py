import pytest

from proofpbt.terms import Abs, App, BVar, Const, Store, const
from proofpbt.unify import NonPatternProblem, unify

Z = Const("z")


def s(t):
    return const("s", t)


def test_first_order_binding():
    st = Store()
    x = st.fresh_meta()
    assert unify(st, x, s(Z))
    assert st.resolve(x) == s(Z)


def test_occurs_check():
    st = Store()
    x = st.fresh_meta()
    assert not unify(st, s(x), x)
    assert st.bindings == {}


def test_pattern_under_binder():
    # x\ M x  =  x\ x   gives  M = x\ x
    st = Store()
    m = st.fresh_meta()
    assert unify(st, Abs(App(m, BVar(0))), Abs(BVar(0)))
    assert st.resolve(m) == Abs(BVar(0))
    assert st.resolve(Abs(App(m, BVar(0)))) == Abs(BVar(0))


def test_pattern_with_eigenvariable():
    st = Store()
    m = st.fresh_meta()
    e = st.fresh_eigen()
    assert unify(st, App(m, e), const("f", e, Z))
    assert st.resolve(App(m, Z)) == const("f", Z, Z)


def test_scope_violation_fails():
    st = Store()
    m = st.fresh_meta()
    e = st.fresh_eigen()
    assert not unify(st, m, const("f", e))
    assert st.audit() == []


def test_scope_ok_after_raising():
    st = Store()
    e = st.fresh_eigen()
    m = st.fresh_meta()
    assert unify(st, m, const("f", e))
    assert st.audit() == []


def test_failure_leaves_store_unchanged():
    st = Store()
    x, y = st.fresh_meta(), st.fresh_meta()
    before = (dict(st.bindings), list(st.trail))
    assert not unify(st, const("f", x, Z), const("f", s(Z), s(y)))
    assert (dict(st.bindings), list(st.trail)) == before


def test_undo_after_success():
    st = Store()
    x = st.fresh_meta()
    m = st.mark()
    assert unify(st, const("f", x, x), const("f", Z, Z))
    st.undo(m)
    assert st.bindings == {}


def test_non_pattern_is_reported():
    st = Store()
    m, n = st.fresh_meta(), st.fresh_meta()
    with pytest.raises(NonPatternProblem):
        unify(st, App(m, Z), App(n, Z))


def test_rerun_on_resolved_is_noop():
    st = Store()
    m = st.fresh_meta()
    assert unify(st, Abs(App(m, BVar(0))), Abs(const("g", BVar(0), BVar(0))))
    a = st.resolve(Abs(App(m, BVar(0))))
    mark = st.mark()
    assert unify(st, a, st.resolve(Abs(const("g", BVar(0), BVar(0)))))
    assert st.mark() == mark
