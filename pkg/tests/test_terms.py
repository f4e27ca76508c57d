import itertools

from cicr.terms import (
    App, Context, Lam, NameSupply, Prod, Prop, SetS, Sort, SortT, TypeS, Var,
    alpha_eq, free_vars, fresh_name, subst,
)

NAT = Var("nat")


def test_subst_direct_hit():
    assert alpha_eq(subst(Var("x"), Var("zero"), "x"), Var("zero"))


def test_subst_capture_avoidance():
    # (fun y : nat => x)[y/x] must rename the binder
    t = Lam("y", NAT, Var("x"))
    out = subst(t, Var("y"), "x")
    assert isinstance(out, Lam)
    assert out.binder != "y"
    assert alpha_eq(out, Lam("w", NAT, Var("y")))


def test_subst_homomorphic_on_products():
    # (forall x : A, B)[N/z] with z distinct from x
    t = Prod("x", Var("z"), App(Var("z"), Var("x")))
    out = subst(t, NAT, "z")
    assert alpha_eq(out, Prod("x", NAT, App(NAT, Var("x"))))


def test_subst_shadowed_binder_untouched():
    t = Lam("x", NAT, Var("x"))
    assert alpha_eq(subst(t, Var("y"), "x"), t)


def _small_terms():
    leaves = [Var("x"), Var("y"), Var("c"), SortT(Prop)]
    terms = list(leaves)
    for a, b in itertools.product(leaves, repeat=2):
        terms.append(App(a, b))
        terms.append(Lam("x", a, b))
        terms.append(Prod("y", a, b))
    return terms


def test_subst_composition():
    # A[B/x][C/y] = A[C/y][B[C/y]/x] when x not free in C and x /= y
    bs = [Var("y"), SortT(Prop), Lam("z", SortT(Prop), Var("z"))]
    cs = [Var("c"), SortT(Prop)]
    for a in _small_terms():
        for b in bs:
            for c in cs:
                lhs = subst(subst(a, b, "x"), c, "y")
                rhs = subst(subst(a, c, "y"), subst(b, c, "y"), "x")
                assert alpha_eq(lhs, rhs), (a, b, c)


def test_alpha_eq_renamed_binder():
    assert alpha_eq(Lam("x", NAT, Var("x")), Lam("y", NAT, Var("y")))


def test_alpha_eq_distinct_bodies():
    assert not alpha_eq(Lam("x", NAT, Var("x")), Lam("x", NAT, Var("zero")))


def test_alpha_eq_sort_levels():
    assert not alpha_eq(Prod("x", SortT(SetS(0)), Var("x")),
                        Prod("x", SortT(SetS(1)), Var("x")))
    assert not alpha_eq(SortT(TypeS(1)), SortT(SetS(1)))


def test_alpha_eq_is_equivalence_and_congruence():
    terms = _small_terms()
    for t in terms:
        assert alpha_eq(t, t)
    pairs = [(a, b) for a in terms[:20] for b in terms[:20]]
    for a, b in pairs:
        assert alpha_eq(a, b) == alpha_eq(b, a)
    # congruence: equal parts give equal wholes
    a, b = Lam("x", NAT, Var("x")), Lam("y", NAT, Var("y"))
    assert alpha_eq(App(a, a), App(b, b))
    assert alpha_eq(Prod("z", a, Var("z")), Prod("w", b, Var("w")))


def test_alpha_eq_shadowing_bijection():
    # fun x => fun x => x  vs  fun x => fun y => x must differ
    a = Lam("x", NAT, Lam("x", NAT, Var("x")))
    b = Lam("x", NAT, Lam("y", NAT, Var("x")))
    assert not alpha_eq(a, b)
    assert alpha_eq(a, Lam("u", NAT, Lam("v", NAT, Var("v"))))


def test_free_vars():
    assert free_vars(Var("x")) == {"x"}
    assert free_vars(Lam("x", Var("A"), Var("x"))) == {"A"}
    assert free_vars(App(Var("S"), Var("O"))) == {"S", "O"}
    assert free_vars(Prod("x", Var("A"), App(Var("x"), Var("y")))) == {"A", "y"}


def test_context_lookup_and_distinctness():
    ctx = Context().extend("x", SortT(SetS(0))).extend("y", Var("x"))
    assert ctx.lookup("y") == Var("y") or ctx.lookup("y")  # type is Var('x')
    assert alpha_eq(ctx.lookup("y"), Var("x"))
    assert ctx.lookup("z") is None
    try:
        ctx.extend("x", SortT(Prop))
        assert False, "duplicate context name accepted"
    except ValueError:
        pass


def test_name_supply_freshness():
    ctx_names = {"x", "x'", "x_R", "f"}
    supply = NameSupply(ctx_names)
    primed = supply.primed("x")
    rel = supply.rel("x")
    assert primed not in ctx_names
    assert rel not in ctx_names
    assert primed != rel


def test_name_supply_deterministic():
    def run():
        s = NameSupply({"a", "b"})
        return [s.fresh("a"), s.primed("a"), s.rel("a"), s.fresh("q")]
    assert run() == run()


def test_fresh_name_counter_escape():
    assert fresh_name("x", {"x"}) == "x1"
    assert fresh_name("x", {"x", "x1"}) == "x2"
    assert fresh_name("x", set()) == "x"


def test_sort_invariants():
    assert Sort("Prop").level is None
    assert SetS(0).level == 0
    try:
        Sort("Prop", 1)
        assert False
    except ValueError:
        pass
    try:
        Sort("Set")
        assert False
    except ValueError:
        pass
