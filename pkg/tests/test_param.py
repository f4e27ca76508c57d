import pytest

from cicr.driver import elaborate
from cicr.errors import MissingWitness, NotSmallInductive, NotSupported
from cicr.param import (
    check_abstraction, hat, prime, theta, translate_case, translate_context,
    translate_inductive, translate_large_elim, translate_term, witness_type,
)
from cicr.printer import show
from cicr.reduce import conv, normalize, whnf
from cicr.syntax import parse_term_string
from cicr.terms import (
    App, Case, Const, ConstrRef, Context, IndRef, Lam, NameSupply, Prod,
    Prop, SetS, Sort, SortT, TypeS, Var, alpha_eq, app, arrow, free_vars,
    subst, subst_many,
)
from cicr.typecheck import (
    GlobalEnv, check, check_case, declare_inductive, infer, register_axiom,
)

EMPTY = Context()


def term(env, text, ctx=Context()):
    scope = {n: n for n, _ in ctx}
    return elaborate(parse_term_string(text), env, ctx, scope)


def test_hat_map():
    assert hat(Sort(Prop.kind)) == Prop
    for i in range(3):
        assert hat(SetS(i)) == Prop
    for i in (1, 2, 5):
        assert hat(TypeS(i)) == TypeS(i)
    # idempotent on Prop and Type
    assert hat(hat(Prop)) == hat(Prop)
    assert hat(hat(TypeS(2))) == hat(TypeS(2))


class TestPrime:
    def test_free_variable(self):
        out = prime(Var("x"))
        assert out == Var("x'") or alpha_eq(out, Var("x'"))

    def test_bound_untouched_up_to_alpha(self):
        t = Prod("x", Var("alpha"), Var("x"))
        out = prime(t)
        assert alpha_eq(out, Prod("x", Var("alpha'"), Var("x")))

    def test_closed_global(self, prelude_env):
        assert alpha_eq(prime(IndRef("nat")), IndRef("nat"))
        assert alpha_eq(prime(ConstrRef("S")), ConstrRef("S"))


class TestGoldenRelations:
    def test_prop_relation_exact(self, prelude_env):
        rel = translate_term(EMPTY, SortT(Prop), prelude_env)
        assert show(rel, prelude_env) == \
            "fun (x : Prop) (x' : Prop) => x -> x' -> Prop"

    def test_set_relation_exact(self, prelude_env):
        rel = translate_term(EMPTY, SortT(SetS(0)), prelude_env)
        assert show(rel, prelude_env) == \
            "fun (x : Set@0) (x' : Set@0) => x -> x' -> Prop"

    def test_type_relation_keeps_sort(self, prelude_env):
        rel = translate_term(EMPTY, SortT(TypeS(1)), prelude_env)
        expected = term(prelude_env,
                        "fun (x : Type@1) (x' : Type@1) => x -> x' -> Type@1")
        assert alpha_eq(rel, expected)

    def test_church_relation_matches_display(self, church_env):
        env = church_env
        rel = normalize(translate_term(EMPTY, Const("church0"), env), env)
        displayed = term(env, """
            fun (f : church0) (f' : church0) =>
              forall (a : Set@0) (a' : Set@0) (R : a -> a' -> Prop)
                     (g : a -> a) (g' : a' -> a'),
                (forall (x : a) (x' : a'), R x x' -> R (g x) (g' x')) ->
                forall (z : a) (z' : a'), R z z' -> R (f a g z) (f' a' g' z')
            """)
        assert alpha_eq(rel, normalize(displayed, env))

    def test_application_clause(self, prelude_env):
        # [(A nat)] = [A] nat nat [nat]
        env = prelude_env
        ctx = Context().extend("A", arrow(SortT(SetS(0)), SortT(SetS(0))))
        rel = translate_term(ctx, App(Var("A"), IndRef("nat")), env)
        head_rel = translate_term(ctx, Var("A"), env)
        nat_rel = translate_term(ctx, IndRef("nat"), env)
        assert alpha_eq(rel, app(head_rel, IndRef("nat"), IndRef("nat"),
                                 nat_rel))


class TestTranslateContext:
    def test_empty(self, prelude_env):
        assert len(translate_context(EMPTY, prelude_env)) == 0

    def test_single_type_variable(self, prelude_env):
        ctx = Context().extend("alpha", SortT(SetS(0)))
        out = translate_context(ctx, prelude_env)
        names = [n for n, _ in out]
        assert names == ["alpha", "alpha'", "alpha_R"]
        rel_ty = dict(out.entries)["alpha_R"]
        assert alpha_eq(rel_ty, term(prelude_env,
                                     "alpha -> alpha' -> Prop",
                                     Context().extend("alpha", SortT(SetS(0)))
                                     .extend("alpha'", SortT(SetS(0)))))

    def test_dependent_entry(self, prelude_env):
        # apply the context clause twice and beta-reduce: the element
        # entry relates by the relation variable itself
        ctx = Context().extend("alpha", SortT(SetS(0))).extend("a", Var("alpha"))
        out = translate_context(ctx, prelude_env)
        names = [n for n, _ in out]
        assert names == ["alpha", "alpha'", "alpha_R", "a", "a'", "a_R"]
        a_r = dict(out.entries)["a_R"]
        assert alpha_eq(a_r, app(Var("alpha_R"), Var("a"), Var("a'")))


class TestTranslatedInductives:
    def test_nat_matches_derived_declaration(self, prelude_env):
        env = prelude_env
        decl_r = translate_inductive("nat", env)
        # oracle: translate each constructor type independently and compare
        src = env.inductive("nat")
        arity_expect = normalize(
            app(translate_term(EMPTY, src.arity, env),
                IndRef("nat"), IndRef("nat")), env)
        assert alpha_eq(decl_r.arity, arity_expect)
        assert show(decl_r.arity, env) == "nat -> nat -> Prop"
        for (c, cty), (cr, cty_r) in zip(src.constructors,
                                         decl_r.constructors):
            expect = normalize(
                app(translate_term(EMPTY, cty, env),
                    ConstrRef(c), ConstrRef(c)), env)
            assert alpha_eq(cty_r, expect), c
        s_r = dict(decl_r.constructors)["S_R"]
        assert alpha_eq(s_r, term(env, "forall (x : nat) (x' : nat), "
                                       "nat_R x x' -> nat_R (S x) (S x')"))

    def test_one_parameter_becomes_three(self, tree_env):
        src = tree_env.inductive("tree0")
        decl_r = translate_inductive("tree0", tree_env)
        assert src.param_count == 1
        assert decl_r.param_count == 3

    def test_box_matches_display(self):
        env = GlobalEnv()
        declare_inductive(env, "box0", 0, SortT(SetS(1)),
                          [("close0", arrow(SortT(SetS(0)), IndRef("box0")))])
        decl_r = translate_inductive("box0", env)
        assert alpha_eq(decl_r.arity,
                        arrow(IndRef("box0"), arrow(IndRef("box0"),
                                                    SortT(Prop))))
        close_r = decl_r.constructors[0][1]
        expected = term(env, "forall (A : Set@0) (A' : Set@0), "
                             "(A -> A' -> Prop) -> box0_R (close0 A) (close0 A')")
        assert alpha_eq(close_r, expected)

    def test_memoized(self, prelude_env):
        a = translate_inductive("nat", prelude_env)
        b = translate_inductive("nat", prelude_env)
        assert a.name == b.name
        assert prelude_env.history.count(("inductive", a.name)) == 1


class TestTheta:
    def test_nat_theta_shape_and_recheck(self, prelude_env):
        env = prelude_env
        ctx = Context().extend("n", IndRef("nat"))
        case = term(env, "match n as k in nat return nat with "
                         "| O => O | S p => p end", ctx)
        th = theta("nat", case.params, case.motive, case.branches, env,
                   ctx=ctx)
        # no parameters, no indices: lambda (a a' : nat) (a_R : nat_R a a')
        assert isinstance(th, Lam) and isinstance(th.body, Lam)
        assert isinstance(th.body.body, Lam)
        # oracle: the translated case re-typechecks against the kernel
        rel = translate_case(case, env, ctx=ctx)
        tctx = translate_context(ctx, env)
        ty = infer(tctx, rel, env)
        expected = app(translate_term(ctx, App(case.motive, Var("n")), env),
                       case, prime_in(ctx, case, env))
        assert conv(ty, expected, env)

    def test_translated_case_preserves_branch_count(self, tree_env):
        env = tree_env
        ctx = Context().extend("t", term(env, "tree0 nat"))
        case = term(env, "match t as u in tree0 _ return nat with "
                         "| leaf0 x => O | node0 l r => O end", ctx)
        rel = translate_case(case, env, ctx=ctx)
        assert isinstance(rel, Case)
        assert len(rel.branches) == len(case.branches)
        assert len(rel.params) == 3 * len(case.params)

    def test_false_case_translates_with_zero_branches(self, prelude_env):
        env = prelude_env
        ctx = Context().extend("h", IndRef("False"))
        case = term(env, "match h as u in False return nat with end", ctx)
        rel = translate_case(case, env, ctx=ctx)
        assert isinstance(rel, Case)
        assert rel.branches == ()
        assert rel.ind == env.translated_inds["False"]


def prime_in(ctx, t, env):
    supply = NameSupply(env.all_names() | ctx.names())
    for n, _ in ctx:
        supply.primed(n)
    return prime(t, NameSupply(env.all_names() | ctx.names()))


class TestLargeElimination:
    def test_f_structure(self, large_env):
        env = large_env
        f_r_name = env.translated_consts["f"]
        _, body = env.definitions[f_r_name]
        rendered = show(body, env)
        # k^2 = 4 inner branch bodies, two of them absurd
        assert rendered.count("absurd") == 2
        # outer case over I with two branches each holding an inner case
        def cases_of(t):
            out = []
            stack = [t]
            while stack:
                u = stack.pop()
                if isinstance(u, Case):
                    out.append(u)
                    stack.extend(u.branches)
                    stack.append(u.scrutinee)
                    stack.append(u.motive)
                    stack.extend(u.params)
                elif hasattr(u, "body"):
                    stack.append(u.body)
                elif isinstance(u, App):
                    stack.extend([u.fn, u.arg])
                elif isinstance(u, Prod):
                    stack.extend([u.domain, u.codomain])
            return out
        over_i = [c for c in cases_of(body) if c.ind == "I"]
        # one outer + two inner destructions of the scrutinees
        assert len([c for c in over_i
                    if isinstance(c.motive, Lam)
                    and len(c.branches) == 2]) >= 3

    def test_aux_definitions_registered(self, large_env):
        env = large_env
        names = set(env.aux_defs.values())
        assert {"I_inv_1", "I_inv_2", "I_abs_1_2", "I_abs_2_1"} <= names
        assert any(n.startswith("absurd") for n in names)
        # the auxiliaries are ordinary kernel-checked definitions
        for n in names:
            assert n in env.definitions

    def test_diag_single_constructor_has_no_absurd(self, prelude_env):
        env = prelude_env
        declare_inductive(env, "wrap", 0, SortT(SetS(0)),
                          [("mk", arrow(IndRef("nat"), IndRef("wrap")))])
        ctx = Context().extend("w", IndRef("wrap"))
        case = term(env, "match w return Set@0 with | mk n => nat end", ctx)
        rel = translate_large_elim(case, env, ctx=ctx)
        assert "absurd" not in show(rel, env)
        tctx = translate_context(ctx, env)
        assert infer(tctx, rel, env) is not None

    def test_box_not_small(self):
        env = GlobalEnv()
        declare_inductive(env, "box0", 0, SortT(SetS(1)),
                          [("close0", arrow(SortT(SetS(0)), IndRef("box0")))])
        ctx = Context().extend("b", IndRef("box0"))
        motive = Lam("u", IndRef("box0"), SortT(SetS(0)))
        case = Case("box0", Var("b"), (), motive,
                    (Lam("A", SortT(SetS(0)), SortT(SetS(0))),))
        with pytest.raises(NotSmallInductive):
            translate_large_elim(case, env, ctx=ctx)

    def test_indexed_small_inductive_not_supported(self, prelude_env):
        env = prelude_env
        declare_inductive(
            env, "fin", 1,
            Prod("n", IndRef("nat"), SortT(SetS(0))),
            [("fz", Prod("n", IndRef("nat"),
                         App(IndRef("fin"), Var("n"))))])
        # an index-less reading is impossible: param_count 1
        ctx = Context().extend("v", App(IndRef("fin"), ConstrRef("O")))
        motive = Lam("u", App(IndRef("fin"), ConstrRef("O")), SortT(SetS(0)))
        case = Case("fin", Var("v"), (ConstrRef("O"),), motive,
                    (IndRef("nat"),))
        with pytest.raises(NotSupported):
            translate_large_elim(case, env, ctx=ctx)


class TestAxiomDiscipline:
    def test_missing_witness_raises(self, prelude_env):
        env = prelude_env
        register_axiom(env, "mystery", term(env, "forall X : Prop, X -> X"))
        body = term(env, "fun (X : Prop) (x : X) => mystery X x")
        with pytest.raises(MissingWitness):
            translate_term(EMPTY, body, env)

    def test_witness_gate_never_silent(self, prelude_env):
        env = prelude_env
        if "mystery2" not in env.axioms:
            register_axiom(env, "mystery2", term(env, "True"))
        with pytest.raises(MissingWitness):
            check_abstraction(Const("mystery2"), env)

    def test_realized_axiom_translates(self):
        from tests.conftest import load
        env = load("pi.cicr").env
        res = check_abstraction("use_pi", env)
        assert res.verified
        # the axiom itself now passes too: its translation applies the witness
        res2 = check_abstraction("PI", env)
        assert res2.verified
        assert isinstance(res2.relation_witness, App)

    def test_witness_type_shape(self):
        from tests.conftest import load
        env = load("pi.cicr").env
        wty = witness_type(env, "PI")
        assert isinstance(wty, Prod)
        assert alpha_eq(wty.domain, env.axioms["PI"])


class TestCheckAbstraction:
    def test_polymorphic_identity(self, prelude_env):
        env = prelude_env
        t = term(env, "fun (X : Prop) (x : X) => x")
        res = check_abstraction(t, env)
        assert res.verified
        expected = term(env, "forall (X : Prop) (X' : Prop) "
                             "(X_R : X -> X' -> Prop) (x : X) (x' : X'), "
                             "X_R x x' -> X_R x x'")
        assert conv(res.expected_type, expected, env)

    def test_iter_verified(self, church_env):
        assert check_abstraction("iter0", church_env).verified

    def test_numerals_verified(self, church_env):
        for name in ("zero", "one", "two", "three"):
            assert check_abstraction(name, church_env).verified

    def test_tree_monad_verified(self, tree_env):
        for name in ("map0", "mu0"):
            assert check_abstraction(name, tree_env).verified

    def test_open_term_rejected(self, prelude_env):
        from cicr.errors import IllTyped
        with pytest.raises(IllTyped):
            check_abstraction(Var("x"), prelude_env)


class TestSubstitutionLemmas:
    def _primes(self, ts):
        supply = NameSupply({"x", "y"})
        free = sorted(set().union(*(free_vars(t) for t in ts)))
        from cicr.param import _prime
        fm = {f: supply.primed(f) for f in free}
        return [_prime(t, {}, supply, dict(fm)) for t in ts], fm

    def test_lemma_2_1_smoke(self):
        a = Prod("z", Var("x"), App(Var("x"), Var("z")))
        b = Lam("w", SortT(Prop), Var("w"))
        [lhs], _ = self._primes([subst(a, b, "x")])
        [pa, pb], fm = self._primes([a, b])
        rhs = subst(pa, pb, fm["x"])
        assert alpha_eq(lhs, rhs)

    def test_lemma_2_2_smoke(self, prelude_env):
        env = prelude_env
        ctx = Context().extend("x", SortT(SetS(0))).extend("y", Var("x"))
        a = Prod("z", Var("x"), Var("x"))
        b = IndRef("nat")
        lhs = translate_term(ctx, subst(a, b, "x"), env)
        rel_a = translate_term(ctx, a, env)
        rel_b = translate_term(ctx, b, env)
        rhs = subst_many(rel_a, {"x": b, "x'": prime(b), "x_R": rel_b})
        assert alpha_eq(lhs, rhs)

    def test_lemma_2_3_smoke(self, prelude_env):
        env = prelude_env
        ctx = Context().extend("x", SortT(SetS(0))).extend("y", Var("x"))
        a1 = App(Lam("z", Var("x"), Var("z")), Var("y"))
        from cicr.reduce import beta_step
        a2 = beta_step(a1)
        assert conv(translate_term(ctx, a1, env),
                    translate_term(ctx, a2, env), env)


def test_hat_discipline_on_corpus_types(church_env):
    # the relation of anything in Prop or Set is itself a relation into Prop
    env = church_env
    samples = [IndRef("nat"), Const("church0"),
               term(env, "nat -> nat"), IndRef("True")]
    for ty in samples:
        rel = translate_term(EMPTY, ty, env)
        rel_ty = whnf(infer(EMPTY, rel, env), env)
        peeled = rel_ty
        for _ in range(2):
            assert isinstance(peeled, Prod)
            peeled = whnf(peeled.codomain, env)
        assert isinstance(peeled, SortT)
        assert peeled.sort == Prop


def test_translation_registers_by_name(church_env):
    env = church_env
    assert env.translated_consts["church0"] == "church0_R"
    assert env.translated_consts["iter0"] == "iter0_R"
    assert env.translated_inds["nat"] == "nat_R"
    # translated constants are kernel-registered definitions
    assert "church0_R" in env.definitions
