"""The parametricity translator and per-instance abstraction checks.

Every type maps to a relation whose codomain is Prop (for types in Prop or
Set) and every term maps to a witness that it is related to its own primed
copy.  The abstraction theorem is not proved once and for all: each
translated judgment is handed back to the kernel, and ``verified`` records
whether it re-typechecks.

Case expressions over Set-sorted inductives that eliminate into Type are
handled by swapping the destruction of the relation witness for two nested
destructions of the scrutinees (k^2 branches, with synthesized inversion
and absurdity helpers); this is only possible for small inductive
definitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from .errors import (
    CicrError, IllTyped, MissingWitness, NotSmallInductive, NotSupported,
    UnboundVariable, WitnessTypeMismatch,
)
from .reduce import Fuel, normalize, resolve_struct, whnf
from .terms import (
    PROP, SET, TYPE, App, Case, Const, ConstrRef, Context, Fix, IndRef, Lam,
    NameSupply, Prod, Sort, SortT, Term, Var, all_names, app, arrow,
    free_vars, fresh_name, lams, prods, rename, subst_many,
)
from .typecheck import (
    GlobalEnv, InductiveDecl, check, declare_inductive, infer,
    register_definition,
)


def hat(s: Sort) -> Sort:
    """The sort transformer: relations over Prop/Set land in Prop; Type is
    kept."""
    if s.kind in (PROP, SET):
        return Sort(PROP)
    return s


@dataclass(frozen=True)
class TranslationResult:
    """Outcome of one abstraction-theorem instance."""

    original: Term
    primed: Term
    relation_witness: Term
    expected_type: Term
    verified: bool


# -- priming -----------------------------------------------------------------

def prime(t: Term, supply: Optional[NameSupply] = None) -> Term:
    """The primed copy: every free variable x replaced by x', binders
    renamed consistently, globals mapped to themselves.

    Free variables are assigned their primed names first (in sorted order)
    so that the assignment is a function of the name alone and cannot be
    disturbed by binder renamings; substitution then commutes with priming
    up to alpha."""
    if supply is None:
        supply = NameSupply(all_names(t))
    freemap = {name: supply.primed(name) for name in sorted(free_vars(t))}
    return _prime(t, {}, supply, freemap)


def _prime(t: Term, m: dict[str, str], supply: NameSupply,
           freemap: dict[str, str]) -> Term:
    if isinstance(t, Var):
        if t.name in m:
            return Var(m[t.name])
        if t.name not in freemap:
            freemap[t.name] = supply.primed(t.name)
        return Var(freemap[t.name])
    if isinstance(t, (SortT, IndRef, ConstrRef, Const)):
        return t
    if isinstance(t, App):
        return App(_prime(t.fn, m, supply, freemap),
                   _prime(t.arg, m, supply, freemap))
    if isinstance(t, (Prod, Lam)):
        dom = _prime(t.domain, m, supply, freemap)
        nb = supply.primed(t.binder)
        body = t.codomain if isinstance(t, Prod) else t.body
        body = _prime(body, {**m, t.binder: nb}, supply, freemap)
        return Prod(nb, dom, body) if isinstance(t, Prod) else Lam(nb, dom, body)
    if isinstance(t, Case):
        return Case(
            t.ind,
            _prime(t.scrutinee, m, supply, freemap),
            tuple(_prime(q, m, supply, freemap) for q in t.params),
            _prime(t.motive, m, supply, freemap),
            tuple(_prime(f, m, supply, freemap) for f in t.branches),
        )
    if isinstance(t, Fix):
        annot = _prime(t.annot, m, supply, freemap)
        nb = supply.primed(t.binder)
        body = _prime(t.body, {**m, t.binder: nb}, supply, freemap)
        return Fix(nb, annot, body, t.struct)
    raise TypeError(f"unknown term node {type(t).__name__}")


# -- the translator -----------------------------------------------------------

class _Translator:
    """One translation run: carries the source context, the variable map
    x -> (x', x_R) and a deterministic name supply."""

    def __init__(self, env: GlobalEnv, ctx: Context = Context(),
                 extra_avoid=()):
        avoid = env.all_names() | ctx.names() | set(extra_avoid)
        for _, ty in ctx:
            avoid |= free_vars(ty)
        self.env = env
        self.supply = NameSupply(avoid)
        self.vmap: dict[str, tuple[str, str]] = {}
        self.ctx = ctx
        self._free_primes: dict[str, str] = {}
        self._free_rels: dict[str, str] = {}

    def _free_rel(self, name: str) -> str:
        if name not in self._free_rels:
            self._free_rels[name] = self.supply.rel(name)
        return self._free_rels[name]

    def _open(self, binder: str, *terms: Term) -> tuple[str, list[Term]]:
        """Pick a source-side name for a binder, renaming when it would
        clash with anything already in scope."""
        if binder != "_" and not self.supply.knows(binder):
            self.supply.reserve(binder)
            return binder, list(terms)
        x = self.supply.fresh(binder if binder != "_" else "x")
        return x, [rename(t, binder, x) for t in terms]

    def _bind(self, x: str, ty: Term) -> tuple[str, str]:
        x2 = self.supply.primed(x)
        xr = self.supply.rel(x)
        self.vmap[x] = (x2, xr)
        self.ctx = self.ctx.extend(x, ty)
        return x2, xr

    def prime_term(self, t: Term) -> Term:
        base = {k: v[0] for k, v in self.vmap.items()}
        return _prime(t, base, self.supply, self._free_primes)

    # the translation proper

    def rel(self, t: Term) -> Term:
        if isinstance(t, Var):
            if t.name in self.vmap:
                return Var(self.vmap[t.name][1])
            return Var(self._free_rel(t.name))
        if isinstance(t, SortT):
            x = self.supply.fresh("x")
            x2 = self.supply.primed(x)
            return Lam(x, t, Lam(x2, t,
                       arrow(Var(x), arrow(Var(x2), SortT(hat(t.sort))))))
        if isinstance(t, Prod):
            return self._rel_prod(t)
        if isinstance(t, Lam):
            return self._rel_lam(t)
        if isinstance(t, App):
            return app(self.rel(t.fn), t.arg, self.prime_term(t.arg),
                       self.rel(t.arg))
        if isinstance(t, IndRef):
            if t.name in self.env.translated_inds:
                return IndRef(self.env.translated_inds[t.name])
            return IndRef(self.ensure_translated_inductive(t.name).name)
        if isinstance(t, ConstrRef):
            if t.name in self.env.translated_constrs:
                return ConstrRef(self.env.translated_constrs[t.name])
            info = self.env.constructor_info(t.name)
            if info is None:
                raise UnboundVariable(f"unknown constructor {t.name}")
            self.ensure_translated_inductive(info[0])
            return ConstrRef(self.env.translated_constrs[t.name])
        if isinstance(t, Const):
            return self._rel_const(t)
        if isinstance(t, Fix):
            return self._rel_fix(t)
        if isinstance(t, Case):
            return self._rel_case(t)
        raise TypeError(f"unknown term node {type(t).__name__}")

    def _rel_prod(self, t: Prod) -> Term:
        f = self.supply.fresh("f")
        f2 = self.supply.primed(f)
        x, [cod] = self._open(t.binder, t.codomain)
        src = Prod(x, t.domain, cod)
        dom2 = self.prime_term(t.domain)
        rel_dom = self.rel(t.domain)
        saved = self.ctx
        x2, xr = self._bind(x, t.domain)
        primed_src = Prod(x2, dom2, self.prime_term(cod))
        rel_cod = self.rel(cod)
        self.ctx = saved
        return Lam(f, src, Lam(f2, primed_src, prods(
            [(x, t.domain), (x2, dom2), (xr, app(rel_dom, Var(x), Var(x2)))],
            app(rel_cod, App(Var(f), Var(x)), App(Var(f2), Var(x2))))))

    def _rel_lam(self, t: Lam) -> Term:
        x, [body] = self._open(t.binder, t.body)
        dom2 = self.prime_term(t.domain)
        rel_dom = self.rel(t.domain)
        saved = self.ctx
        x2, xr = self._bind(x, t.domain)
        rel_body = self.rel(body)
        self.ctx = saved
        return lams(
            [(x, t.domain), (x2, dom2), (xr, app(rel_dom, Var(x), Var(x2)))],
            rel_body)

    def _rel_const(self, t: Const) -> Term:
        if t.name in self.env.definitions:
            return Const(self.ensure_translated_constant(t.name))
        if t.name in self.env.axioms:
            witness = self.env.param_witnesses.get(t.name)
            if witness is None:
                raise MissingWitness(t.name)
            return App(witness, t)
        raise UnboundVariable(f"unknown constant {t.name}")

    def _rel_fix(self, t: Fix) -> Term:
        k = resolve_struct(t, self.env)
        if k is None:
            raise IllTyped("cannot resolve the decreasing argument of a fix")
        x, [body] = self._open(t.binder, t.body)
        src = Fix(x, t.annot, body, t.struct)
        annot2 = self.prime_term(t.annot)
        rel_annot = self.rel(t.annot)
        saved = self.ctx
        x2, xr = self._bind(x, t.annot)
        primed_src = Fix(x2, annot2, self.prime_term(body), t.struct)
        rel_body = self.rel(body)
        self.ctx = saved
        fix_r = Fix(xr, app(rel_annot, Var(x), Var(x2)), rel_body,
                    struct=3 * k + 2)
        return subst_many(fix_r, {x: src, x2: primed_src})

    # global blocks

    def ensure_translated_inductive(self, name: str) -> InductiveDecl:
        """Register the translated inductive block on first use; memoized."""
        env = self.env
        if name in env.translated_inds:
            return env.inductive(env.translated_inds[name])
        decl = env.inductives.get(name)
        if decl is None:
            raise UnboundVariable(f"unknown inductive {name}")
        supply = NameSupply(env.all_names())
        ind_r = supply.fresh(name + "_R")
        ctor_rs = [supply.fresh(c + "_R") for c, _ in decl.constructors]
        env.translated_inds[name] = ind_r
        for (c, _), cr in zip(decl.constructors, ctor_rs):
            env.translated_constrs[c] = cr
        try:
            sub = _Translator(env)
            arity_r = normalize(
                app(sub.rel(decl.arity), IndRef(name), IndRef(name)), env)
            ctors_r = []
            for (c, cty), cr in zip(decl.constructors, ctor_rs):
                sub = _Translator(env)
                ctors_r.append((cr, normalize(
                    app(sub.rel(cty), ConstrRef(c), ConstrRef(c)), env)))
            declare_inductive(env, ind_r, 3 * decl.param_count, arity_r,
                              ctors_r)
        except Exception:
            del env.translated_inds[name]
            for c, _ in decl.constructors:
                env.translated_constrs.pop(c, None)
            raise
        return env.inductive(ind_r)

    def ensure_translated_constant(self, name: str) -> str:
        """Translate a global definition by name: d maps to a registered
        constant d_R whose body is the translation of d's body."""
        env = self.env
        if name in env.translated_consts:
            return env.translated_consts[name]
        ty, body = env.definitions[name]
        sub = _Translator(env)
        rel_body = sub.rel(body)
        sub2 = _Translator(env)
        expected = normalize(
            app(sub2.rel(ty), Const(name), Const(name)), env)
        supply = NameSupply(env.all_names())
        const_r = supply.fresh(name + "_R")
        register_definition(env, const_r, expected, rel_body)
        env.translated_consts[name] = const_r
        return const_r

    # cases

    def _case_result_sort(self, case: Case, decl: InductiveDecl) -> Sort:
        fuel = Fuel(self.env.fuel_limit)
        ty = infer(self.ctx, case.motive, self.env, fuel)
        for _ in range(len(decl.index_telescope) + 1):
            ty = whnf(ty, self.env, fuel)
            if not isinstance(ty, Prod):
                raise IllTyped("case motive does not have a motive type")
            z = self.supply.fresh("y")
            ty = rename(ty.codomain, ty.binder, z)
        ty = whnf(ty, self.env, fuel)
        if not isinstance(ty, SortT):
            raise IllTyped("case motive does not conclude in a sort")
        return ty.sort

    def _rel_case(self, t: Case) -> Term:
        decl = self.env.inductive(t.ind)
        result_sort = self._case_result_sort(t, decl)
        if decl.concl_sort.kind == SET and result_sort.kind == TYPE:
            return self._rel_large_case(t, decl, result_sort)
        ind_r = self.ensure_translated_inductive(t.ind)
        params_r: list[Term] = []
        for q in t.params:
            params_r += [q, self.prime_term(q), self.rel(q)]
        motive_r = self.theta(decl, t.params, t.motive, t.branches)
        branches_r = tuple(self.rel(f) for f in t.branches)
        return Case(ind_r.name, self.rel(t.scrutinee), tuple(params_r),
                    motive_r, branches_r)

    def theta(self, decl: InductiveDecl, params: tuple[Term, ...],
              motive: Term, branches: tuple[Term, ...]) -> Term:
        """The motive of a translated case: abstract the tripled indices,
        both scrutinees and the relation witness, and relate the two
        original case expressions."""
        sub = {x: q for (x, _), q in zip(decl.param_telescope, params)}
        params2 = [self.prime_term(q) for q in params]
        params_r: list[Term] = []
        for q, q2 in zip(params, params2):
            params_r += [q, q2, self.rel(q)]

        saved = self.ctx
        binders: list[tuple[str, Term]] = []
        idx_triples: list[tuple[str, str, str]] = []
        for yname, bty in decl.index_telescope:
            b = subst_many(bty, sub)
            x, _ = self._open(yname)
            b2 = self.prime_term(b)
            rel_b = self.rel(b)
            x2, xr = self._bind(x, b)
            binders += [(x, b), (x2, b2), (xr, app(rel_b, Var(x), Var(x2)))]
            idx_triples.append((x, x2, xr))
            sub[yname] = Var(x)

        a = self.supply.fresh("a")
        a2 = self.supply.primed(a)
        ar = self.supply.rel(a)
        xs = [Var(x) for x, _, _ in idx_triples]
        x2s = [Var(x2) for _, x2, _ in idx_triples]
        ty_a = app(IndRef(decl.name), *params, *xs)
        ty_a2 = app(IndRef(decl.name), *params2, *x2s)
        ind_r = self.ensure_translated_inductive(decl.name)
        flat_idx = [Var(n) for triple in idx_triples for n in triple]
        ty_ar = app(IndRef(ind_r.name), *params_r, *flat_idx, Var(a), Var(a2))

        rel_motive = self.rel(motive)
        motive2 = self.prime_term(motive)
        branches2 = tuple(self.prime_term(f) for f in branches)
        left = Case(decl.name, Var(a), params, motive, branches)
        right = Case(decl.name, Var(a2), tuple(params2), motive2, branches2)
        body = app(rel_motive, *flat_idx, Var(a), Var(a2), Var(ar), left, right)
        self.ctx = saved
        return lams(binders + [(a, ty_a), (a2, ty_a2), (ar, ty_ar)], body)

    # -- large elimination (Set into Type) via nested destruction ----------

    def _rel_large_case(self, t: Case, decl: InductiveDecl,
                        result_sort: Sort) -> Term:
        if not decl.is_small:
            raise NotSmallInductive(
                f"large elimination of {decl.name} into {result_sort} falls "
                f"outside the small-inductive fragment")
        if decl.param_count != 0 or decl.index_telescope:
            raise NotSupported(
                "nested-destruction translation is implemented for "
                "unparameterized, non-indexed small inductives only")
        if not isinstance(t.motive, Lam) \
                or t.motive.binder in free_vars(t.motive.body):
            raise NotSupported(
                "nested-destruction translation needs a non-dependent motive")
        ctor_args = _constructor_args(self.env, decl)
        for cname, args in ctor_args:
            bound: set[str] = set()
            for zname, zty in args:
                if free_vars(zty) & bound:
                    raise NotSupported(
                        f"constructor {cname} has dependent argument types")
                bound.add(zname)

        level = result_sort.level
        ind_r = self.ensure_translated_inductive(decl.name)
        rel_c = self.rel(t.motive.body)

        scrut2 = self.prime_term(t.scrutinee)
        rel_scrut = self.rel(t.scrutinee)

        def left(y: Term) -> Term:
            return Case(decl.name, y, (), t.motive, t.branches)

        def right(y: Term) -> Term:
            return Case(decl.name, y, (),
                        self.prime_term(t.motive),
                        tuple(self.prime_term(f) for f in t.branches))

        a = self.supply.fresh("a")
        h0 = self.supply.fresh("h")
        outer_motive = Lam(a, IndRef(decl.name), Prod(
            h0, app(IndRef(ind_r.name), Var(a), scrut2),
            app(rel_c, left(Var(a)), right(scrut2))))

        outer_branches = []
        for j, (cj, args_j) in enumerate(ctor_args):
            zs = [(self.supply.fresh(z), ty) for z, ty in args_j]
            cj_applied = app(ConstrRef(cj), *(Var(z) for z, _ in zs))
            a2 = self.supply.fresh("a'")
            hi = self.supply.fresh("h")
            inner_motive = Lam(a2, IndRef(decl.name), Prod(
                hi, app(IndRef(ind_r.name), cj_applied, Var(a2)),
                app(rel_c, left(cj_applied), right(Var(a2)))))
            inner_branches = []
            for l, (cl, args_l) in enumerate(ctor_args):
                z2s = [(self.supply.primed(z), ty) for z, ty in args_l]
                cl_applied = app(ConstrRef(cl), *(Var(z) for z, _ in z2s))
                h2 = self.supply.fresh("h")
                h2_ty = app(IndRef(ind_r.name), cj_applied, cl_applied)
                if l == j:
                    value = self.rel(t.branches[j])
                    zl = [Var(z) for z, _ in zs]
                    zr = [Var(z) for z, _ in z2s]
                    for i in range(len(args_j)):
                        inv = ensure_inv(self.env, decl, j, i)
                        inv_app = app(Const(inv), *zl, *zr, Var(h2))
                        value = app(value, zl[i], zr[i], inv_app)
                else:
                    target = app(rel_c, left(cj_applied), right(cl_applied))
                    absurd = ensure_absurd(self.env, level)
                    abs_fn = ensure_abs(self.env, decl, j, l)
                    falsum = app(Const(abs_fn), *(Var(z) for z, _ in zs),
                                 *(Var(z) for z, _ in z2s), Var(h2))
                    value = app(Const(absurd), target, falsum)
                inner_branches.append(lams(z2s, Lam(h2, h2_ty, value)))
            h1 = self.supply.fresh("h")
            h1_ty = app(IndRef(ind_r.name), cj_applied, scrut2)
            inner_case = Case(decl.name, scrut2, (), inner_motive,
                              tuple(inner_branches))
            outer_branches.append(
                lams(zs, Lam(h1, h1_ty, App(inner_case, Var(h1)))))

        outer = Case(decl.name, t.scrutinee, (), outer_motive,
                     tuple(outer_branches))
        return App(outer, rel_scrut)


# -- synthesized auxiliaries for the nested-destruction scheme ---------------

def _constructor_args(env: GlobalEnv, decl: InductiveDecl):
    """(name, argument telescope) per constructor of an unparameterized
    inductive, binders freshened."""
    out = []
    fuel = Fuel(env.fuel_limit)
    for cname, cty in decl.constructors:
        binders = []
        ty = whnf(cty, env, fuel)
        avoid = set(env.all_names())
        while isinstance(ty, Prod):
            name = ty.binder
            cod = ty.codomain
            if name == "_" or name in avoid:
                name = fresh_name("z", avoid | free_vars(cod))
                cod = rename(ty.codomain, ty.binder, name)
            avoid.add(name)
            binders.append((name, ty.domain))
            ty = whnf(cod, env, fuel)
        out.append((cname, binders))
    return out


def _trivial_prop() -> tuple[Term, Term]:
    """A closed inhabited proposition (forall X : Prop, X -> X) and its
    inhabitant; used as the filler in off-target selector branches."""
    prop = Prod("X", SortT(Sort(PROP)), arrow(Var("X"), Var("X")))
    proof = Lam("X", SortT(Sort(PROP)), Lam("p", Var("X"), Var("p")))
    return prop, proof


def _false_inductive(env: GlobalEnv) -> str:
    decl = env.inductives.get("False")
    if decl is None or decl.constructors or decl.concl_sort.kind != PROP:
        raise NotSupported(
            "nested-destruction translation needs an empty Prop inductive "
            "named False in the environment")
    return "False"


def ensure_absurd(env: GlobalEnv, level: int) -> str:
    """Register (once per universe level) the eliminator of False into
    Type@level, built from its empty case."""
    key = ("absurd", level)
    if key in env.aux_defs:
        return env.aux_defs[key]
    false = _false_inductive(env)
    supply = NameSupply(env.all_names())
    name = supply.fresh("absurd")
    ty = Prod("alpha", SortT(Sort(TYPE, level)),
              arrow(IndRef(false), Var("alpha")))
    body = Lam("alpha", SortT(Sort(TYPE, level)),
               Lam("h", IndRef(false),
                   Case(false, Var("h"), (),
                        Lam("u", IndRef(false), Var("alpha")), ())))
    register_definition(env, name, ty, body)
    env.aux_defs[key] = name
    return name


def _selector(env: GlobalEnv, decl: InductiveDecl, ctor_args, j: int, l: int,
              a: Term, a2: Term, supply: NameSupply,
              hit: Callable[[list[str], list[str]], Term]) -> Term:
    """Prop-valued double match on (a, a2): hit(outer binders, inner
    binders) on the (j, l) constructor pair, a trivial proposition
    elsewhere.  Small eliminations only."""
    trivial_ty, _ = _trivial_prop()
    outer_branches = []
    for m, (_, args1) in enumerate(ctor_args):
        ws1 = [supply.fresh("w") for _ in args1]
        if m == j:
            inner_branches = []
            for m2, (_, args2) in enumerate(ctor_args):
                ws2 = [supply.fresh("w'") for _ in args2]
                value = hit(ws1, ws2) if m2 == l else trivial_ty
                inner_branches.append(
                    lams([(w, ty) for w, (_, ty) in zip(ws2, args2)], value))
            u = supply.fresh("u")
            value = Case(decl.name, a2, (),
                         Lam(u, IndRef(decl.name), SortT(Sort(PROP))),
                         tuple(inner_branches))
        else:
            value = trivial_ty
        outer_branches.append(
            lams([(w, ty) for w, (_, ty) in zip(ws1, args1)], value))
    v = supply.fresh("v")
    return Case(decl.name, a, (),
                Lam(v, IndRef(decl.name), SortT(Sort(PROP))),
                tuple(outer_branches))


def _ind_r_case(env: GlobalEnv, decl: InductiveDecl, ind_r: InductiveDecl,
                ctor_args, j: int, scrutinee: Term, supply: NameSupply,
                hit: Callable[[list[str], list[str]], Term],
                diag_value: Callable[[int, list[tuple[str, Term]]], Term],
                hit_j: Optional[int] = None) -> Term:
    """Destruct a proof of the translated relation with a selector motive.

    hit computes the motive's payload on the (j, hit_j) constructor pair;
    diag_value produces the branch value for the m-th constructor of the
    translated inductive given its (tripled) binder telescope.
    """
    if hit_j is None:
        hit_j = j
    a = supply.fresh("a")
    a2 = supply.fresh("a'")
    hr = supply.fresh("hr")
    sel = _selector(env, decl, ctor_args, j, hit_j, Var(a), Var(a2), supply,
                    hit)
    motive = lams(
        [(a, IndRef(decl.name)), (a2, IndRef(decl.name)),
         (hr, app(IndRef(ind_r.name), Var(a), Var(a2)))], sel)
    fuel = Fuel(env.fuel_limit)
    branches = []
    for m, (_, cty_r) in enumerate(ind_r.constructors):
        binders = []
        ty = whnf(cty_r, env, fuel)
        while isinstance(ty, Prod):
            nb = supply.fresh(ty.binder)
            binders.append((nb, ty.domain))
            ty = whnf(rename(ty.codomain, ty.binder, nb), env, fuel)
        branches.append(lams(binders, diag_value(m, binders)))
    return Case(ind_r.name, scrutinee, (), motive, tuple(branches))


def ensure_inv(env: GlobalEnv, decl: InductiveDecl, j: int, i: int) -> str:
    """Register the inversion extracting, from a relation proof between two
    applications of the same constructor, the relation on its i-th
    arguments."""
    key = ("inv", decl.name, j, i)
    if key in env.aux_defs:
        return env.aux_defs[key]
    tr = _Translator(env)
    ind_r = tr.ensure_translated_inductive(decl.name)
    ctor_args = _constructor_args(env, decl)
    cname, args = ctor_args[j]
    suffix = f"_inv_{j + 1}" if len(args) == 1 else f"_inv_{j + 1}_{i + 1}"
    name = NameSupply(env.all_names()).fresh(decl.name + suffix)

    supply = NameSupply(env.all_names())
    zs = [(supply.fresh(z), ty) for z, ty in args]
    z2s = [(supply.primed(z), ty) for (z, _), (_, ty) in zip(zs, args)]
    cj_l = app(ConstrRef(cname), *(Var(z) for z, _ in zs))
    cj_r = app(ConstrRef(cname), *(Var(z) for z, _ in z2s))
    rel_ei = _Translator(env).rel(args[i][1])
    goal = app(rel_ei, Var(zs[i][0]), Var(z2s[i][0]))
    h = supply.fresh("h")
    h_ty = app(IndRef(ind_r.name), cj_l, cj_r)
    ty = prods(zs + z2s + [(h, h_ty)], goal)

    def hit(ws1: list[str], ws2: list[str]) -> Term:
        return app(rel_ei, Var(ws1[i]), Var(ws2[i]))

    _, trivial_proof = _trivial_prop()

    def diag_value(m: int, binders: list[tuple[str, Term]]) -> Term:
        if m == j:
            return Var(binders[3 * i + 2][0])
        return trivial_proof

    body = lams(zs + z2s, Lam(h, h_ty, _ind_r_case(
        env, decl, ind_r, ctor_args, j, Var(h), supply, hit, diag_value)))
    register_definition(env, name, ty, body)
    env.aux_defs[key] = name
    return name


def ensure_abs(env: GlobalEnv, decl: InductiveDecl, j: int, l: int) -> str:
    """Register the absurdity witness: a relation proof between
    applications of two distinct constructors is contradictory."""
    key = ("abs", decl.name, j, l)
    if key in env.aux_defs:
        return env.aux_defs[key]
    false = _false_inductive(env)
    tr = _Translator(env)
    ind_r = tr.ensure_translated_inductive(decl.name)
    ctor_args = _constructor_args(env, decl)
    cj, args_j = ctor_args[j]
    cl, args_l = ctor_args[l]
    name = NameSupply(env.all_names()).fresh(
        f"{decl.name}_abs_{j + 1}_{l + 1}")

    supply = NameSupply(env.all_names())
    zs = [(supply.fresh(z), ty) for z, ty in args_j]
    z2s = [(supply.primed(z), ty) for z, ty in args_l]
    cj_app = app(ConstrRef(cj), *(Var(z) for z, _ in zs))
    cl_app = app(ConstrRef(cl), *(Var(z) for z, _ in z2s))
    h = supply.fresh("h")
    h_ty = app(IndRef(ind_r.name), cj_app, cl_app)
    ty = prods(zs + z2s + [(h, h_ty)], IndRef(false))

    def hit(ws1: list[str], ws2: list[str]) -> Term:
        return IndRef(false)

    _, trivial_proof = _trivial_prop()

    def diag_value(m: int, binders: list[tuple[str, Term]]) -> Term:
        return trivial_proof

    body = lams(zs + z2s, Lam(h, h_ty, _ind_r_case(
        env, decl, ind_r, ctor_args, j, Var(h), supply, hit, diag_value,
        hit_j=l)))
    register_definition(env, name, ty, body)
    env.aux_defs[key] = name
    return name


# -- public operations --------------------------------------------------------

def _context_translator(ctx: Context, env: GlobalEnv,
                        extra_avoid=()) -> tuple[_Translator, Context]:
    tr = _Translator(env, extra_avoid=extra_avoid)
    out = Context()
    for x, ty in ctx:
        tr.supply.reserve(x)
        rel_ty = tr.rel(ty)
        ty2 = tr.prime_term(ty)
        x2, xr = tr._bind(x, ty)
        out = out.extend(x, ty)
        out = out.extend(x2, ty2)
        out = out.extend(xr, normalize(app(rel_ty, Var(x), Var(x2)), env))
    return tr, out


def translate_context(ctx: Context, env: GlobalEnv) -> Context:
    """Each entry x : A becomes the triple x : A, x' : A', x_R : [A] x x'."""
    _, out = _context_translator(ctx, env)
    return out


def translate_term(ctx: Context, t: Term, env: GlobalEnv) -> Term:
    """The relation/witness [t] of a term well-typed in ctx."""
    tr, _ = _context_translator(ctx, env, extra_avoid=free_vars(t))
    return tr.rel(t)


def translate_inductive(decl: Union[InductiveDecl, str],
                        env: GlobalEnv) -> InductiveDecl:
    """The translated inductive block with 3p parameters; registering it
    re-runs the full declaration checks."""
    name = decl if isinstance(decl, str) else decl.name
    return _Translator(env).ensure_translated_inductive(name)


def theta(ind: Union[InductiveDecl, str], params: tuple[Term, ...],
          motive: Term, branches: tuple[Term, ...], env: GlobalEnv,
          ctx: Context = Context()) -> Term:
    """The motive of the translated case expression."""
    decl = env.inductive(ind) if isinstance(ind, str) else ind
    avoid = free_vars(motive)
    for t in list(params) + list(branches):
        avoid |= free_vars(t)
    tr, _ = _context_translator(ctx, env, extra_avoid=avoid)
    return tr.theta(decl, tuple(params), motive, tuple(branches))


def translate_case(case: Case, env: GlobalEnv,
                   ctx: Context = Context()) -> Term:
    """Translate a case expression; dispatches to the nested-destruction
    scheme when a Set inductive is eliminated into Type."""
    tr, _ = _context_translator(ctx, env, extra_avoid=free_vars(case))
    return tr._rel_case(case)


def translate_large_elim(case: Case, env: GlobalEnv,
                         ctx: Context = Context()) -> Term:
    """The nested-destruction translation of a large elimination."""
    tr, _ = _context_translator(ctx, env, extra_avoid=free_vars(case))
    decl = env.inductive(case.ind)
    result_sort = tr._case_result_sort(case, decl)
    return tr._rel_large_case(case, decl, result_sort)


def check_abstraction(target: Union[str, Term],
                      env: GlobalEnv) -> TranslationResult:
    """Translate a closed term or a global and re-typecheck the abstraction
    instance: [A] must have type [B] A A'."""
    if isinstance(target, str):
        original, ty = _resolve_global(target, env)
    else:
        original = target
        if free_vars(original):
            raise IllTyped("check_abstraction expects a closed term")
        ty = infer(Context(), original, env)
    tr = _Translator(env, extra_avoid=free_vars(original) | free_vars(ty))
    relation = tr.rel(original)
    primed = prime(original, tr.supply)
    rel_ty = _Translator(env, extra_avoid=free_vars(ty)).rel(ty)
    expected = app(rel_ty, original, primed)
    try:
        verified = check(Context(), relation, expected, env)
    except CicrError:
        verified = False
    return TranslationResult(original, primed, relation, expected, verified)


def _resolve_global(name: str, env: GlobalEnv) -> tuple[Term, Term]:
    if name in env.inductives:
        return IndRef(name), env.inductive(name).arity
    if name in env.constructors:
        ind, j = env.constructors[name]
        return ConstrRef(name), env.inductive(ind).constructors[j][1]
    if name in env.definitions:
        return Const(name), env.definitions[name][0]
    if name in env.axioms:
        return Const(name), env.axioms[name]
    raise UnboundVariable(f"unknown global {name}")


def witness_type(env: GlobalEnv, name: str) -> Term:
    """forall h : P, [P] h h for an axiom P; translating the statement
    forces its dependencies (translated inductives, constants) into
    existence."""
    ty = env.axioms.get(name)
    if ty is None:
        raise UnboundVariable(f"unknown axiom {name}")
    tr = _Translator(env, extra_avoid=free_vars(ty))
    rel_ty = tr.rel(ty)
    h = tr.supply.fresh("h")
    return Prod(h, ty, app(rel_ty, Var(h), Var(h)))


def realize_axiom(env: GlobalEnv, name: str, witness: Term) -> GlobalEnv:
    """Register a parametricity witness w : forall h : P, [P] h h for an
    axiom."""
    expected = witness_type(env, name)
    if not check(Context(), witness, expected, env):
        raise WitnessTypeMismatch(
            f"witness for {name} does not have type {expected}")
    env.param_witnesses[name] = witness
    env.history.append(("witness", name))
    return env
