"""The trusted kernel: subtyping, type inference/checking, inductive
declaration checking and the case/fix rules with their elimination
restrictions.

Two sort tables are supported by the same code: the refined calculus
(Prop, Set@i, Type@i, i >= 1) and plain CIC mode (Prop, Type@i, i >= 0)
used by the forgetful embedding.  The mode lives on the environment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    AnnotationNotAType, BranchMismatch, ConstructorIllTyped, GuardViolation,
    IllTyped, IllegalElimination, MalformedCase, MotiveMismatch, NameClash,
    NotAFunction, NotAnArity, PositivityViolation, SortMismatch, TypeMismatch,
    UnboundVariable, UniverseError,
)
from .reduce import DEFAULT_FUEL, Fuel, conv, resolve_struct, whnf
from .terms import (
    PROP, SET, TYPE, App, Case, Const, ConstrRef, Context, Fix, IndRef, Lam,
    Prod, Sort, SortT, Term, TypeS, Var, app, free_vars, fresh_name, prods,
    spine, subst, subst_many,
)


@dataclass(frozen=True)
class InductiveDecl:
    """One elaborated inductive block with its derived elimination data."""

    name: str
    param_count: int
    arity: Term
    constructors: tuple[tuple[str, Term], ...]
    concl_sort: Sort
    param_telescope: tuple[tuple[str, Term], ...]
    index_telescope: tuple[tuple[str, Term], ...]
    arg_counts: tuple[int, ...]
    is_small: bool
    restriction1: bool


class GlobalEnv:
    """Registry of inductive blocks, definitions, axioms and parametricity
    witnesses.

    Built single-threaded during elaboration and read-only afterwards.  The
    translator's memo tables (translated inductives/constants, synthesized
    auxiliaries) live here as the single mutation point.
    """

    def __init__(self, cic_mode: bool = False, prop_cumul: bool = False,
                 fuel_limit: int = DEFAULT_FUEL):
        self.cic_mode = cic_mode
        self.prop_cumul = prop_cumul
        self.fuel_limit = fuel_limit
        self.inductives: dict[str, InductiveDecl] = {}
        self.constructors: dict[str, tuple[str, int]] = {}
        self.definitions: dict[str, tuple[Term, Term]] = {}
        self.axioms: dict[str, Term] = {}
        self.param_witnesses: dict[str, Term] = {}
        self.history: list[tuple[str, str]] = []
        # translator memo tables
        self.translated_inds: dict[str, str] = {}
        self.translated_constrs: dict[str, str] = {}
        self.translated_consts: dict[str, str] = {}
        self.aux_defs: dict[tuple, str] = {}

    # lookups used by the reducer (duck-typed there)

    def def_body(self, name: str) -> Optional[Term]:
        entry = self.definitions.get(name)
        return entry[1] if entry else None

    def constructor_info(self, name: str) -> Optional[tuple[str, int]]:
        return self.constructors.get(name)

    def inductive(self, name: str) -> InductiveDecl:
        return self.inductives[name]

    # general lookups

    def constant_type(self, name: str) -> Optional[Term]:
        entry = self.definitions.get(name)
        if entry:
            return entry[0]
        return self.axioms.get(name)

    def has_name(self, name: str) -> bool:
        return (name in self.inductives or name in self.constructors
                or name in self.definitions or name in self.axioms)

    def all_names(self) -> set[str]:
        names = set(self.inductives) | set(self.constructors)
        names |= set(self.definitions) | set(self.axioms)
        return names

    def resolve(self, name: str) -> Optional[Term]:
        """Global reference node for a name, if registered."""
        if name in self.inductives:
            return IndRef(name)
        if name in self.constructors:
            return ConstrRef(name)
        if name in self.definitions or name in self.axioms:
            return Const(name)
        return None


def _fuel(env: GlobalEnv, fuel: Optional[Fuel]) -> Fuel:
    return fuel if fuel is not None else Fuel(env.fuel_limit)


# -- sorts ------------------------------------------------------------------

def sort_axiom(s: Sort, env: GlobalEnv) -> Sort:
    """The type of a sort (rules AX1..AX3, per mode)."""
    if s.kind == PROP:
        return TypeS(1)
    if s.kind == SET:
        if env.cic_mode:
            raise SortMismatch("Set sorts do not exist in CIC mode")
        return TypeS(s.level + 1)
    if not env.cic_mode and s.level < 1:
        raise UniverseError("Type@0 is not a sort of the refined calculus")
    return TypeS(s.level + 1)


def product_sort(dom: Sort, cod: Sort) -> Sort:
    """Sort of forall x : A. B given the sorts of A and B.

    Prop codomains are impredicative.  Quantifying over inhabitants of a
    Prop or Set does not lift the level; quantifying over something whose
    type lives in Type@i (a sort, an arity, ...) lifts the result to at
    least level i.  This reproduces church_0 : Set@1.
    """
    if cod.kind == PROP:
        return Sort(PROP)
    lift = dom.level if dom.kind == TYPE else 0
    return Sort(cod.kind, max(lift, cod.level))


def subtype(a: Term, b: Term, env: GlobalEnv, fuel: Optional[Fuel] = None) -> bool:
    """a <: b — cumulativity of Set/Type levels, lifted covariantly through
    product codomains, closed under conversion."""
    fuel = _fuel(env, fuel)
    return _subtype(a, b, env, fuel)


def _subtype(a: Term, b: Term, env: GlobalEnv, fuel: Fuel) -> bool:
    a = whnf(a, env, fuel)
    b = whnf(b, env, fuel)
    if isinstance(a, SortT) and isinstance(b, SortT):
        sa, sb = a.sort, b.sort
        if sa == sb:
            return True
        if sa.kind == sb.kind and sa.kind in (SET, TYPE):
            return sa.level < sb.level
        if env.cic_mode and env.prop_cumul and sa.kind == PROP and sb.kind == TYPE:
            return True
        return False
    if isinstance(a, Prod) and isinstance(b, Prod):
        if not conv(a.domain, b.domain, env, fuel):
            return False
        z = fresh_name(a.binder, free_vars(a.codomain) | free_vars(b.codomain))
        return _subtype(subst(a.codomain, Var(z), a.binder),
                        subst(b.codomain, Var(z), b.binder), env, fuel)
    return conv(a, b, env, fuel)


# -- inference --------------------------------------------------------------

def infer(ctx: Context, t: Term, env: GlobalEnv, fuel: Optional[Fuel] = None) -> Term:
    """Minimal type of t in ctx; cumulativity is applied only at check
    boundaries."""
    fuel = _fuel(env, fuel)
    return _infer(ctx, t, env, fuel)


def check(ctx: Context, t: Term, expected: Term, env: GlobalEnv,
          fuel: Optional[Fuel] = None) -> bool:
    """True iff the inferred type of t matches expected up to conversion
    followed by subtyping."""
    fuel = _fuel(env, fuel)
    ty = _infer(ctx, t, env, fuel)
    return _subtype(ty, expected, env, fuel)


def _open_binder(ctx: Context, binder: str, *bodies: Term) -> tuple[str, list[Term]]:
    """Freshen a binder against the context so extension keeps names distinct."""
    if binder != "_" and ctx.lookup(binder) is None:
        return binder, list(bodies)
    avoid = ctx.names() | {"_"}
    for b in bodies:
        avoid |= free_vars(b)
    name = fresh_name(binder if binder != "_" else "x", avoid)
    return name, [subst(b, Var(name), binder) for b in bodies]


def _sort_of(ctx: Context, t: Term, env: GlobalEnv, fuel: Fuel) -> Sort:
    ty = whnf(_infer(ctx, t, env, fuel), env, fuel)
    if not isinstance(ty, SortT):
        raise SortMismatch(f"expected a type, found a term of type {ty}")
    return ty.sort


def _infer(ctx: Context, t: Term, env: GlobalEnv, fuel: Fuel) -> Term:
    if isinstance(t, Var):
        ty = ctx.lookup(t.name)
        if ty is None:
            raise UnboundVariable(f"unbound variable {t.name}")
        return ty
    if isinstance(t, SortT):
        return SortT(sort_axiom(t.sort, env))
    if isinstance(t, Prod):
        dom_sort = _sort_of(ctx, t.domain, env, fuel)
        binder, [cod] = _open_binder(ctx, t.binder, t.codomain)
        cod_sort = _sort_of(ctx.extend(binder, t.domain), cod, env, fuel)
        return SortT(product_sort(dom_sort, cod_sort))
    if isinstance(t, Lam):
        _sort_of(ctx, t.domain, env, fuel)
        binder, [body] = _open_binder(ctx, t.binder, t.body)
        body_ty = _infer(ctx.extend(binder, t.domain), body, env, fuel)
        return Prod(binder, t.domain, body_ty)
    if isinstance(t, App):
        fn_ty = whnf(_infer(ctx, t.fn, env, fuel), env, fuel)
        if not isinstance(fn_ty, Prod):
            raise NotAFunction(f"application head has non-product type {fn_ty}")
        arg_ty = _infer(ctx, t.arg, env, fuel)
        if not _subtype(arg_ty, fn_ty.domain, env, fuel):
            raise TypeMismatch(
                f"argument has type {arg_ty}, expected {fn_ty.domain}")
        return subst(fn_ty.codomain, t.arg, fn_ty.binder)
    if isinstance(t, IndRef):
        decl = env.inductives.get(t.name)
        if decl is None:
            raise UnboundVariable(f"unknown inductive {t.name}")
        return decl.arity
    if isinstance(t, ConstrRef):
        info = env.constructor_info(t.name)
        if info is None:
            raise UnboundVariable(f"unknown constructor {t.name}")
        ind, j = info
        return env.inductive(ind).constructors[j][1]
    if isinstance(t, Const):
        ty = env.constant_type(t.name)
        if ty is None:
            raise UnboundVariable(f"unknown constant {t.name}")
        return ty
    if isinstance(t, Case):
        return check_case(ctx, t, env, fuel)
    if isinstance(t, Fix):
        return check_fix(ctx, t, env, fuel)
    raise TypeError(f"unknown term node {type(t).__name__}")


# -- inductive declarations --------------------------------------------------

def _peel_telescope(ty: Term, env: GlobalEnv, fuel: Fuel,
                    avoid: set[str]) -> tuple[list[tuple[str, Term]], Term]:
    """Split a type into (binders, conclusion), whnf-normalizing at each
    step and freshening binders against avoid."""
    binders: list[tuple[str, Term]] = []
    ty = whnf(ty, env, fuel)
    while isinstance(ty, Prod):
        name = ty.binder
        cod = ty.codomain
        if name == "_" or name in avoid:
            name = fresh_name(name if name != "_" else "y", avoid | free_vars(cod))
            cod = subst(cod, Var(name), ty.binder)
        avoid.add(name)
        binders.append((name, ty.domain))
        ty = whnf(cod, env, fuel)
    return binders, ty


def _occurs_ind(name: str, t: Term) -> bool:
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, IndRef) and u.name == name:
            return True
        if isinstance(u, Case) and u.ind == name:
            return True
        if isinstance(u, (Prod, Lam)):
            stack.append(u.domain)
            stack.append(u.codomain if isinstance(u, Prod) else u.body)
        elif isinstance(u, App):
            stack.append(u.fn)
            stack.append(u.arg)
        elif isinstance(u, Case):
            stack.append(u.scrutinee)
            stack.extend(u.params)
            stack.append(u.motive)
            stack.extend(u.branches)
        elif isinstance(u, Fix):
            stack.append(u.annot)
            stack.append(u.body)
    return False


def _strictly_positive(name: str, arg_ty: Term, env: GlobalEnv, fuel: Fuel) -> bool:
    """The inductive may occur in a constructor argument type only as the
    head of its conclusion, applied to arguments not mentioning it."""
    if not _occurs_ind(name, arg_ty):
        return True
    ty = whnf(arg_ty, env, fuel)
    while isinstance(ty, Prod):
        if _occurs_ind(name, ty.domain):
            return False
        ty = whnf(ty.codomain, env, fuel)
    head, args = spine(ty)
    if isinstance(head, IndRef) and head.name == name:
        return not any(_occurs_ind(name, a) for a in args)
    return not _occurs_ind(name, ty)


def declare_inductive(env: GlobalEnv, name: str, param_count: int, arity: Term,
                      constructors: list[tuple[str, Term]]) -> GlobalEnv:
    """Check conditions 1-4 on a candidate inductive block and register it.

    Condition 1: fresh names.  Condition 2: the arity is a well-typed
    telescope concluding in Prop or Set.  Condition 3: constructors have the
    required shape and are strictly positive.  Condition 4: each constructor
    type has the arity's conclusion sort under the parameters.
    """
    fuel = Fuel(env.fuel_limit)
    names = [name] + [c for c, _ in constructors]
    if len(set(names)) != len(names):
        raise NameClash(f"duplicate names in inductive {name}")
    for n in names:
        if env.has_name(n):
            raise NameClash(f"name {n} is already declared")

    # condition 2
    empty = Context()
    arity_sort = whnf(_infer(empty, arity, env, fuel), env, fuel)
    if not isinstance(arity_sort, SortT):
        raise NotAnArity(f"arity of {name} is not a type")
    telescope, concl = _peel_telescope(arity, env, fuel, set())
    if not isinstance(concl, SortT):
        raise NotAnArity(f"arity of {name} does not conclude in a sort")
    r = concl.sort
    allowed = (PROP, TYPE) if env.cic_mode else (PROP, SET)
    if r.kind not in allowed:
        raise NotAnArity(
            f"arity of {name} concludes in {r}, expected one of {allowed}")
    if param_count > len(telescope):
        raise NotAnArity(
            f"{name} declares {param_count} parameters but its arity has "
            f"only {len(telescope)} binders")
    params = tuple(telescope[:param_count])
    indices = tuple(telescope[param_count:])
    for _, pty in params:
        if _occurs_ind(name, pty):
            raise PositivityViolation(f"{name} occurs in its own parameters")

    # provisional registration so constructor types can mention the block
    arg_counts: list[int] = []
    ctor_data: list[tuple[str, Term]] = []
    small = True
    restriction1 = len(constructors) == 0
    decl_stub = InductiveDecl(name, param_count, arity, tuple(constructors),
                              r, params, indices, (), True, restriction1)
    env.inductives[name] = decl_stub
    try:
        only_prop_args = True
        for cname, cty in constructors:
            n_j, ctor_small, ctor_prop = _check_constructor(
                env, name, params, indices, r, cname, cty, fuel)
            arg_counts.append(n_j)
            small = small and ctor_small
            only_prop_args = only_prop_args and ctor_prop
            ctor_data.append((cname, cty))
        restriction1 = len(constructors) == 0 or (
            len(constructors) == 1 and only_prop_args)
    except Exception:
        del env.inductives[name]
        raise

    decl = InductiveDecl(name, param_count, arity, tuple(ctor_data), r,
                         params, indices, tuple(arg_counts), small, restriction1)
    env.inductives[name] = decl
    for j, (cname, _) in enumerate(constructors):
        env.constructors[cname] = (name, j)
    env.history.append(("inductive", name))
    return env


def _check_constructor(env: GlobalEnv, ind: str,
                       params: tuple[tuple[str, Term], ...],
                       indices: tuple[tuple[str, Term], ...], r: Sort,
                       cname: str, cty: Term,
                       fuel: Fuel) -> tuple[int, bool, bool]:
    """Shape, positivity and sorting of one constructor type.

    Returns (argument count, all arguments of sort Prop/Set, all arguments
    of sort Prop).
    """
    p = len(params)
    telescope, concl = _peel_telescope(cty, env, fuel, set())
    if len(telescope) < p:
        raise ConstructorIllTyped(
            f"constructor {cname} does not abstract the {p} parameters")

    # the parameter prefix must match the arity's, up to conversion
    ctx = Context()
    sub: dict[str, Term] = {}
    for (xa, ta), (xc, tc) in zip(params, telescope[:p]):
        if not conv(subst_many(ta, sub), tc, env, fuel):
            raise ConstructorIllTyped(
                f"constructor {cname}: parameter {xc} has type {tc}, "
                f"expected {ta}")
        ctx = ctx.extend(xc, tc)
        sub[xa] = Var(xc)

    args = telescope[p:]
    small = True
    prop_only = True
    for zname, zty in args:
        if not _strictly_positive(ind, zty, env, fuel):
            raise PositivityViolation(
                f"{ind} occurs non-positively in an argument of {cname}")
        arg_sort = _sort_of(ctx, zty, env, fuel)
        small = small and arg_sort.kind in (PROP, SET)
        prop_only = prop_only and arg_sort.kind == PROP
        ctx = ctx.extend(zname, zty)

    head, concl_args = spine(concl)
    if not (isinstance(head, IndRef) and head.name == ind):
        raise ConstructorIllTyped(
            f"constructor {cname} does not conclude in {ind}")
    if len(concl_args) != p + len(indices):
        raise ConstructorIllTyped(
            f"constructor {cname} applies {ind} to {len(concl_args)} "
            f"arguments, expected {p + len(indices)}")
    for i, ((xc, _), actual) in enumerate(zip(telescope[:p], concl_args[:p])):
        if not (isinstance(actual, Var) and actual.name == xc):
            raise ConstructorIllTyped(
                f"constructor {cname} must apply {ind} to parameter {xc} "
                f"at position {i}")
    for d in concl_args[p:]:
        if _occurs_ind(ind, d):
            raise PositivityViolation(
                f"{ind} occurs in a conclusion index of {cname}")

    # condition 4: the constructor type minus parameters has sort r
    param_ctx = Context()
    for xc, tc in telescope[:p]:
        param_ctx = param_ctx.extend(xc, tc)
    inner = prods(args, concl)
    inner_sort = _sort_of(param_ctx, inner, env, fuel)
    if not _subtype(SortT(inner_sort), SortT(r), env, fuel):
        raise ConstructorIllTyped(
            f"constructor {cname} has sort {inner_sort}, expected {r}")
    return len(args), small, prop_only


# -- case -------------------------------------------------------------------

def _restriction1_ok(decl: InductiveDecl) -> bool:
    return decl.restriction1


def check_case(ctx: Context, case: Case, env: GlobalEnv,
               fuel: Optional[Fuel] = None) -> Term:
    """The CASE rule: checks scrutinee, motive and branches and enforces the
    elimination restrictions; returns the type of the whole expression."""
    fuel = _fuel(env, fuel)
    decl = env.inductives.get(case.ind)
    if decl is None:
        raise MalformedCase(f"case over unknown inductive {case.ind}")
    p = decl.param_count
    n = len(decl.index_telescope)
    k = len(decl.constructors)
    if len(case.params) != p:
        raise MalformedCase(
            f"case over {case.ind} has {len(case.params)} parameter "
            f"instances, expected {p}")
    if len(case.branches) != k:
        raise BranchMismatch(
            f"case over {case.ind} has {len(case.branches)} branches, "
            f"expected {k}")

    scrut_ty = whnf(_infer(ctx, case.scrutinee, env, fuel), env, fuel)
    head, margs = spine(scrut_ty)
    if not (isinstance(head, IndRef) and head.name == case.ind
            and len(margs) == p + n):
        raise TypeMismatch(
            f"case scrutinee has type {scrut_ty}, expected an instance of "
            f"{case.ind}")
    for q, m in zip(case.params, margs[:p]):
        if not conv(q, m, env, fuel):
            raise TypeMismatch(
                f"case parameter instance {q} does not match scrutinee "
                f"parameter {m}")
    index_insts = margs[p:]

    # motive: forall (y : B[Q/x])^n, I Q y^n -> r'
    sub = {x: q for (x, _), q in zip(decl.param_telescope, case.params)}
    motive_ty = _infer(ctx, case.motive, env, fuel)
    mctx = ctx
    yvars: list[Term] = []
    ty = motive_ty
    for yname, bty in decl.index_telescope:
        ty = whnf(ty, env, fuel)
        if not isinstance(ty, Prod):
            raise MotiveMismatch(
                f"motive of case over {case.ind} abstracts too few indices")
        expected = subst_many(bty, sub)
        if not conv(ty.domain, expected, env, fuel):
            raise MotiveMismatch(
                f"motive index has type {ty.domain}, expected {expected}")
        fresh = fresh_name(yname, mctx.names() | free_vars(ty.codomain))
        mctx = mctx.extend(fresh, expected)
        sub[yname] = Var(fresh)
        yvars.append(Var(fresh))
        ty = subst(ty.codomain, Var(fresh), ty.binder)
    ty = whnf(ty, env, fuel)
    if not isinstance(ty, Prod):
        raise MotiveMismatch(
            f"motive of case over {case.ind} does not abstract the scrutinee")
    expected_scrut = app(IndRef(case.ind), *case.params, *yvars)
    if not conv(ty.domain, expected_scrut, env, fuel):
        raise MotiveMismatch(
            f"motive scrutinee slot has type {ty.domain}, expected "
            f"{expected_scrut}")
    z = fresh_name("a", mctx.names() | free_vars(ty.codomain))
    concl = whnf(subst(ty.codomain, Var(z), ty.binder), env, fuel)
    if not isinstance(concl, SortT):
        raise MotiveMismatch(
            f"motive of case over {case.ind} concludes in {concl}, "
            f"expected a sort")
    result_sort = concl.sort

    _check_elimination(decl, result_sort, env)

    # branches: F_j : forall (z : E_j[Q/x]), T D_j[Q/x] (c_j Q z)
    for j, (cname, cty) in enumerate(decl.constructors):
        expected_fj = _branch_type(ctx, decl, cname, cty, case.params,
                                   case.motive, env, fuel)
        if not check(ctx, case.branches[j], expected_fj, env, fuel):
            raise BranchMismatch(
                f"branch for {cname} does not have type {expected_fj}")

    return app(case.motive, *index_insts, case.scrutinee)


def _check_elimination(decl: InductiveDecl, result_sort: Sort,
                       env: GlobalEnv) -> None:
    s = decl.concl_sort
    if env.cic_mode:
        if s.kind == PROP and result_sort.kind != PROP:
            if not _restriction1_ok(decl):
                raise IllegalElimination(
                    f"cannot eliminate the Prop inductive {decl.name} into "
                    f"{result_sort}: more than one constructor or a "
                    f"non-Prop argument")
        return
    if s.kind == PROP and result_sort.kind in (SET, TYPE):
        if not _restriction1_ok(decl):
            raise IllegalElimination(
                f"cannot eliminate the Prop inductive {decl.name} into "
                f"{result_sort}: more than one constructor or a non-Prop "
                f"argument")
    if s.kind == SET and result_sort.kind == TYPE:
        if not decl.is_small:
            raise IllegalElimination(
                f"large elimination of {decl.name} into {result_sort} needs "
                f"a small inductive definition")


def _branch_type(ctx: Context, decl: InductiveDecl, cname: str, cty: Term,
                 params: tuple[Term, ...], motive: Term, env: GlobalEnv,
                 fuel: Fuel) -> Term:
    telescope, concl = _peel_telescope(cty, env, fuel, set(ctx.names()))
    p = decl.param_count
    sub = {x: q for (x, _), q in zip(telescope[:p], params)}
    binders: list[tuple[str, Term]] = []
    avoid = ctx.names() | set(sub)
    for zname, zty in telescope[p:]:
        fresh = fresh_name(zname, avoid)
        avoid.add(fresh)
        binders.append((fresh, subst_many(zty, sub)))
        sub[zname] = Var(fresh)
    _, concl_args = spine(concl)
    d_insts = [subst_many(d, sub) for d in concl_args[p:]]
    applied_ctor = app(ConstrRef(cname), *params,
                       *(Var(b) for b, _ in binders))
    return prods(binders, app(motive, *d_insts, applied_ctor))


# -- fix --------------------------------------------------------------------

def check_fix(ctx: Context, fix: Fix, env: GlobalEnv,
              fuel: Optional[Fuel] = None) -> Term:
    """The FIX rule: body checked at the annotation under the fix binder,
    plus the structural guard condition."""
    fuel = _fuel(env, fuel)
    try:
        _sort_of(ctx, fix.annot, env, fuel)
    except SortMismatch as e:
        raise AnnotationNotAType(str(e)) from None
    binder, [body] = _open_binder(ctx, fix.binder, fix.body)
    inner = ctx.extend(binder, fix.annot)
    body_ty = _infer(inner, body, env, fuel)
    if not _subtype(body_ty, fix.annot, env, fuel):
        raise TypeMismatch(
            f"fix body has type {body_ty}, expected {fix.annot}")
    k = _decreasing_index(fix, env, fuel)
    _check_guard(binder, body, k, env)
    return fix.annot


def _decreasing_index(fix: Fix, env: GlobalEnv, fuel: Fuel) -> int:
    k = resolve_struct(fix, env, fuel)
    if k is None:
        raise GuardViolation(
            "fix has no argument of inductive type to decrease on")
    ty = fix.annot
    for _ in range(k):
        ty = whnf(ty, env, fuel)
        if not isinstance(ty, Prod):
            raise GuardViolation(
                f"fix annotation has fewer than {k + 1} arguments")
        ty = ty.codomain
    ty = whnf(ty, env, fuel)
    if not isinstance(ty, Prod):
        raise GuardViolation(
            f"fix annotation has fewer than {k + 1} arguments")
    head, _ = spine(whnf(ty.domain, env, fuel))
    if not isinstance(head, IndRef):
        raise GuardViolation(
            f"decreasing argument {k} of fix does not have an inductive type")
    return k


def _check_guard(fname: str, body: Term, k: int, env: GlobalEnv) -> None:
    """Every recursive call passes, at the decreasing position, a variable
    bound by a case branch on the decreasing argument (or on a variable
    already known smaller)."""
    binders: list[str] = []
    t = body
    for _ in range(k + 1):
        if not isinstance(t, Lam):
            raise GuardViolation(
                "fix body must be a lambda telescope covering the "
                "decreasing argument")
        binders.append(t.binder)
        t = t.body
    dec: Optional[str] = binders[k]
    active = fname not in binders
    if dec in binders[k + 1:]:
        dec = None
    _guard_walk(t, fname, active, dec, frozenset(), k, env)


def _guard_walk(t: Term, fname: str, active: bool, dec: Optional[str],
                smaller: frozenset, k: int, env: GlobalEnv) -> None:
    if isinstance(t, Var):
        if active and t.name == fname:
            raise GuardViolation(
                f"recursive reference {fname} must be applied through its "
                f"decreasing argument")
        return
    if isinstance(t, (SortT, IndRef, ConstrRef, Const)):
        return
    if isinstance(t, App):
        head, args = spine(t)
        if active and isinstance(head, Var) and head.name == fname:
            if len(args) <= k:
                raise GuardViolation(
                    f"recursive call to {fname} is not applied to its "
                    f"decreasing argument")
            recarg = args[k]
            if not (isinstance(recarg, Var) and recarg.name in smaller):
                raise GuardViolation(
                    f"recursive call to {fname} does not decrease: argument "
                    f"{k} is not a strict structural subterm")
            for a in args:
                _guard_walk(a, fname, active, dec, smaller, k, env)
            return
        _guard_walk(head, fname, active, dec, smaller, k, env)
        for a in args:
            _guard_walk(a, fname, active, dec, smaller, k, env)
        return
    if isinstance(t, (Prod, Lam)):
        _guard_walk(t.domain, fname, active, dec, smaller, k, env)
        body = t.codomain if isinstance(t, Prod) else t.body
        b = t.binder
        _guard_walk(body, fname, active and b != fname,
                    None if b == dec else dec, smaller - {b}, k, env)
        return
    if isinstance(t, Case):
        for q in t.params:
            _guard_walk(q, fname, active, dec, smaller, k, env)
        _guard_walk(t.motive, fname, active, dec, smaller, k, env)
        _guard_walk(t.scrutinee, fname, active, dec, smaller, k, env)
        scrut_smaller = (isinstance(t.scrutinee, Var)
                         and (t.scrutinee.name == dec
                              or t.scrutinee.name in smaller))
        decl = env.inductives.get(t.ind)
        for j, branch in enumerate(t.branches):
            if scrut_smaller and decl is not None:
                n_j = decl.arg_counts[j] if j < len(decl.arg_counts) else 0
                _guard_walk_branch(branch, n_j, fname, active, dec, smaller,
                                   k, env)
            else:
                _guard_walk(branch, fname, active, dec, smaller, k, env)
        return
    if isinstance(t, Fix):
        _guard_walk(t.annot, fname, active, dec, smaller, k, env)
        b = t.binder
        _guard_walk(t.body, fname, active and b != fname,
                    None if b == dec else dec, smaller - {b}, k, env)
        return
    raise TypeError(f"unknown term node {type(t).__name__}")


def _guard_walk_branch(branch: Term, n_j: int, fname: str, active: bool,
                       dec: Optional[str], smaller: frozenset, k: int,
                       env: GlobalEnv) -> None:
    """Walk a branch of a case on the decreasing argument; its first n_j
    lambda binders become structurally smaller."""
    new_smaller = set(smaller)
    t = branch
    for _ in range(n_j):
        if not isinstance(t, Lam):
            break
        _guard_walk(t.domain, fname, active, dec, frozenset(new_smaller), k, env)
        b = t.binder
        if b == fname:
            active = False
        if b == dec:
            dec = None
        new_smaller.add(b)
        t = t.body
    _guard_walk(t, fname, active, dec, frozenset(new_smaller), k, env)


# -- registration ------------------------------------------------------------

def register_definition(env: GlobalEnv, name: str, ty: Term,
                        body: Term) -> GlobalEnv:
    if env.has_name(name):
        raise NameClash(f"name {name} is already declared")
    fuel = Fuel(env.fuel_limit)
    empty = Context()
    _sort_of(empty, ty, env, fuel)
    if not check(empty, body, ty, env, fuel):
        raise IllTyped(f"body of {name} does not have type {ty}")
    env.definitions[name] = (ty, body)
    env.history.append(("definition", name))
    return env


def register_axiom(env: GlobalEnv, name: str, ty: Term) -> GlobalEnv:
    if env.has_name(name):
        raise NameClash(f"name {name} is already declared")
    fuel = Fuel(env.fuel_limit)
    _sort_of(Context(), ty, env, fuel)
    env.axioms[name] = ty
    env.history.append(("axiom", name))
    return env


def register_witness(env: GlobalEnv, name: str, witness: Term) -> GlobalEnv:
    """Register a parametricity witness for an axiom; the expected witness
    type is produced by the translator, so this delegates there."""
    from .param import realize_axiom
    return realize_axiom(env, name, witness)
