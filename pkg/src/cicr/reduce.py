"""Beta/iota/delta reduction, weak-head normalization and conversion.

The calculus is normalizing but the checker must stay total, so every
reduction loop spends fuel and reports exhaustion instead of diverging.
Delta (unfolding of global definitions) is applied lazily, only when a
Const sits in head position.
"""

from __future__ import annotations

from typing import Optional

from .errors import FuelExhausted, MalformedCase
from .terms import (
    App, Case, Const, ConstrRef, Fix, IndRef, Lam, Prod, SortT, Term, Var,
    app, alpha_eq, free_vars, fresh_name, spine, subst,
)

DEFAULT_FUEL = 10**6


class Fuel:
    """A step budget, strictly decremented per beta/iota/delta step."""

    def __init__(self, limit: int = DEFAULT_FUEL):
        self.remaining = limit

    def spend(self) -> None:
        if self.remaining <= 0:
            raise FuelExhausted("reduction step budget exhausted")
        self.remaining -= 1


def _fuel_for(env, fuel: Optional[Fuel]) -> Fuel:
    if fuel is not None:
        return fuel
    limit = getattr(env, "fuel_limit", DEFAULT_FUEL) if env is not None else DEFAULT_FUEL
    return Fuel(limit)


def beta_step(t: Term) -> Optional[Term]:
    """One head beta contraction, or None when the head is not a redex."""
    head, args = spine(t)
    if isinstance(head, Lam) and args:
        return app(subst(head.body, args[0], head.binder), *args[1:])
    return None


def resolve_struct(fix: Fix, env, fuel: Optional[Fuel] = None) -> Optional[int]:
    """Decreasing-argument index of a fixpoint.

    An explicit annotation wins; otherwise the first argument of the
    annotation telescope whose type is inductive-headed is chosen.
    """
    if fix.struct is not None:
        return fix.struct
    if env is None:
        return None
    fuel = _fuel_for(env, fuel)
    ty = fix.annot
    i = 0
    while True:
        ty = whnf(ty, env, fuel)
        if not isinstance(ty, Prod):
            return None
        head, _ = spine(whnf(ty.domain, env, fuel))
        if isinstance(head, IndRef):
            return i
        ty = ty.codomain
        i += 1


def _case_contractum(case: Case, scrut_head: ConstrRef, scrut_args: list[Term], env) -> Term:
    ind, j = env.constructor_info(scrut_head.name)
    if ind != case.ind:
        raise MalformedCase(
            f"case over {case.ind} applied to constructor {scrut_head.name} of {ind}")
    decl = env.inductive(case.ind)
    if len(case.branches) != len(decl.constructors):
        raise MalformedCase(
            f"case over {case.ind} has {len(case.branches)} branches, "
            f"declaration has {len(decl.constructors)}")
    return app(case.branches[j], *scrut_args[decl.param_count:])


def iota_step(t: Term, env) -> Optional[Term]:
    """One head iota contraction: branch selection or fix unfolding."""
    if env is None:
        return None
    head, args = spine(t)
    if isinstance(head, Case):
        shead, sargs = spine(head.scrutinee)
        if isinstance(shead, ConstrRef) and env.constructor_info(shead.name) is not None:
            return app(_case_contractum(head, shead, sargs, env), *args)
        return None
    if isinstance(head, Fix):
        k = resolve_struct(head, env)
        if k is None or len(args) <= k:
            return None
        rhead, _ = spine(args[k])
        if isinstance(rhead, ConstrRef):
            return app(subst(head.body, head, head.binder), *args)
        return None
    return None


def whnf(t: Term, env, fuel: Optional[Fuel] = None) -> Term:
    """Iterate head beta/iota steps and delta unfolding to weak head normal form."""
    fuel = _fuel_for(env, fuel)
    while True:
        head, args = spine(t)
        if isinstance(head, Lam) and args:
            fuel.spend()
            t = app(subst(head.body, args[0], head.binder), *args[1:])
            continue
        if isinstance(head, Const) and env is not None:
            body = env.def_body(head.name)
            if body is not None:
                fuel.spend()
                t = app(body, *args)
                continue
        if isinstance(head, Case) and env is not None:
            scrut = whnf(head.scrutinee, env, fuel)
            shead, sargs = spine(scrut)
            if isinstance(shead, ConstrRef) and env.constructor_info(shead.name) is not None:
                fuel.spend()
                t = app(_case_contractum(head, shead, sargs, env), *args)
                continue
            stuck = Case(head.ind, scrut, head.params, head.motive, head.branches)
            return app(stuck, *args)
        if isinstance(head, Fix) and env is not None:
            k = resolve_struct(head, env, fuel)
            if k is not None and len(args) > k:
                recarg = whnf(args[k], env, fuel)
                rhead, _ = spine(recarg)
                args = args[:k] + [recarg] + args[k + 1:]
                if isinstance(rhead, ConstrRef):
                    fuel.spend()
                    unfolded = subst(head.body, head, head.binder)
                    t = app(unfolded, *args)
                    continue
            return app(head, *args)
        return app(head, *args)


def normalize(t: Term, env, fuel: Optional[Fuel] = None) -> Term:
    """Full beta-iota-delta normal form."""
    fuel = _fuel_for(env, fuel)
    t = whnf(t, env, fuel)
    if isinstance(t, (Var, SortT, IndRef, ConstrRef, Const)):
        return t
    if isinstance(t, App):
        head, args = spine(t)
        head = _normalize_under(head, env, fuel)
        return app(head, *(normalize(a, env, fuel) for a in args))
    return _normalize_under(t, env, fuel)


def _normalize_under(t: Term, env, fuel: Fuel) -> Term:
    if isinstance(t, Prod):
        return Prod(t.binder, normalize(t.domain, env, fuel), normalize(t.codomain, env, fuel))
    if isinstance(t, Lam):
        return Lam(t.binder, normalize(t.domain, env, fuel), normalize(t.body, env, fuel))
    if isinstance(t, Case):
        return Case(
            t.ind,
            normalize(t.scrutinee, env, fuel),
            tuple(normalize(q, env, fuel) for q in t.params),
            normalize(t.motive, env, fuel),
            tuple(normalize(f, env, fuel) for f in t.branches),
        )
    if isinstance(t, Fix):
        return Fix(t.binder, normalize(t.annot, env, fuel), normalize(t.body, env, fuel), t.struct)
    return t


def conv(a: Term, b: Term, env, fuel: Optional[Fuel] = None) -> bool:
    """Beta-iota-delta convertibility, decided by whnf-then-structural
    descent.

    As a last resort an applied fix in head position is unfolded once even
    when its decreasing argument is not constructor-headed.  Abstraction
    instances for fixpoints need exactly this: the translated body relates
    the one-step unfolding of the original fix with the fix itself.  The
    extension is sound (a fix equals its unfolding in every model) and the
    fuel keeps the check total.
    """
    fuel = _fuel_for(env, fuel)
    return _conv(a, b, env, fuel)


def _fix_unfold_head(t: Term, fuel: Fuel) -> Optional[Term]:
    head, args = spine(t)
    if isinstance(head, Fix) and args:
        fuel.spend()
        return app(subst(head.body, head, head.binder), *args)
    return None


def _conv(a: Term, b: Term, env, fuel: Fuel) -> bool:
    a = whnf(a, env, fuel)
    b = whnf(b, env, fuel)
    if _conv_spine(a, b, env, fuel):
        return True
    ua = _fix_unfold_head(a, fuel)
    if ua is not None:
        return _conv(ua, b, env, fuel)
    ub = _fix_unfold_head(b, fuel)
    if ub is not None:
        return _conv(a, ub, env, fuel)
    return False


def _conv_spine(a: Term, b: Term, env, fuel: Fuel) -> bool:
    ha, aa = spine(a)
    hb, ab = spine(b)
    if len(aa) != len(ab):
        return False
    if not _conv_head(ha, hb, env, fuel):
        return False
    return all(_conv(x, y, env, fuel) for x, y in zip(aa, ab))


def _conv_binder(abin: str, abody: Term, bbin: str, bbody: Term, env, fuel: Fuel) -> bool:
    z = fresh_name(abin, free_vars(abody) | free_vars(bbody))
    return _conv(subst(abody, Var(z), abin), subst(bbody, Var(z), bbin), env, fuel)


def _conv_head(a: Term, b: Term, env, fuel: Fuel) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        return a.name == b.name
    if isinstance(a, SortT):
        return a.sort == b.sort
    if isinstance(a, (IndRef, ConstrRef, Const)):
        # defined constants were unfolded by whnf; what remains is opaque
        return a.name == b.name
    if isinstance(a, Prod):
        return (_conv(a.domain, b.domain, env, fuel)
                and _conv_binder(a.binder, a.codomain, b.binder, b.codomain, env, fuel))
    if isinstance(a, Lam):
        return (_conv(a.domain, b.domain, env, fuel)
                and _conv_binder(a.binder, a.body, b.binder, b.body, env, fuel))
    if isinstance(a, Case):
        return (a.ind == b.ind
                and len(a.params) == len(b.params)
                and len(a.branches) == len(b.branches)
                and _conv(a.scrutinee, b.scrutinee, env, fuel)
                and all(_conv(p, q, env, fuel) for p, q in zip(a.params, b.params))
                and _conv(a.motive, b.motive, env, fuel)
                and all(_conv(f, g, env, fuel) for f, g in zip(a.branches, b.branches)))
    if isinstance(a, Fix):
        return (a.struct == b.struct
                and _conv(a.annot, b.annot, env, fuel)
                and _conv_binder(a.binder, a.body, b.binder, b.body, env, fuel))
    return False
