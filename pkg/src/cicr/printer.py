"""Surface-syntax printer.

Levels: 0 admits binder forms (forall/fun/fix) and arrows, 1 admits
arrows, 2 application, 3 only atoms.  match ... end is self-delimiting
and counts as an atom.  Passing the environment lets case branches be
split at the declared argument counts; without it every leading lambda
of a branch is treated as a pattern binder, which is correct for all
well-typed motives but can over-peel branches whose right-hand side is
itself a function.
"""

from __future__ import annotations

from typing import Optional

from .terms import (
    App, Case, Const, ConstrRef, Fix, IndRef, Lam, Prod, SortT, Term, Var,
    free_vars, spine,
)


def show(t: Term, env=None) -> str:
    """Render a term; parse(show(t)) is alpha-equal to t."""
    return _show(t, 0, env)


def _paren(s: str) -> str:
    return f"({s})"


def _show(t: Term, lvl: int, env) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, (IndRef, ConstrRef, Const)):
        return t.name
    if isinstance(t, SortT):
        return str(t.sort)
    if isinstance(t, Case):
        return _show_case(t, env)
    if isinstance(t, App):
        fn, args = spine(t)
        s = " ".join([_show(fn, 2, env)] + [_show(a, 3, env) for a in args])
        return s if lvl <= 2 else _paren(s)
    if isinstance(t, Prod):
        if t.binder not in free_vars(t.codomain):
            s = f"{_show(t.domain, 2, env)} -> {_show(t.codomain, 0, env)}"
            return s if lvl <= 1 else _paren(s)
        groups = []
        body: Term = t
        while isinstance(body, Prod) and body.binder in free_vars(body.codomain):
            groups.append(f"({body.binder} : {_show(body.domain, 0, env)})")
            body = body.codomain
        s = f"forall {' '.join(groups)}, {_show(body, 0, env)}"
        return s if lvl == 0 else _paren(s)
    if isinstance(t, Lam):
        groups = []
        body = t
        while isinstance(body, Lam):
            groups.append(f"({body.binder} : {_show(body.domain, 0, env)})")
            body = body.body
        s = f"fun {' '.join(groups)} => {_show(body, 0, env)}"
        return s if lvl == 0 else _paren(s)
    if isinstance(t, Fix):
        struct = f" {{struct {t.struct}}}" if t.struct is not None else ""
        s = (f"fix {t.binder}{struct} : {_show(t.annot, 0, env)} := "
             f"{_show(t.body, 0, env)}")
        return s if lvl == 0 else _paren(s)
    raise TypeError(f"cannot print {type(t).__name__}")


def _peel_lams(t: Term, limit: Optional[int]) -> tuple[list[str], Term]:
    binders: list[str] = []
    while isinstance(t, Lam) and (limit is None or len(binders) < limit):
        binders.append(t.binder)
        t = t.body
    return binders, t


def _show_case(t: Case, env) -> str:
    decl = None
    if env is not None:
        decl = env.inductives.get(t.ind)
    n_indices = len(decl.index_telescope) if decl is not None else None
    limit = n_indices + 1 if n_indices is not None else None
    mbinders, mbody = _peel_lams(t.motive, limit)
    if not mbinders:
        # motive is not a syntactic lambda; fall back to an opaque scrutinee
        mbinders, mbody = ["_"], App(t.motive, Var("_"))
    as_name = mbinders[-1]
    idx_names = mbinders[:-1]
    in_clause = " ".join([t.ind] + ["_"] * len(t.params) + idx_names)
    parts = [f"match {_show(t.scrutinee, 0, env)} as {as_name}",
             f"in {in_clause}", f"return {_show(mbody, 0, env)}", "with"]
    for j, branch in enumerate(t.branches):
        cname = None
        n_j = None
        if decl is not None and j < len(decl.constructors):
            cname = decl.constructors[j][0]
            n_j = decl.arg_counts[j] if j < len(decl.arg_counts) else None
        bs, rhs = _peel_lams(branch, n_j)
        if cname is None:
            cname = f"<constructor {j}>"
        head = " ".join([cname] + bs)
        parts.append(f"| {head} => {_show(rhs, 0, env)}")
    parts.append("end")
    return " ".join(parts)
