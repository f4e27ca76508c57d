"""Term language: sorts, terms, binding, substitution and alpha-equivalence.

Binding is by name; substitution is capture-avoiding (binders are renamed on
the fly when a replacement would capture them) and alpha-equivalence is
decided by a parallel descent carrying a binder bijection.  Terms are
immutable values and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

PROP = "Prop"
SET = "Set"
TYPE = "Type"


@dataclass(frozen=True)
class Sort:
    """Prop, Set@i (i >= 0) or Type@i.

    Type starts at 1 in the refined calculus; Type@0 exists structurally only
    because the forgetful embedding targets a hierarchy starting at 0.  The
    kernel rejects Type@0 outside of embedding mode.
    """

    kind: str
    level: Optional[int] = None

    def __post_init__(self):
        if self.kind == PROP:
            if self.level is not None:
                raise ValueError("Prop carries no level")
        elif self.kind in (SET, TYPE):
            if self.level is None or self.level < 0:
                raise ValueError(f"{self.kind} needs a level >= 0")
        else:
            raise ValueError(f"unknown sort kind {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == PROP:
            return "Prop"
        return f"{self.kind}@{self.level}"


Prop = Sort(PROP)


def SetS(i: int) -> Sort:
    return Sort(SET, i)


def TypeS(i: int) -> Sort:
    return Sort(TYPE, i)


class Term:
    """Base class of all term nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        from .printer import show
        return show(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self}>"


@dataclass(frozen=True, eq=False, repr=False)
class Var(Term):
    name: str


@dataclass(frozen=True, eq=False, repr=False)
class SortT(Term):
    sort: Sort


@dataclass(frozen=True, eq=False, repr=False)
class Prod(Term):
    binder: str
    domain: Term
    codomain: Term


@dataclass(frozen=True, eq=False, repr=False)
class Lam(Term):
    binder: str
    domain: Term
    body: Term


@dataclass(frozen=True, eq=False, repr=False)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True, eq=False, repr=False)
class IndRef(Term):
    name: str


@dataclass(frozen=True, eq=False, repr=False)
class ConstrRef(Term):
    name: str


@dataclass(frozen=True, eq=False, repr=False)
class Const(Term):
    """A global definition or axiom; distinct from context variables because
    the translator treats axioms specially."""

    name: str


@dataclass(frozen=True, eq=False, repr=False)
class Case(Term):
    ind: str
    scrutinee: Term
    params: tuple[Term, ...]
    motive: Term
    branches: tuple[Term, ...]


@dataclass(frozen=True, eq=False, repr=False)
class Fix(Term):
    binder: str
    annot: Term
    body: Term
    # index of the structurally decreasing argument; None means "first
    # argument of inductive type", resolved lazily against an environment
    struct: Optional[int] = None


# -- spine and telescope helpers ------------------------------------------

def app(fn: Term, *args: Term) -> Term:
    for a in args:
        fn = App(fn, a)
    return fn


def spine(t: Term) -> tuple[Term, list[Term]]:
    """Decompose nested applications into (head, arguments)."""
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def prods(binders: Iterable[tuple[str, Term]], body: Term) -> Term:
    for name, ty in reversed(list(binders)):
        body = Prod(name, ty, body)
    return body


def lams(binders: Iterable[tuple[str, Term]], body: Term) -> Term:
    for name, ty in reversed(list(binders)):
        body = Lam(name, ty, body)
    return body


def arrow(a: Term, b: Term) -> Term:
    return Prod("_", a, b)


# -- free variables and name collection ------------------------------------

def free_vars(t: Term) -> frozenset[str]:
    """Exactly the variables with a free occurrence in t."""
    acc: set[str] = set()
    _free_vars(t, frozenset(), acc)
    return frozenset(acc)


def _free_vars(t: Term, bound: frozenset[str], acc: set[str]) -> None:
    if isinstance(t, Var):
        if t.name not in bound:
            acc.add(t.name)
    elif isinstance(t, (SortT, IndRef, ConstrRef, Const)):
        pass
    elif isinstance(t, Prod) or isinstance(t, Lam):
        _free_vars(t.domain, bound, acc)
        inner = bound | {t.binder}
        body = t.codomain if isinstance(t, Prod) else t.body
        _free_vars(body, inner, acc)
    elif isinstance(t, App):
        _free_vars(t.fn, bound, acc)
        _free_vars(t.arg, bound, acc)
    elif isinstance(t, Case):
        _free_vars(t.scrutinee, bound, acc)
        for q in t.params:
            _free_vars(q, bound, acc)
        _free_vars(t.motive, bound, acc)
        for f in t.branches:
            _free_vars(f, bound, acc)
    elif isinstance(t, Fix):
        _free_vars(t.annot, bound, acc)
        _free_vars(t.body, bound | {t.binder}, acc)
    else:
        raise TypeError(f"unknown term node {type(t).__name__}")


def all_names(t: Term) -> set[str]:
    """Every name occurring in t: variables, binders and global references.

    Used to seed name supplies so that generated names are globally fresh.
    """
    acc: set[str] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            acc.add(u.name)
        elif isinstance(u, (IndRef, ConstrRef, Const)):
            acc.add(u.name)
        elif isinstance(u, SortT):
            pass
        elif isinstance(u, (Prod, Lam)):
            acc.add(u.binder)
            stack.append(u.domain)
            stack.append(u.codomain if isinstance(u, Prod) else u.body)
        elif isinstance(u, App):
            stack.append(u.fn)
            stack.append(u.arg)
        elif isinstance(u, Case):
            acc.add(u.ind)
            stack.append(u.scrutinee)
            stack.extend(u.params)
            stack.append(u.motive)
            stack.extend(u.branches)
        elif isinstance(u, Fix):
            acc.add(u.binder)
            stack.append(u.annot)
            stack.append(u.body)
    return acc


def fresh_name(base: str, avoid) -> str:
    """First of base, base1, base2, ... not in avoid."""
    if base not in avoid:
        return base
    k = 1
    while f"{base}{k}" in avoid:
        k += 1
    return f"{base}{k}"


# -- substitution -----------------------------------------------------------

def subst(body: Term, replacement: Term, name: str) -> Term:
    """Capture-avoiding substitution body[replacement/name]."""
    return subst_many(body, {name: replacement})


def subst_many(t: Term, mapping: dict[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution."""
    if not mapping:
        return t
    return _subst(t, mapping)


def _subst(t: Term, m: dict[str, Term]) -> Term:
    if isinstance(t, Var):
        return m.get(t.name, t)
    if isinstance(t, (SortT, IndRef, ConstrRef, Const)):
        return t
    if isinstance(t, App):
        return App(_subst(t.fn, m), _subst(t.arg, m))
    if isinstance(t, (Prod, Lam)):
        body = t.codomain if isinstance(t, Prod) else t.body
        dom = _subst(t.domain, m)
        binder, body, inner = _under_binder(t.binder, body, m)
        if inner is not None:
            body = _subst(body, inner)
        return Prod(binder, dom, body) if isinstance(t, Prod) else Lam(binder, dom, body)
    if isinstance(t, Case):
        return Case(
            t.ind,
            _subst(t.scrutinee, m),
            tuple(_subst(q, m) for q in t.params),
            _subst(t.motive, m),
            tuple(_subst(f, m) for f in t.branches),
        )
    if isinstance(t, Fix):
        annot = _subst(t.annot, m)
        binder, body, inner = _under_binder(t.binder, t.body, m)
        if inner is not None:
            body = _subst(body, inner)
        return Fix(binder, annot, body, t.struct)
    raise TypeError(f"unknown term node {type(t).__name__}")


def _under_binder(binder: str, body: Term, m: dict[str, Term]):
    """Prepare a substitution for descent under a binder.

    Returns (binder, body, mapping-or-None); the binder is renamed when some
    replacement would capture it.
    """
    inner = {k: v for k, v in m.items() if k != binder}
    if not inner:
        return binder, body, None
    body_free = free_vars(body)
    inner = {k: v for k, v in inner.items() if k in body_free}
    if not inner:
        return binder, body, None
    if any(binder in free_vars(v) for v in inner.values()):
        avoid = set(body_free)
        for v in inner.values():
            avoid |= free_vars(v)
        fresh = fresh_name(binder, avoid)
        body = _subst(body, {binder: Var(fresh)})
        binder = fresh
    return binder, body, inner


def rename(t: Term, old: str, new: str) -> Term:
    return subst(t, Var(new), old)


# -- alpha-equivalence ------------------------------------------------------

def alpha_eq(a: Term, b: Term) -> bool:
    """True iff a and b differ only in the names of bound variables."""
    return _alpha(a, b, {}, {})


def _alpha(a: Term, b: Term, l2r: dict[str, str], r2l: dict[str, str]) -> bool:
    if isinstance(a, Var) and isinstance(b, Var):
        if a.name in l2r or b.name in r2l:
            return l2r.get(a.name) == b.name and r2l.get(b.name) == a.name
        return a.name == b.name
    if isinstance(a, SortT) and isinstance(b, SortT):
        return a.sort == b.sort
    if type(a) is not type(b):
        return False
    if isinstance(a, (IndRef, ConstrRef, Const)):
        return a.name == b.name
    if isinstance(a, App):
        return _alpha(a.fn, b.fn, l2r, r2l) and _alpha(a.arg, b.arg, l2r, r2l)
    if isinstance(a, (Prod, Lam)):
        if not _alpha(a.domain, b.domain, l2r, r2l):
            return False
        abody = a.codomain if isinstance(a, Prod) else a.body
        bbody = b.codomain if isinstance(b, Prod) else b.body
        return _alpha_under(abody, bbody, a.binder, b.binder, l2r, r2l)
    if isinstance(a, Case):
        return (
            a.ind == b.ind
            and len(a.params) == len(b.params)
            and len(a.branches) == len(b.branches)
            and _alpha(a.scrutinee, b.scrutinee, l2r, r2l)
            and all(_alpha(p, q, l2r, r2l) for p, q in zip(a.params, b.params))
            and _alpha(a.motive, b.motive, l2r, r2l)
            and all(_alpha(f, g, l2r, r2l) for f, g in zip(a.branches, b.branches))
        )
    if isinstance(a, Fix):
        if not _alpha(a.annot, b.annot, l2r, r2l):
            return False
        if a.struct != b.struct:
            return False
        return _alpha_under(a.body, b.body, a.binder, b.binder, l2r, r2l)
    return False


def _alpha_under(a, b, abind, bbind, l2r, r2l):
    l2r2 = dict(l2r)
    r2l2 = dict(r2l)
    # shadowing: stale entries mapping onto the new binders must die too
    for k, v in list(l2r2.items()):
        if v == bbind:
            del l2r2[k]
    for k, v in list(r2l2.items()):
        if v == abind:
            del r2l2[k]
    l2r2[abind] = bbind
    r2l2[bbind] = abind
    return _alpha(a, b, l2r2, r2l2)


# -- contexts ---------------------------------------------------------------

@dataclass(frozen=True)
class Context:
    """An ordered typing context; names are pairwise distinct."""

    entries: tuple[tuple[str, Term], ...] = ()

    def lookup(self, name: str) -> Optional[Term]:
        for n, ty in reversed(self.entries):
            if n == name:
                return ty
        return None

    def extend(self, name: str, ty: Term) -> "Context":
        if self.lookup(name) is not None:
            raise ValueError(f"context already binds {name}")
        return Context(self.entries + ((name, ty),))

    def names(self) -> set[str]:
        return {n for n, _ in self.entries}

    def __iter__(self) -> Iterator[tuple[str, Term]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


class NameSupply:
    """Deterministic fresh-name generator.

    For a source name x it yields the primed name x' and the relation name
    x_R, escaping collisions with everything registered in the supply by
    appending a counter.
    """

    def __init__(self, avoid: Iterable[str] = ()):
        self._used: set[str] = set(avoid)

    def reserve(self, name: str) -> str:
        self._used.add(name)
        return name

    def fresh(self, hint: str = "x") -> str:
        name = fresh_name(hint, self._used)
        self._used.add(name)
        return name

    def primed(self, name: str) -> str:
        return self.fresh(name + "'")

    def rel(self, name: str) -> str:
        return self.fresh(name + "_R")

    def knows(self, name: str) -> bool:
        return name in self._used
