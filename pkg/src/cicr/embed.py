"""The forgetful embedding into CIC and its per-instance checks.

Every Set@i sort collapses to Type@i (the target hierarchy starts at 0);
everything else is mapped homomorphically.  CIC mode is the same kernel
with a different sort table, not a second implementation: Prop stays
impredicative, Type@i is predicative cumulative, and Set is rejected.

Prop <: Type cumulativity is off by default; the corpus does not need it.
"""

from __future__ import annotations

from typing import Optional

from .errors import CicrError, UnboundVariable
from .reduce import DEFAULT_FUEL
from .terms import (
    SET, TYPE, App, Case, Const, ConstrRef, Context, Fix, IndRef, Lam, Prod,
    Sort, SortT, Term,
)
from .typecheck import (
    GlobalEnv, check, declare_inductive, infer, register_axiom,
    register_definition,
)


def make_cic_env(prop_cumul: bool = False,
                 fuel_limit: int = DEFAULT_FUEL) -> GlobalEnv:
    """A fresh environment running the plain-CIC sort table."""
    return GlobalEnv(cic_mode=True, prop_cumul=prop_cumul,
                     fuel_limit=fuel_limit)


def embed(t: Term) -> Term:
    """Homomorphic map replacing every Set@i by Type@i."""
    if isinstance(t, SortT):
        if t.sort.kind == SET:
            return SortT(Sort(TYPE, t.sort.level))
        return t
    if isinstance(t, (Prod, Lam)):
        body = t.codomain if isinstance(t, Prod) else t.body
        dom, body = embed(t.domain), embed(body)
        return Prod(t.binder, dom, body) if isinstance(t, Prod) \
            else Lam(t.binder, dom, body)
    if isinstance(t, App):
        return App(embed(t.fn), embed(t.arg))
    if isinstance(t, Case):
        return Case(
            t.ind,
            embed(t.scrutinee),
            tuple(embed(q) for q in t.params),
            embed(t.motive),
            tuple(embed(f) for f in t.branches),
        )
    if isinstance(t, Fix):
        return Fix(t.binder, embed(t.annot), embed(t.body), t.struct)
    return t


def embed_context(ctx: Context) -> Context:
    return Context(tuple((n, embed(ty)) for n, ty in ctx))


def embed_env(env: GlobalEnv,
              prop_cumul: bool = False) -> tuple[GlobalEnv, dict]:
    """Replay every declaration of env through a CIC-mode kernel.

    Returns the embedded environment and a report mapping each declared
    name to (ok, message).  A failing entry is a bug indicator per the
    embedding lemma.
    """
    cic = make_cic_env(prop_cumul=prop_cumul, fuel_limit=env.fuel_limit)
    report: dict[str, tuple[bool, str]] = {}
    for kind, name in env.history:
        try:
            if kind == "inductive":
                decl = env.inductive(name)
                ctors = [(c, embed(cty)) for c, cty in decl.constructors]
                declare_inductive(cic, name, decl.param_count,
                                  embed(decl.arity), ctors)
            elif kind == "definition":
                ty, body = env.definitions[name]
                register_definition(cic, name, embed(ty), embed(body))
            elif kind == "axiom":
                register_axiom(cic, name, embed(env.axioms[name]))
            elif kind == "witness":
                witness = env.param_witnesses[name]
                wty = infer(Context(), witness, env)
                if not check(Context(), embed(witness), embed(wty), cic):
                    raise CicrError(
                        f"embedded witness for {name} does not re-typecheck")
            report[name] = (True, "ok")
        except CicrError as e:
            report[name] = (False, f"{e.code}: {e}")
    return cic, report


def _embed_report(env: GlobalEnv, prop_cumul: bool) -> dict:
    cache = getattr(env, "_embed_cache", None)
    key = (len(env.history), prop_cumul)
    if cache is not None and cache[0] == key:
        return cache[1]
    _, report = embed_env(env, prop_cumul=prop_cumul)
    env._embed_cache = (key, report)
    return report


def check_embedding(name: str, env: GlobalEnv,
                    prop_cumul: bool = False) -> bool:
    """Per-instance embedding check: the named declaration, embedded, is
    accepted by the CIC-mode kernel (replaying everything before it)."""
    report = _embed_report(env, prop_cumul)
    if name not in report:
        raise UnboundVariable(f"unknown declaration {name}")
    return report[name][0]


def embedding_failures(env: GlobalEnv,
                       prop_cumul: bool = False) -> list[tuple[str, str]]:
    """(name, message) for every declaration whose embedding fails."""
    report = _embed_report(env, prop_cumul)
    return [(n, msg) for n, (ok, msg) in report.items() if not ok]
