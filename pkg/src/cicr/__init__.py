"""A kernel for a refined calculus of constructions (sorts Prop, Set@i,
Type@i) with a parametricity translator that verifies the abstraction
theorem per instance by re-typechecking every translated term."""

from .errors import CicrError
from .terms import (
    Context, NameSupply, Sort, Term, Var, SortT, Prod, Lam, App, IndRef,
    ConstrRef, Const, Case, Fix, alpha_eq, free_vars, subst,
)
from .reduce import Fuel, beta_step, conv, iota_step, normalize, whnf
from .typecheck import (
    GlobalEnv, InductiveDecl, check, declare_inductive, infer,
    register_axiom, register_definition, register_witness, subtype,
)
from .param import (
    TranslationResult, check_abstraction, hat, prime, theta,
    translate_case, translate_context, translate_inductive,
    translate_large_elim, translate_term,
)
from .embed import check_embedding, embed, embed_env, make_cic_env
from .printer import show
from .driver import run_file

__all__ = [
    "CicrError", "Context", "NameSupply", "Sort", "Term", "Var", "SortT",
    "Prod", "Lam", "App", "IndRef", "ConstrRef", "Const", "Case", "Fix",
    "alpha_eq", "free_vars", "subst", "Fuel", "beta_step", "conv",
    "iota_step", "normalize", "whnf", "GlobalEnv", "InductiveDecl", "check",
    "declare_inductive", "infer", "register_axiom", "register_definition",
    "register_witness", "subtype", "TranslationResult", "check_abstraction",
    "hat", "prime", "theta", "translate_case", "translate_context",
    "translate_inductive", "translate_large_elim", "translate_term",
    "check_embedding", "embed", "embed_env", "make_cic_env", "show",
    "run_file",
]
