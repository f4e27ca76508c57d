"""Elaboration and the vernacular command processor.

The parser leaves every identifier as a Var and every match as a
SurfaceMatch; elaboration resolves names against the scope and the
environment, infers scrutinee types to build kernel case nodes, and
supplies default non-dependent motives.  Commands are processed strictly
in file order; every rejection becomes a diagnostic with the command's
source position.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    BranchMismatch, CicrError, IllTyped, MotiveMismatch, ParseError,
    TypeMismatch, UnboundVariable, UniverseError,
)
from .param import check_abstraction
from .printer import show
from .reduce import DEFAULT_FUEL, normalize, whnf
from .syntax import (
    AxiomCmd, CheckCmd, Command, DefinitionCmd, EmbedCmd, EvalCmd,
    FixpointCmd, ImportCmd, InductiveCmd, ParametricityCmd, RealizeCmd,
    SurfaceMatch, parse_commands, parse_term_string,
)
from .terms import (
    TYPE, App, Case, Const, ConstrRef, Context, Fix, IndRef, Lam, Prod,
    SortT, Term, Var, app, free_vars, fresh_name, lams, prods, spine,
    subst_many,
)
from .typecheck import (
    GlobalEnv, check, declare_inductive, infer, register_axiom,
    register_definition, register_witness,
)
from .embed import check_embedding, embed, embedding_failures


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    file: str
    line: int
    col: int
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: {self.code}: {self.message}"


# -- elaboration ---------------------------------------------------------------

def elaborate(raw: Term, env: GlobalEnv, ctx: Context = Context(),
              scope: Optional[dict[str, str]] = None,
              extra_globals: Optional[dict[str, Term]] = None) -> Term:
    """Resolve identifiers and surface matches into a kernel term."""
    el = _Elaborator(env, extra_globals or {})
    return el.run(raw, scope or {}, ctx)


class _Elaborator:
    def __init__(self, env: GlobalEnv, extra_globals: dict[str, Term]):
        self.env = env
        self.extra = extra_globals

    def run(self, t: Term, scope: dict[str, str], ctx: Context) -> Term:
        if isinstance(t, Var):
            if t.name in scope:
                return Var(scope[t.name])
            if t.name in self.extra:
                return self.extra[t.name]
            node = self.env.resolve(t.name)
            if node is None:
                raise UnboundVariable(f"unknown identifier {t.name}")
            return node
        if isinstance(t, SortT):
            if (t.sort.kind == TYPE and t.sort.level is not None
                    and t.sort.level < 1 and not self.env.cic_mode):
                raise UniverseError("Type@0 is not a sort of the refined "
                                    "calculus")
            return t
        if isinstance(t, App):
            return App(self.run(t.fn, scope, ctx), self.run(t.arg, scope, ctx))
        if isinstance(t, (Prod, Lam)):
            dom = self.run(t.domain, scope, ctx)
            kb, scope2, ctx2 = self._push(t.binder, dom, scope, ctx)
            body = t.codomain if isinstance(t, Prod) else t.body
            body = self.run(body, scope2, ctx2)
            return Prod(kb, dom, body) if isinstance(t, Prod) \
                else Lam(kb, dom, body)
        if isinstance(t, Fix):
            annot = self.run(t.annot, scope, ctx)
            kb, scope2, ctx2 = self._push(t.binder, annot, scope, ctx)
            body = self.run(t.body, scope2, ctx2)
            return Fix(kb, annot, body, t.struct)
        if isinstance(t, Case):
            return Case(
                t.ind,
                self.run(t.scrutinee, scope, ctx),
                tuple(self.run(q, scope, ctx) for q in t.params),
                self.run(t.motive, scope, ctx),
                tuple(self.run(f, scope, ctx) for f in t.branches),
            )
        if isinstance(t, SurfaceMatch):
            return self._match(t, scope, ctx)
        if isinstance(t, (IndRef, ConstrRef, Const)):
            return t
        raise TypeError(f"unknown term node {type(t).__name__}")

    def _push(self, binder: str, ty: Term, scope: dict[str, str],
              ctx: Context) -> tuple[str, dict[str, str], Context]:
        kb = binder
        if kb == "_" or kb in ctx.names():
            kb = fresh_name(binder if binder != "_" else "x",
                            ctx.names() | {"_"})
        scope2 = dict(scope)
        if binder != "_":
            scope2[binder] = kb
        return kb, scope2, ctx.extend(kb, ty)

    def _ctor_arg_types(self, decl, j: int, params: tuple[Term, ...],
                        ctx: Context) -> tuple[list[Term], list[str], Term]:
        """Instantiated argument types, original binder names and the
        conclusion of constructor j with parameters substituted."""
        from .typecheck import _peel_telescope
        from .reduce import Fuel
        fuel = Fuel(self.env.fuel_limit)
        cname, cty = decl.constructors[j]
        telescope, concl = _peel_telescope(cty, self.env, fuel,
                                           set(ctx.names()))
        p = decl.param_count
        sub = {x: q for (x, _), q in zip(telescope[:p], params)}
        types, names = [], []
        for zname, zty in telescope[p:]:
            types.append(subst_many(zty, sub))
            names.append(zname)
            sub[zname] = Var(zname)
        return types, names, subst_many(concl, sub)

    def _match(self, t: SurfaceMatch, scope: dict[str, str],
               ctx: Context) -> Term:
        scrut = self.run(t.scrutinee, scope, ctx)
        sty = whnf(infer(ctx, scrut, self.env), self.env)
        head, margs = spine(sty)
        if not isinstance(head, IndRef):
            raise TypeMismatch(
                f"match scrutinee has non-inductive type {show(sty, self.env)}")
        decl = self.env.inductive(head.name)
        p = decl.param_count
        n = len(decl.index_telescope)
        params = tuple(margs[:p])
        if t.in_ind is not None and t.in_ind != decl.name:
            raise TypeMismatch(
                f"match annotation names {t.in_ind}, scrutinee has type "
                f"{decl.name}")
        if t.in_ind is not None:
            if len(t.in_pats) != p + n:
                raise MotiveMismatch(
                    f"'in {decl.name}' expects {p + n} argument patterns")
            if any(pat != "_" for pat in t.in_pats[:p]):
                raise MotiveMismatch(
                    "parameter positions in an 'in' clause must be _")

        if len(t.branches) != len(decl.constructors):
            raise BranchMismatch(
                f"match over {decl.name} needs {len(decl.constructors)} "
                f"branches, found {len(t.branches)}")
        for j, (cname, _, _) in enumerate(t.branches):
            if cname != decl.constructors[j][0]:
                raise BranchMismatch(
                    f"branch {j + 1} must be for {decl.constructors[j][0]}, "
                    f"found {cname}")

        motive = self._motive(t, decl, params, scope, ctx)

        branches = []
        for j, (cname, pats, rhs) in enumerate(t.branches):
            types, _, _ = self._ctor_arg_types(decl, j, params, ctx)
            if len(pats) != len(types):
                raise BranchMismatch(
                    f"constructor {cname} takes {len(types)} arguments, "
                    f"pattern binds {len(pats)}")
            bscope, bctx = dict(scope), ctx
            binders = []
            sub: dict[str, Term] = {}
            for pat, ty in zip(pats, types):
                ty = subst_many(ty, sub)
                kb, bscope, bctx = self._push(pat, ty, bscope, bctx)
                binders.append((kb, ty))
                sub[pat] = Var(kb)
            # argument types may mention earlier arguments by their
            # declared names; rebind them to the kernel names
            branches.append(lams(binders, self.run(rhs, bscope, bctx)))
        return Case(decl.name, scrut, params, motive, tuple(branches))

    def _motive(self, t: SurfaceMatch, decl, params: tuple[Term, ...],
                scope: dict[str, str], ctx: Context) -> Term:
        sub = {x: q for (x, _), q in zip(decl.param_telescope, params)}
        if t.return_ty is None:
            if t.as_name is not None or t.in_ind is not None:
                raise MotiveMismatch(
                    "a match with 'as'/'in' needs a return annotation")
            if not t.branches:
                raise MotiveMismatch(
                    "a match with no branches needs a return annotation")
            cname, pats, rhs = t.branches[0]
            types, _, _ = self._ctor_arg_types(decl, 0, params, ctx)
            if len(pats) != len(types):
                raise BranchMismatch(
                    f"constructor {cname} takes {len(types)} arguments, "
                    f"pattern binds {len(pats)}")
            bscope, bctx = dict(scope), ctx
            bound = []
            bsub: dict[str, Term] = {}
            for pat, ty in zip(pats, types):
                ty = subst_many(ty, bsub)
                kb, bscope, bctx = self._push(pat, ty, bscope, bctx)
                bound.append(kb)
                bsub[pat] = Var(kb)
            rty = infer(bctx, self.run(rhs, bscope, bctx), self.env)
            if free_vars(rty) & set(bound):
                raise MotiveMismatch(
                    "cannot infer a non-dependent motive here; add a "
                    "return annotation")
            binders = []
            avoid = set(ctx.names()) | free_vars(rty)
            for yname, bty in decl.index_telescope:
                y = fresh_name(yname, avoid)
                avoid.add(y)
                binders.append((y, subst_many(bty, sub)))
                sub[yname] = Var(y)
            x = fresh_name("x", avoid)
            scrut_ty = app(IndRef(decl.name), *params,
                           *(Var(y) for y, _ in binders))
            return lams(binders + [(x, scrut_ty)], rty)

        mscope, mctx = dict(scope), ctx
        binders = []
        idx_pats = list(t.in_pats[decl.param_count:]) if t.in_ind else []
        for i, (yname, bty) in enumerate(decl.index_telescope):
            pat = idx_pats[i] if i < len(idx_pats) else "_"
            ty = subst_many(bty, sub)
            kb, mscope, mctx = self._push(pat, ty, mscope, mctx)
            binders.append((kb, ty))
            sub[yname] = Var(kb)
        as_pat = t.as_name if t.as_name is not None else "_"
        scrut_ty = app(IndRef(decl.name), *params,
                       *(Var(y) for y, _ in binders))
        kb, mscope, mctx = self._push(as_pat, scrut_ty, mscope, mctx)
        body = self.run(t.return_ty, mscope, mctx)
        return lams(binders + [(kb, scrut_ty)], body)


# -- file running ----------------------------------------------------------------

@dataclass
class RunResult:
    status: int
    report: list[str] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    env: Optional[GlobalEnv] = None


def load_commands(path: str, _seen: Optional[frozenset] = None) -> list[Command]:
    """Parse a file, splicing Import directives textually (no separate
    compilation)."""
    real = os.path.realpath(path)
    seen = _seen or frozenset()
    if real in seen:
        raise ParseError(f"import cycle through {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}")
    out: list[Command] = []
    for cmd in parse_commands(text, path):
        if isinstance(cmd, ImportCmd):
            target = os.path.join(os.path.dirname(path) or ".", cmd.path)
            out.extend(load_commands(target, seen | {real}))
        else:
            out.append(cmd)
    return out


def run_file(path: str, fuel: int = DEFAULT_FUEL,
             continue_on_error: bool = False,
             prop_cumul: bool = False,
             env: Optional[GlobalEnv] = None) -> RunResult:
    """Process a .cicr file in order; exit status 0 iff every command
    passed."""
    try:
        commands = load_commands(path)
    except ParseError as e:
        diag = Diagnostic("error", path, e.line, e.col, e.code, e.message)
        return RunResult(status=1, diagnostics=[diag])
    env = env if env is not None else GlobalEnv(fuel_limit=fuel)
    return run_commands(commands, env, continue_on_error=continue_on_error,
                        prop_cumul=prop_cumul)


def run_commands(commands: list[Command], env: GlobalEnv,
                 continue_on_error: bool = False,
                 prop_cumul: bool = False) -> RunResult:
    result = RunResult(status=0, env=env)
    for cmd in commands:
        try:
            result.report.append(_process(cmd, env, prop_cumul))
        except CicrError as e:
            result.status = 1
            result.diagnostics.append(Diagnostic(
                "error", cmd.file, cmd.line, cmd.col, e.code, str(e)))
            result.report.append(f"FAIL {_describe(cmd)}: {e.code}")
            if not continue_on_error:
                break
    return result


def _describe(cmd: Command) -> str:
    label = type(cmd).__name__.removesuffix("Cmd")
    name = getattr(cmd, "name", None)
    return f"{label} {name}" if name else label


def _process(cmd: Command, env: GlobalEnv, prop_cumul: bool) -> str:
    if isinstance(cmd, InductiveCmd):
        extra = {cmd.name: IndRef(cmd.name)}
        arity = elaborate(cmd.arity, env, extra_globals=extra)
        ctors = [(c, elaborate(cty, env, extra_globals=extra))
                 for c, cty in cmd.constructors]
        declare_inductive(env, cmd.name, len(cmd.binders), arity, ctors)
        return f"PASS Inductive {cmd.name}"
    if isinstance(cmd, DefinitionCmd):
        body = elaborate(cmd.body, env)
        ty = elaborate(cmd.type, env) if cmd.type is not None \
            else infer(Context(), body, env)
        register_definition(env, cmd.name, ty, body)
        return f"PASS Definition {cmd.name}"
    if isinstance(cmd, FixpointCmd):
        struct: Optional[int] = None
        if cmd.struct is not None:
            if cmd.struct.isdigit():
                struct = int(cmd.struct)
            else:
                names = [n for n, _ in cmd.binders]
                if cmd.struct not in names:
                    raise IllTyped(
                        f"struct argument {cmd.struct!r} is not an argument "
                        f"of {cmd.name}")
                struct = names.index(cmd.struct)
        raw = Fix(cmd.name, prods(cmd.binders, cmd.type),
                  lams(cmd.binders, cmd.body), struct)
        fix = elaborate(raw, env)
        register_definition(env, cmd.name, fix.annot, fix)
        return f"PASS Fixpoint {cmd.name}"
    if isinstance(cmd, AxiomCmd):
        register_axiom(env, cmd.name, elaborate(cmd.type, env))
        return f"PASS Axiom {cmd.name}"
    if isinstance(cmd, RealizeCmd):
        # translating the axiom statement first brings the translated
        # globals the witness mentions into scope
        from .param import witness_type
        witness_type(env, cmd.name)
        register_witness(env, cmd.name, elaborate(cmd.witness, env))
        return f"PASS Realize {cmd.name}"
    if isinstance(cmd, ParametricityCmd):
        res = check_abstraction(cmd.name, env)
        if not res.verified:
            raise IllTyped(
                f"abstraction instance for {cmd.name} does not re-typecheck")
        reg = (env.translated_consts.get(cmd.name)
               or env.translated_inds.get(cmd.name)
               or env.translated_constrs.get(cmd.name))
        suffix = f" ({reg} registered)" if reg else " (witness applied)"
        return f"PASS Parametricity {cmd.name}{suffix}"
    if isinstance(cmd, CheckCmd):
        term = elaborate(cmd.term, env)
        if cmd.type is not None:
            ty = elaborate(cmd.type, env)
            if not check(Context(), term, ty, env):
                raise TypeMismatch(
                    f"term does not have type {show(ty, env)}")
            return f"PASS Check {show(term, env)} : {show(ty, env)}"
        ty = infer(Context(), term, env)
        return f"PASS Check {show(term, env)} : {show(ty, env)}"
    if isinstance(cmd, EvalCmd):
        term = elaborate(cmd.term, env)
        infer(Context(), term, env)
        nf = normalize(term, env)
        return f"PASS Eval {show(term, env)} = {show(nf, env)}"
    if isinstance(cmd, EmbedCmd):
        if not check_embedding(cmd.name, env, prop_cumul=prop_cumul):
            failures = dict(embedding_failures(env, prop_cumul=prop_cumul))
            raise IllTyped(
                f"embedding of {cmd.name} fails: {failures.get(cmd.name)}")
        return f"PASS Embed {cmd.name} ({_embedded_summary(cmd.name, env)})"
    raise IllTyped(f"unsupported command {type(cmd).__name__}")


def _embedded_summary(name: str, env: GlobalEnv) -> str:
    if name in env.definitions:
        ty, _ = env.definitions[name]
        return f"|{name}| : {show(embed(ty), env)}"
    if name in env.inductives:
        return f"|{name}| : {show(embed(env.inductive(name).arity), env)}"
    if name in env.axioms:
        return f"|{name}| : {show(embed(env.axioms[name]), env)}"
    return name


def eval_in_env(text: str, env: GlobalEnv) -> Term:
    """Parse, elaborate and normalize a term against an environment."""
    term = elaborate(parse_term_string(text), env)
    infer(Context(), term, env)
    return normalize(term, env)
