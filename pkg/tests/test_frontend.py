import os

import pytest

from cicr.cli import main
from cicr.driver import elaborate, eval_in_env, load_commands, run_file
from cicr.errors import ParseError
from cicr.printer import show
from cicr.syntax import (
    DefinitionCmd, InductiveCmd, ParametricityCmd, parse_commands,
    parse_term_string, tokenize,
)
from cicr.terms import (
    Case, Context, Fix, Lam, Prod, Prop, SetS, SortT, Var, alpha_eq,
)
from tests.conftest import CORPUS, corpus, load


def roundtrip(env, t, ctx=Context()):
    scope = {n: n for n, _ in ctx}
    back = elaborate(parse_term_string(show(t, env)), env, ctx, scope)
    return alpha_eq(back, t)


class TestLexer:
    def test_basic_tokens(self):
        kinds = [t.kind for t in tokenize("fun (x : A) => x")]
        assert kinds == ["fun", "(", "ident", ":", "ident", ")", "=>",
                         "ident", "eof"]

    def test_primed_identifiers(self):
        toks = tokenize("x' x_R x'1")
        assert [t.value for t in toks[:-1]] == ["x'", "x_R", "x'1"]

    def test_nested_comments(self):
        toks = tokenize("a (* outer (* inner *) still *) b")
        assert [t.value for t in toks[:-1]] == ["a", "b"]

    def test_unterminated_comment(self):
        with pytest.raises(ParseError):
            tokenize("a (* oops")

    def test_spans(self):
        toks = tokenize("ab\n  cd")
        assert (toks[0].line, toks[0].col) == (1, 1)
        assert (toks[1].line, toks[1].col) == (2, 3)


class TestTermParsing:
    def test_set_defaults_to_zero(self):
        t = parse_term_string("Set")
        assert isinstance(t, SortT) and t.sort == SetS(0)

    def test_bare_type_is_parse_error(self):
        with pytest.raises(ParseError):
            parse_term_string("Type")

    def test_arrow_right_associative(self):
        t = parse_term_string("A -> B -> C")
        assert isinstance(t, Prod) and isinstance(t.codomain, Prod)

    def test_application_left_associative(self):
        t = parse_term_string("f a b")
        from cicr.terms import App
        assert isinstance(t, App) and isinstance(t.fn, App)

    def test_binder_groups(self):
        a = parse_term_string("forall (x : A) (y : B), C")
        b = parse_term_string("forall x y : A, B")
        assert isinstance(a, Prod) and isinstance(a.codomain, Prod)
        assert isinstance(b, Prod) and b.binder == "x"

    def test_fix_struct_by_name_and_index(self):
        a = parse_term_string("fix f (x : A) (y : B) {struct y} : C := x")
        assert isinstance(a, Fix) and a.struct == 1
        b = parse_term_string("fix f {struct 1} : A -> B := g")
        assert isinstance(b, Fix) and b.struct == 1

    def test_underscore_not_a_term(self):
        with pytest.raises(ParseError):
            parse_term_string("f _")


class TestCommandParsing:
    def test_definition(self):
        cmds = parse_commands("Definition id := fun X : Prop => "
                              "fun x : X => x.")
        assert isinstance(cmds[0], DefinitionCmd)
        assert cmds[0].name == "id"
        assert cmds[0].type is None

    def test_inductive_example(self):
        cmds = parse_commands(
            "Inductive nat : Set@0 := O : nat | S : nat -> nat.")
        cmd = cmds[0]
        assert isinstance(cmd, InductiveCmd)
        assert [c for c, _ in cmd.constructors] == ["O", "S"]
        assert cmd.binders == ()

    def test_inductive_head_binders_prefix_constructors(self):
        cmds = parse_commands(
            "Inductive list (A : Set@0) : Set@0 := "
            "nil : list A | cons : A -> list A -> list A.")
        cmd = cmds[0]
        assert len(cmd.binders) == 1
        nil_ty = dict(cmd.constructors)["nil"]
        assert isinstance(nil_ty, Prod) and nil_ty.binder == "A"

    def test_parametricity_command(self):
        cmds = parse_commands("Parametricity church.")
        assert isinstance(cmds[0], ParametricityCmd)
        assert cmds[0].name == "church"

    def test_commands_carry_spans(self):
        cmds = parse_commands("\n\nAxiom oops : Prop.", filename="f.cicr")
        assert cmds[0].line == 3
        assert cmds[0].file == "f.cicr"


class TestRoundTrip:
    def test_simple_terms(self, prelude_env):
        env = prelude_env
        for src in [
            "fun (x : Prop) (x' : Prop) => x -> x' -> Prop",
            "forall (X : Prop), X -> X",
            "fun (n : nat) => S (S n)",
            "nat -> nat -> Prop",
            "fix f {struct 0} : nat -> nat := fun (n : nat) => n",
        ]:
            t = elaborate(parse_term_string(src), env)
            assert roundtrip(env, t), src

    def test_match_roundtrip(self, prelude_env):
        env = prelude_env
        ctx = Context().extend("n", parse_term_string("nat"))
        ctx = Context().extend("n", elaborate(parse_term_string("nat"), env))
        t = elaborate(parse_term_string(
            "match n as k in nat return nat with | O => O | S p => p end"),
            env, ctx, {"n": "n"})
        assert roundtrip(env, t, ctx)

    def test_corpus_definitions_roundtrip(self, church_env, tree_env):
        for env in (church_env, tree_env):
            for name, (ty, body) in env.definitions.items():
                assert roundtrip(env, ty), name
                assert roundtrip(env, body), name

    def test_nested_application_minimal_parens(self, prelude_env):
        t = elaborate(parse_term_string("S (S O)"), prelude_env)
        assert show(t, prelude_env) == "S (S O)"
        t2 = elaborate(parse_term_string("iter p a f z"), prelude_env,
                       Context(), {},
                       extra_globals={n: Var(n) for n in
                                      ("iter", "p", "a", "f", "z")})
        assert show(t2, prelude_env) == "iter p a f z"


class TestDriver:
    def test_corpus_all_green(self):
        for name in ["prelude.cicr", "example1.cicr", "church.cicr",
                     "tree.cicr", "large_elim.cicr", "box.cicr",
                     "peirce.cicr", "pi.cicr"]:
            res = load(name)
            assert all(line.startswith("PASS") for line in res.report), name

    def test_church_reports_registration(self):
        res = load("church.cicr")
        assert any("church0_R registered" in line for line in res.report)

    def test_negative_corpus(self):
        expected = {
            "bad_positivity.cicr": "PositivityViolation",
            "unguarded_fix.cicr": "GuardViolation",
            "missing_witness.cicr": "MissingWitness",
            "prop_elim.cicr": "IllegalElimination",
        }
        for name, code in expected.items():
            res = run_file(corpus(os.path.join("neg", name)))
            assert res.status == 1, name
            assert res.diagnostics[0].code == code, name

    def test_diagnostic_format_and_span(self):
        res = run_file(corpus(os.path.join("neg", "bad_positivity.cicr")))
        diag = str(res.diagnostics[0])
        path = corpus(os.path.join("neg", "bad_positivity.cicr"))
        assert diag.startswith(f"{path}:2:1: PositivityViolation:")

    def test_determinism_two_runs(self):
        a = run_file(corpus("church.cicr"))
        b = run_file(corpus("church.cicr"))
        assert a.report == b.report
        assert [str(d) for d in a.diagnostics] == \
            [str(d) for d in b.diagnostics]

    def test_continue_on_error(self, tmp_path):
        src = tmp_path / "two_errors.cicr"
        src.write_text("Check ghost.\nCheck phantom.\n")
        res = run_file(str(src))
        assert len(res.diagnostics) == 1
        res2 = run_file(str(src), continue_on_error=True)
        assert len(res2.diagnostics) == 2

    def test_import_cycle_detected(self, tmp_path):
        a = tmp_path / "a.cicr"
        b = tmp_path / "b.cicr"
        a.write_text('Import "b.cicr".')
        b.write_text('Import "a.cicr".')
        with pytest.raises(ParseError):
            load_commands(str(a))

    def test_import_splices(self, tmp_path):
        base = tmp_path / "base.cicr"
        base.write_text("Inductive unit : Set@0 := tt : unit.")
        user = tmp_path / "user.cicr"
        user.write_text('Import "base.cicr".\nCheck tt : unit.')
        res = run_file(str(user))
        assert res.status == 0

    def test_eval_in_env(self, church_env):
        out = eval_in_env("iter0 (S (S O)) nat S O", church_env)
        expected = elaborate(parse_term_string("S (S O)"), church_env)
        assert alpha_eq(out, expected)

    def test_default_nondependent_motive(self, prelude_env):
        env = prelude_env
        ctx = Context().extend("n", elaborate(parse_term_string("nat"), env))
        t = elaborate(parse_term_string(
            "match n with | O => O | S p => p end"), env, ctx, {"n": "n"})
        assert isinstance(t, Case)
        from cicr.typecheck import infer
        from cicr.reduce import conv
        assert conv(infer(ctx, t, env),
                    elaborate(parse_term_string("nat"), env), env)


class TestCli:
    def test_check_success(self, capsys):
        assert main(["check", corpus("church.cicr")]) == 0
        out = capsys.readouterr()
        assert "PASS Parametricity iter0" in out.out
        assert out.err == ""

    def test_check_failure_diagnostics_on_stderr(self, capsys):
        code = main(["check", corpus(os.path.join("neg",
                                                  "unguarded_fix.cicr"))])
        assert code == 1
        out = capsys.readouterr()
        assert "GuardViolation" in out.err

    def test_missing_file_is_usage_error(self, capsys):
        assert main(["check", "no_such_file.cicr"]) == 2

    def test_param_subcommand(self, capsys):
        assert main(["param", corpus("church.cicr"), "--def", "zero"]) == 0
        out = capsys.readouterr().out
        assert "[zero] =" in out
        assert "verified: True" in out

    def test_embed_subcommand(self, capsys):
        assert main(["embed", corpus("church.cicr"), "--def",
                     "church0"]) == 0
        out = capsys.readouterr().out
        assert "|church0| :" in out
        assert "embedding check: PASS" in out

    def test_eval_subcommand(self, capsys):
        assert main(["eval", corpus("church.cicr"), "--term",
                     "iter0 (S O) nat S O"]) == 0
        assert capsys.readouterr().out.strip() == "S O"

    def test_fuel_flag(self, capsys):
        code = main(["eval", corpus("church.cicr"), "--fuel", "3",
                     "--term", "iter0 (S (S (S O))) nat S O"])
        assert code == 1
        assert "FuelExhausted" in capsys.readouterr().err
