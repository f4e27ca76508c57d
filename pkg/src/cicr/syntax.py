"""Lexer and parser for the .cicr surface syntax.

Concrete syntax: ``forall (x : A), B``, ``fun (x : A) => B``, application
by juxtaposition, ``Prop`` / ``Set@i`` / ``Type@i`` sorts (bare ``Set``
means ``Set@0``; bare ``Type`` is a parse error), ``match ... with | C
args => rhs ... end`` and ``fix f (x : A) {struct x} : B := body``;
comments ``(* ... *)`` nest.

Identifiers are resolved later, against an environment: the parser emits
``Var`` for every name and a ``SurfaceMatch`` placeholder for ``match``,
which elaboration turns into a kernel case node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ParseError
from .terms import Prop, Sort, SortT, Term, Var, App, lams, prods

KEYWORDS = {
    "forall", "fun", "fix", "match", "as", "in", "return", "with", "end",
    "struct", "Prop", "Set", "Type",
    "Inductive", "Definition", "Fixpoint", "Axiom", "Realize",
    "Parametricity", "Check", "Eval", "Embed", "Import",
}

_TWO_CHAR = (":=", "=>", "->")
_ONE_CHAR = "(){},.:|@"


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'num', 'string', a keyword, or a symbol
    value: str
    line: int
    col: int


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg: str):
        raise ParseError(f"{filename}: {msg}", line, col)

    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("(*", i):
            depth, j = 1, i + 2
            l2, c2 = line, col + 2
            while j < n and depth:
                if text.startswith("(*", j):
                    depth += 1
                    j += 2
                    c2 += 2
                elif text.startswith("*)", j):
                    depth -= 1
                    j += 2
                    c2 += 2
                elif text[j] == "\n":
                    j += 1
                    l2 += 1
                    c2 = 1
                else:
                    j += 1
                    c2 += 1
            if depth:
                err("unterminated comment")
            i, line, col = j, l2, c2
            continue
        if c == '"':
            j = text.find('"', i + 1)
            if j < 0:
                err("unterminated string literal")
            tokens.append(Token("string", text[i + 1:j], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            kind = word if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("num", text[i:j], line, col))
            col += j - i
            i = j
            continue
        two = text[i:i + 2]
        if two in _TWO_CHAR:
            tokens.append(Token(two, two, line, col))
            i += 2
            col += 2
            continue
        if c in _ONE_CHAR:
            tokens.append(Token(c, c, line, col))
            i += 1
            col += 1
            continue
        err(f"unexpected character {c!r}")
    tokens.append(Token("eof", "", line, col))
    return tokens


# -- surface placeholders ------------------------------------------------------

@dataclass(frozen=True, eq=False, repr=False)
class SurfaceMatch(Term):
    """A parsed match, elaborated into a Case once the scrutinee type is
    known."""

    scrutinee: Term
    as_name: Optional[str]
    in_ind: Optional[str]
    in_pats: tuple[str, ...]
    return_ty: Optional[Term]
    branches: tuple[tuple[str, tuple[str, ...], Term], ...]
    line: int = 0
    col: int = 0


# -- vernacular commands -------------------------------------------------------

@dataclass(frozen=True)
class Command:
    line: int
    col: int
    file: str


@dataclass(frozen=True)
class InductiveCmd(Command):
    name: str
    binders: tuple[tuple[str, Term], ...]
    arity: Term
    constructors: tuple[tuple[str, Term], ...]


@dataclass(frozen=True)
class DefinitionCmd(Command):
    name: str
    type: Optional[Term]
    body: Term


@dataclass(frozen=True)
class FixpointCmd(Command):
    name: str
    binders: tuple[tuple[str, Term], ...]
    struct: Optional[str]
    type: Term
    body: Term


@dataclass(frozen=True)
class AxiomCmd(Command):
    name: str
    type: Term


@dataclass(frozen=True)
class RealizeCmd(Command):
    name: str
    witness: Term


@dataclass(frozen=True)
class ParametricityCmd(Command):
    name: str


@dataclass(frozen=True)
class CheckCmd(Command):
    term: Term
    type: Optional[Term]


@dataclass(frozen=True)
class EvalCmd(Command):
    term: Term


@dataclass(frozen=True)
class EmbedCmd(Command):
    name: str


@dataclass(frozen=True)
class ImportCmd(Command):
    path: str


class Parser:
    def __init__(self, tokens: list[Token], filename: str = "<input>"):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(f"expected {kind!r}, found {tok.value!r}")
        return self.next()

    def fail(self, msg: str):
        tok = self.peek()
        raise ParseError(f"{self.filename}: {msg}", tok.line, tok.col)

    # -- commands ------------------------------------------------------------

    def parse_file(self) -> list[Command]:
        commands = []
        while self.peek().kind != "eof":
            commands.append(self.parse_command())
        return commands

    def _name(self) -> str:
        tok = self.peek()
        if tok.kind != "ident" or tok.value == "_":
            self.fail(f"expected a name, found {tok.value!r}")
        return self.next().value

    def parse_command(self) -> Command:
        tok = self.peek()
        where = dict(line=tok.line, col=tok.col, file=self.filename)
        kind = tok.kind
        if kind == "Inductive":
            self.next()
            name = self._name()
            binders = []
            while self.peek().kind == "(":
                binders.extend(self._paren_binder_group())
            self.expect(":")
            sort_ty = self.parse_term()
            arity = prods(binders, sort_ty)
            ctors: list[tuple[str, Term]] = []
            if self.peek().kind == ":=":
                self.next()
                if self.peek().kind == "|":
                    self.next()
                while self.peek().kind != ".":
                    cname = self._name()
                    self.expect(":")
                    cty = self.parse_term()
                    ctors.append((cname, prods(binders, cty)))
                    if self.peek().kind == "|":
                        self.next()
            self.expect(".")
            return InductiveCmd(binders=tuple(binders), name=name,
                                arity=arity, constructors=tuple(ctors),
                                **where)
        if kind == "Definition":
            self.next()
            name = self._name()
            ty = None
            if self.peek().kind == ":":
                self.next()
                ty = self.parse_term()
            self.expect(":=")
            body = self.parse_term()
            self.expect(".")
            return DefinitionCmd(name=name, type=ty, body=body, **where)
        if kind == "Fixpoint":
            self.next()
            name = self._name()
            binders = []
            while self.peek().kind == "(":
                binders.extend(self._paren_binder_group())
            if not binders:
                self.fail("Fixpoint needs at least one argument binder")
            struct = self._struct_annotation()
            self.expect(":")
            ty = self.parse_term()
            self.expect(":=")
            body = self.parse_term()
            self.expect(".")
            return FixpointCmd(name=name, binders=tuple(binders),
                               struct=struct, type=ty, body=body, **where)
        if kind == "Axiom":
            self.next()
            name = self._name()
            self.expect(":")
            ty = self.parse_term()
            self.expect(".")
            return AxiomCmd(name=name, type=ty, **where)
        if kind == "Realize":
            self.next()
            name = self._name()
            witness = self.parse_term()
            self.expect(".")
            return RealizeCmd(name=name, witness=witness, **where)
        if kind == "Parametricity":
            self.next()
            name = self._name()
            self.expect(".")
            return ParametricityCmd(name=name, **where)
        if kind == "Check":
            self.next()
            term = self.parse_term()
            ty = None
            if self.peek().kind == ":":
                self.next()
                ty = self.parse_term()
            self.expect(".")
            return CheckCmd(term=term, type=ty, **where)
        if kind == "Eval":
            self.next()
            term = self.parse_term()
            self.expect(".")
            return EvalCmd(term=term, **where)
        if kind == "Embed":
            self.next()
            name = self._name()
            self.expect(".")
            return EmbedCmd(name=name, **where)
        if kind == "Import":
            self.next()
            path = self.expect("string").value
            self.expect(".")
            return ImportCmd(path=path, **where)
        self.fail(f"expected a command, found {tok.value!r}")

    # -- binders ---------------------------------------------------------------

    def _binder_name(self) -> str:
        tok = self.peek()
        if tok.kind != "ident":
            self.fail(f"expected a binder name, found {tok.value!r}")
        return self.next().value

    def _paren_binder_group(self) -> list[tuple[str, Term]]:
        self.expect("(")
        names = [self._binder_name()]
        while self.peek().kind == "ident":
            names.append(self._binder_name())
        self.expect(":")
        ty = self.parse_term()
        self.expect(")")
        return [(n, ty) for n in names]

    def _binders(self) -> list[tuple[str, Term]]:
        if self.peek().kind == "(":
            out = []
            while self.peek().kind == "(":
                out.extend(self._paren_binder_group())
            return out
        names = [self._binder_name()]
        while self.peek().kind == "ident":
            names.append(self._binder_name())
        self.expect(":")
        ty = self.parse_term()
        return [(n, ty) for n in names]

    def _struct_annotation(self) -> Optional[str]:
        if self.peek().kind != "{":
            return None
        self.next()
        self.expect("struct")
        tok = self.peek()
        if tok.kind not in ("ident", "num"):
            self.fail("expected an argument name or index after 'struct'")
        self.next()
        self.expect("}")
        return tok.value

    # -- terms -------------------------------------------------------------------

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "forall":
            self.next()
            binders = self._binders()
            self.expect(",")
            return prods(binders, self.parse_term())
        if tok.kind == "fun":
            self.next()
            binders = self._binders()
            self.expect("=>")
            return lams(binders, self.parse_term())
        if tok.kind == "fix":
            return self._parse_fix()
        return self._parse_arrow()

    def _parse_fix(self) -> Term:
        from .terms import Fix
        self.expect("fix")
        name = self._binder_name()
        binders = []
        while self.peek().kind == "(":
            binders.extend(self._paren_binder_group())
        struct_tok = self._struct_annotation()
        self.expect(":")
        ret = self.parse_term()
        self.expect(":=")
        body = self.parse_term()
        struct: Optional[int] = None
        if struct_tok is not None:
            if struct_tok.isdigit():
                struct = int(struct_tok)
            else:
                names = [n for n, _ in binders]
                if struct_tok not in names:
                    self.fail(f"struct argument {struct_tok!r} is not a "
                              f"binder of this fix")
                struct = names.index(struct_tok)
        return Fix(name, prods(binders, ret), lams(binders, body), struct)

    def _parse_arrow(self) -> Term:
        lhs = self._parse_app()
        if self.peek().kind == "->":
            self.next()
            from .terms import Prod
            return Prod("_", lhs, self.parse_term())
        return lhs

    _ATOM_START = {"ident", "Prop", "Set", "Type", "(", "match"}

    def _parse_app(self) -> Term:
        t = self._parse_atom()
        while self.peek().kind in self._ATOM_START:
            t = App(t, self._parse_atom())
        return t

    def _parse_atom(self) -> Term:
        tok = self.peek()
        if tok.kind == "ident":
            if tok.value == "_":
                self.fail("'_' is not a term")
            self.next()
            return Var(tok.value)
        if tok.kind == "Prop":
            self.next()
            return SortT(Prop)
        if tok.kind == "Set":
            self.next()
            level = 0
            if self.peek().kind == "@":
                self.next()
                level = int(self.expect("num").value)
            return SortT(Sort("Set", level))
        if tok.kind == "Type":
            self.next()
            if self.peek().kind != "@":
                self.fail("Type requires an explicit level: Type@i")
            self.next()
            level = int(self.expect("num").value)
            return SortT(Sort("Type", level))
        if tok.kind == "(":
            self.next()
            t = self.parse_term()
            self.expect(")")
            return t
        if tok.kind == "match":
            return self._parse_match()
        self.fail(f"expected a term, found {tok.value!r}")

    def _parse_match(self) -> Term:
        tok = self.expect("match")
        scrut = self.parse_term()
        as_name = None
        if self.peek().kind == "as":
            self.next()
            as_name = self._binder_name()
        in_ind = None
        in_pats: list[str] = []
        if self.peek().kind == "in":
            self.next()
            in_ind = self._name()
            while self.peek().kind == "ident":
                in_pats.append(self.next().value)
        ret = None
        if self.peek().kind == "return":
            self.next()
            ret = self.parse_term()
        self.expect("with")
        branches = []
        while self.peek().kind == "|":
            self.next()
            cname = self._name()
            pats = []
            while self.peek().kind == "ident":
                pats.append(self.next().value)
            self.expect("=>")
            rhs = self.parse_term()
            branches.append((cname, tuple(pats), rhs))
        self.expect("end")
        return SurfaceMatch(scrut, as_name, in_ind, tuple(in_pats), ret,
                            tuple(branches), tok.line, tok.col)


def parse_commands(text: str, filename: str = "<input>") -> list[Command]:
    return Parser(tokenize(text, filename), filename).parse_file()


def parse_term_string(text: str, filename: str = "<input>") -> Term:
    parser = Parser(tokenize(text, filename), filename)
    t = parser.parse_term()
    if parser.peek().kind != "eof":
        parser.fail("trailing input after term")
    return t
