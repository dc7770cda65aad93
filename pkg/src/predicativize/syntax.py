"""Concrete syntax: tokenizer, parser, pretty printer and the ``.dk``-style emitter.

Grammar::

    signature  ::= entry*
    entry      ::= "constant" id ":" term "."
                 | "definition" id ":" term ":=" term "."
    term       ::= "\\" id [":" term] "." term        abstraction
                 | "!" id ":" term "." term           product
                 | join ["->" term]                    non-dependent product
    join       ::= app ["\\/" join]                    level join, right associative
    app        ::= atom+
    atom       ::= id | "Type" | "Kind" | "(" term ")"

``λ``, ``Π``, ``→`` and ``⊔`` are accepted as aliases.  An identifier is a
variable when bound by an enclosing binder or when its name is a level
variable name (``?3``, ``i2``, ``i'0``); otherwise it is a constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from predicativize.errors import ParseError
from predicativize.terms import (
    KIND,
    LUB,
    TYPE,
    App,
    Const,
    Decl,
    Def,
    Lam,
    Pi,
    Signature,
    SignatureEntry,
    Sort,
    Term,
    Var,
    free_vars,
    is_level_name,
    lub,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*|\(;.*?;\))
  | (?P<sym>:=|->|→|\\/|⊔|[\\λ!Π():.=,])
  | (?P<ident>[A-Za-z_?][A-Za-z0-9_'?]*)
    """,
    re.VERBOSE | re.DOTALL,
)

_ALIASES = {"λ": "\\", "Π": "!", "→": "->", "⊔": "\\/"}
KEYWORDS = frozenset({"constant", "definition", "Type", "Kind"})


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "sym", "ident" or "eof"
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind in ("sym", "ident"):
            tok = m.group()
            tokens.append(Token(kind, _ALIASES.get(tok, tok), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, msg: str) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"{msg}, found {found}", t.line, t.column)

    def at(self, text: str) -> bool:
        return self.tok.kind == "sym" and self.tok.text == text

    def expect(self, text: str) -> None:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        self.pos += 1

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error("expected an identifier")
        self.pos += 1
        return t.text

    def keyword(self, word: str) -> bool:
        if self.tok.kind == "ident" and self.tok.text == word:
            self.pos += 1
            return True
        return False

    # -- terms -------------------------------------------------------------

    def term(self, bound: frozenset[str] = frozenset()) -> Term:
        if self.at("\\"):
            self.pos += 1
            x = self.ident()
            annot = None
            if self.at(":"):
                self.pos += 1
                annot = self.term(bound)
            self.expect(".")
            return Lam(x, annot, self.term(bound | {x}))
        if self.at("!"):
            self.pos += 1
            x = self.ident()
            self.expect(":")
            dom = self.term(bound)
            self.expect(".")
            return Pi(x, dom, self.term(bound | {x}))
        left = self.join(bound)
        if self.at("->"):
            self.pos += 1
            return Pi("_", left, self.term(bound))
        return left

    def join(self, bound: frozenset[str]) -> Term:
        left = self.application(bound)
        if self.at("\\/"):
            self.pos += 1
            return lub(left, self.join(bound))
        return left

    def application(self, bound: frozenset[str]) -> Term:
        head = self.atom(bound)
        while self._starts_atom():
            head = App(head, self.atom(bound))
        return head

    def _starts_atom(self) -> bool:
        t = self.tok
        if t.kind == "ident":
            return t.text not in ("constant", "definition")
        return self.at("(")

    def atom(self, bound: frozenset[str]) -> Term:
        t = self.tok
        if self.at("("):
            self.pos += 1
            inner = self.term(bound)
            self.expect(")")
            return inner
        if t.kind == "ident":
            if t.text == "Type":
                self.pos += 1
                return TYPE
            if t.text == "Kind":
                self.pos += 1
                return KIND
            name = self.ident()
            return Var(name) if name in bound or is_level_name(name) else Const(name)
        raise self.error("expected a term")

    # -- entries -----------------------------------------------------------

    def entry(self) -> SignatureEntry:
        if self.keyword("constant"):
            name = self.ident()
            self.expect(":")
            ty = self.term()
            self.expect(".")
            return Decl(name, ty)
        if self.keyword("definition"):
            name = self.ident()
            self.expect(":")
            ty = self.term()
            self.expect(":=")
            body = self.term()
            self.expect(".")
            return Def(name, ty, body)
        raise self.error("expected 'constant' or 'definition'")

    def signature(self) -> Signature:
        entries: list[SignatureEntry] = []
        seen: set[str] = set()
        while self.tok.kind != "eof":
            t = self.tok
            e = self.entry()
            if e.name in seen:
                raise ParseError(f"duplicate entry {e.name!r}", t.line, t.column)
            seen.add(e.name)
            entries.append(e)
        return Signature(entries)

    def finish(self) -> None:
        if self.tok.kind != "eof":
            raise self.error("trailing input")


def parse_signature(text: str) -> Signature:
    return Parser(text).signature()


def parse_term(text: str) -> Term:
    p = Parser(text)
    t = p.term()
    p.finish()
    return t


# -- printing ------------------------------------------------------------------------

_BINDER, _JOIN, _APP, _ATOM = 0, 1, 2, 3


def show(t: Term) -> str:
    """Render ``t`` in the concrete syntax; the output reparses to ``t``."""
    return _show(t, _BINDER)


def _paren(s: str, needed: bool) -> str:
    return f"({s})" if needed else s


def _show(t: Term, prec: int) -> str:
    match t:
        case Var(name) | Const(name) | Sort(name):
            return name
        case App(App(Const(name), a), b) if name == LUB:
            return _paren(f"{_show(a, _APP)} \\/ {_show(b, _JOIN)}", prec > _JOIN)
        case App(f, a):
            return _paren(f"{_show(f, _APP)} {_show(a, _ATOM)}", prec > _APP)
        case Lam(x, None, body):
            return _paren(f"\\{x}. {_show(body, _BINDER)}", prec > _BINDER)
        case Lam(x, ty, body):
            return _paren(f"\\{x} : {_show(ty, _BINDER)}. {_show(body, _BINDER)}", prec > _BINDER)
        case Pi(x, dom, cod):
            if x == "_" or x not in free_vars(cod):
                return _paren(f"{_show(dom, _JOIN)} -> {_show(cod, _BINDER)}", prec > _BINDER)
            return _paren(f"!{x} : {_show(dom, _BINDER)}. {_show(cod, _BINDER)}", prec > _BINDER)
    raise TypeError(f"not a term: {t!r}")


def show_entry(e: SignatureEntry) -> str:
    if isinstance(e, Def):
        return f"definition {e.name} :\n  {show(e.type)}\n:=\n  {show(e.body)}."
    return f"constant {e.name} :\n  {show(e.type)}."


def emit_dk(sig: Signature) -> str:
    return "".join(show_entry(e) + "\n\n" for e in sig)


def parse_user_constraints(text: str) -> dict[str, list]:
    """Read one ``entry: level = level`` equation per line; ``#`` starts a comment."""
    from predicativize.levels import Constraint

    out: dict[str, list[Constraint]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.split("#", 1)[0].strip():
            continue
        try:
            p = Parser(raw)
            name = p.ident()
            p.expect(":")
            lhs = p.join(frozenset())
            p.expect("=")
            rhs = p.join(frozenset())
            p.finish()
        except ParseError as e:
            raise ParseError(str(e).split(": ", 1)[-1], lineno, e.column) from None
        out.setdefault(name, []).append(Constraint(lhs, rhs))
    return out
