"""Syntactic translation of a universe-polymorphic signature to Agda.

``U l`` and ``u l`` become ``Set l``; ``El l A`` is just ``A``; the encoded
product ``pi l l' A (\\x. B)`` becomes ``(x : A) → B``; level parameters turn
into implicit arguments.  Declarations are emitted as postulates.
"""

from __future__ import annotations

from predicativize.errors import UnsupportedConstruct
from predicativize.terms import (
    LEVEL,
    LUB,
    SUCC,
    ZERO,
    App,
    Const,
    Def,
    Lam,
    Pi,
    Signature,
    SignatureEntry,
    Sort,
    Term,
    Var,
    free_vars,
    fresh_name,
    is_level_constructor_term,
    is_level_name,
    rename_bound,
    unfold_app,
)

_ATOM, _APP, _ARROW = 2, 1, 0


class _Emitter:
    def __init__(self, level_names: dict[str, str]):
        self.levels = dict(level_names)

    def is_level(self, t: Term) -> bool:
        if isinstance(t, Var):
            return t.name in self.levels or is_level_name(t.name)
        return is_level_constructor_term(t)

    def level(self, t: Term, prec: int = _ARROW) -> str:
        match t:
            case Const(name) if name == ZERO:
                return "lzero"
            case Var(name):
                return self.levels.get(name, name)
            case App(Const(name), a) if name == SUCC:
                return _paren(f"lsuc {self.level(a, _ATOM)}", prec >= _ATOM)
            case App(App(Const(name), a), b) if name == LUB:
                return _paren(f"{self.level(a, _APP)} ⊔ {self.level(b, _APP)}", prec >= _APP)
        raise UnsupportedConstruct(f"not a level: {t}")

    def term(self, t: Term, prec: int = _ARROW, bound: frozenset[str] = frozenset()) -> str:
        if self.is_level(t) and not (isinstance(t, Var) and t.name in bound):
            return self.level(t, prec)
        head, args = unfold_app(t)
        match head, args:
            case Const("U" | "u"), [lvl]:
                return _paren(f"Set {self.level(lvl, _ATOM)}", prec >= _ATOM)
            case Const("El"), [_, a]:
                return self.term(a, prec, bound)
            case Const("pi"), [_, _, a, b]:
                return self._product(a, b, prec, bound)
            case Const(name), _ if name in ("U", "El", "u", "pi", LEVEL, SUCC, LUB):
                raise UnsupportedConstruct(f"partially applied {name} in {t}")
            case Sort(_), _:
                raise UnsupportedConstruct(f"{head} has no Agda counterpart here")
        match t:
            case Var(name) | Const(name):
                return name
            case App(f, a):
                if self.is_level(a) and not (isinstance(a, Var) and a.name in bound):
                    arg = "{" + self.level(a) + "}"
                else:
                    arg = self.term(a, _ATOM, bound)
                return _paren(f"{self.term(f, _APP, bound)} {arg}", prec >= _ATOM)
            case Lam(x, ty, body):
                binder = f"({x} : {self.term(ty, _ARROW, bound)})" if ty is not None else x
                return _paren(f"λ {binder} → {self.term(body, _ARROW, bound | {x})}", prec > _ARROW)
            case Pi(x, dom, cod):
                return self._arrow(x, self.term(dom, _ARROW, bound), cod, prec, bound)
        raise UnsupportedConstruct(f"cannot emit {t}")

    def _product(self, a: Term, b: Term, prec: int, bound: frozenset[str]) -> str:
        dom = self.term(a, _ARROW, bound)
        if isinstance(b, Lam):
            return self._arrow(b.name, dom, b.body, prec, bound)
        x = fresh_name("x", free_vars(b) | bound)
        return self._arrow(x, dom, App(b, Var(x)), prec, bound)

    def _arrow(self, x: str, dom: str, cod: Term, prec: int, bound: frozenset[str]) -> str:
        if x == "_" or x not in free_vars(cod):
            body = self.term(cod, _ARROW, bound)
            return _paren(f"{_paren(dom, _needs_parens(dom))} → {body}", prec > _ARROW)
        return _paren(f"({x} : {dom}) → {self.term(cod, _ARROW, bound | {x})}", prec > _ARROW)


def _needs_parens(s: str) -> bool:
    depth = 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and s.startswith("→", i):
            return True
    return False


def _paren(s: str, needed: bool) -> str:
    return f"({s})" if needed else s


def _level_binders(ty: Term) -> tuple[list[str], Term]:
    names = []
    while isinstance(ty, Pi) and ty.dom == Const(LEVEL):
        names.append(ty.name)
        ty = ty.cod
    return names, ty


def emit_entry(e: SignatureEntry) -> str:
    names, ty = _level_binders(e.type)
    agda_names = {v: f"ℓ{k}" for k, v in enumerate(names)}
    em = _Emitter(agda_names)
    prefix = "∀ {" + " ".join(agda_names.values()) + " : Level} → " if names else ""
    sig_line = f"{e.name} : {prefix}{em.term(ty)}"
    if not isinstance(e, Def):
        return f"postulate\n  {sig_line}\n"
    body = e.body
    for v in names:
        if not isinstance(body, Lam):
            raise UnsupportedConstruct(f"{e.name}: body does not abstract its level {v}")
        if body.name != v:
            body = Lam(v, body.annot, rename_bound(body.name, body.body, v))
        body = body.body
    implicit = "".join(" {" + n + "}" for n in agda_names.values())
    return f"{sig_line}\n{e.name}{implicit} = {em.term(body)}\n"


def emit_agda(sig: Signature, module: str = "Output") -> str:
    parts = [f"module {module} where\n", "open import Agda.Primitive\n"]
    parts += [emit_entry(e) for e in sig]
    return "\n".join(parts)
