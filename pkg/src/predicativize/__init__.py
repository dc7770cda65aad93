"""Translate impredicative PTS signatures into a universe-polymorphic predicative theory."""

from predicativize.agda import emit_agda
from predicativize.constraint_gen import (
    MetaSession,
    arity,
    check_constraints,
    conv_constraints,
    infer_constraints,
    insert_metas,
)
from predicativize.levels import (
    Constraint,
    ConstraintNF,
    LevelNF,
    constraint_nf,
    interp,
    level_equiv,
    level_nf,
)
from predicativize.pipeline import (
    Failed,
    Translated,
    TranslationReport,
    translate_entry,
    translate_signature,
)
from predicativize.rewriting import conv, typecheck_signature, whnf
from predicativize.syntax import emit_dk, parse_signature, parse_term, parse_user_constraints, show
from predicativize.terms import Decl, Def, Signature, alpha_eq, free_level_vars, subst
from predicativize.theories import (
    PtsSpec,
    build_pts_theory,
    impredicative_theory,
    predicative_theory,
    upp_theory,
)
from predicativize.unify import LevelSubst, Solved, Stuck, Unsolvable, unify

__all__ = [
    "Constraint", "ConstraintNF", "Decl", "Def", "Failed", "LevelNF", "LevelSubst",
    "MetaSession", "PtsSpec", "Signature", "Solved", "Stuck", "Translated",
    "TranslationReport", "Unsolvable", "alpha_eq", "arity", "build_pts_theory",
    "check_constraints", "constraint_nf", "conv", "conv_constraints", "emit_agda",
    "emit_dk", "free_level_vars", "impredicative_theory", "infer_constraints",
    "insert_metas", "interp", "level_equiv", "level_nf", "parse_signature",
    "parse_term", "parse_user_constraints", "predicative_theory", "show", "subst",
    "translate_entry", "translate_signature", "typecheck_signature", "unify",
    "upp_theory", "whnf",
]
