"""Signature translation for sentences over the two-element algebra.

A sentence written with the algebra's equality, constants, meet, join and
complement is rewritten for structures that only carry an equivalence
relation: quantifiers are relativized to the classes of two distinguished
elements, compound terms are pushed out of general atoms into case analyses,
and the surviving constant-sided atoms are flattened into connective chains.
Two wrappers then remove the constant symbols and the equivalence symbol
itself, for signatures that lack them.

The rewrites run as bottom-up sweeps to an identity fixpoint. Every sweep
normalizes each atom completely, so the drivers stabilize after one working
sweep; a sweep that blows the sentence up more than fivefold emits a warning
but keeps going.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .formulas import (
    SIM,
    And,
    Atom,
    CConst,
    Complement,
    Const,
    Exists,
    ForAll,
    Formula,
    Implies,
    Join,
    Meet,
    Not,
    Or,
    PredAtom,
    Term,
    Var,
    VarId,
    boolean_occurrences,
    fold,
    free_vars,
    length_natural,
    rebuild,
    render_natural,
    signature_features,
)

GROWTH_LIMIT = 5

_C0 = CConst(0)
_C1 = CConst(1)


class ResidualTermError(ValueError):
    """An atom kept algebra structure that no rewrite rule can remove."""

    def __init__(self, atom: Formula):
        self.atom = atom
        super().__init__(
            f"cannot eliminate algebra symbols from {render_natural(atom)}"
        )


def _is_const(term: Term) -> bool:
    return isinstance(term, (Const, CConst))


def _guard(vid: VarId) -> Formula:
    v = Var(vid)
    return Or(Atom(v, _C0, SIM), Atom(v, _C1, SIM))


def relativize(formula: Formula) -> Formula:
    """Swap equality for the equivalence symbol and guard every quantifier.

    Each bound variable is restricted to the classes of the two distinguished
    constants: universals through an implication, existentials through a
    conjunction. Multi-variable binders split into nested single-variable
    ones so each variable carries its own guard.
    """
    feats = signature_features(formula)
    if feats["sim"] or feats["c0"] or feats["c1"] or feats["pred"]:
        raise ValueError("expected a sentence in the algebra signature")

    def leave(n, _c, kids):
        if isinstance(n, Atom):
            return Atom(n.left, n.right, SIM)
        if isinstance(n, (ForAll, Exists)):
            shell = Implies if isinstance(n, ForAll) else And
            quant = type(n)
            body = kids[0]
            for vid in reversed(n.vars):
                body = quant((vid,), shell(_guard(vid), body))
            return body
        return rebuild(n, kids)

    return fold(formula, leave)


def _unnest(left: Term, right: Term) -> Formula:
    # Complements strip first (left side first), then a meet or join moves
    # out of the atom provided the opposite side is not a constant; the
    # constant-sided atoms this creates are the next stage's input.
    if isinstance(left, Complement):
        return Not(_unnest(left.arg, right))
    if isinstance(right, Complement):
        return Not(_unnest(left, right.arg))
    for part, other in ((left, right), (right, left)):
        if isinstance(part, (Meet, Join)) and not _is_const(other):
            t1, t2 = part.left, part.right
            if isinstance(part, Join):
                return And(
                    Implies(
                        Or(_unnest(t1, _C1), _unnest(t2, _C1)),
                        _unnest(other, _C1),
                    ),
                    Implies(
                        And(_unnest(t1, _C0), _unnest(t2, _C0)),
                        _unnest(other, _C0),
                    ),
                )
            return And(
                Implies(
                    Or(_unnest(t1, _C0), _unnest(t2, _C0)),
                    _unnest(other, _C0),
                ),
                Implies(
                    And(_unnest(t1, _C1), _unnest(t2, _C1)),
                    _unnest(other, _C1),
                ),
            )
    return Atom(left, right, SIM)


def _unnest_atom(atom: Atom) -> Formula:
    left, right = atom.left, atom.right
    fires = (
        isinstance(left, Complement)
        or isinstance(right, Complement)
        or (isinstance(left, (Meet, Join)) and not _is_const(right))
        or (isinstance(right, (Meet, Join)) and not _is_const(left))
    )
    return _unnest(left, right) if fires else atom


def unnest_pass(formula: Formula) -> Formula:
    """One sweep of the case-analysis rewrite; identity when nothing fires."""

    def leave(n, _c, kids):
        if isinstance(n, Atom) and n.rel == SIM:
            return _unnest_atom(n)
        return rebuild(n, kids)

    return fold(formula, leave)


def _to_fixpoint(formula: Formula, sweep) -> Formula:
    current = formula
    while True:
        before = length_natural(current)
        new = sweep(current)
        if new is current:
            return current
        after = length_natural(new)
        if after > GROWTH_LIMIT * before:
            warnings.warn(
                f"rewrite pass grew the sentence from {before} to {after} symbols",
                stacklevel=3,
            )
        current = new


def _rename_constants(formula: Formula) -> Formula:
    def leave(n, _c, kids):
        if isinstance(n, Const):
            return CConst(n.bit)
        return rebuild(n, kids)

    return fold(formula, leave)


def unnest_atoms(formula: Formula) -> Formula:
    """Push compound terms out of every atom whose other side is free.

    Afterwards the only atoms still holding meets or joins have a constant on
    the opposite side. Finishes by renaming the algebra constants 0 and 1 to
    the structure's distinguished constants.
    """
    return _rename_constants(_to_fixpoint(formula, unnest_pass))


def _flatten(left: Term, right: Term) -> Formula:
    if isinstance(left, Complement):
        return Not(_flatten(left.arg, right))
    if isinstance(right, Complement):
        return Not(_flatten(left, right.arg))
    for part, other in ((left, right), (right, left)):
        if isinstance(part, (Meet, Join)) and isinstance(other, CConst):
            # A join holds the top constant iff some operand does, the bottom
            # iff both do; meets dualize.
            split_or = isinstance(part, Join) == (other.bit == 1)
            shell = Or if split_or else And
            return shell(_flatten(part.left, other), _flatten(part.right, other))
    return Atom(left, right, SIM)


def _flatten_atom(atom: Atom) -> Formula:
    left, right = atom.left, atom.right
    fires = (
        isinstance(left, Complement)
        or isinstance(right, Complement)
        or (isinstance(left, (Meet, Join)) and isinstance(right, CConst))
        or (isinstance(right, (Meet, Join)) and isinstance(left, CConst))
    )
    return _flatten(left, right) if fires else atom


def flatten_pass(formula: Formula) -> Formula:
    """One sweep of the constant-sided flattening; identity when nothing fires."""

    def leave(n, _c, kids):
        if isinstance(n, Atom) and n.rel == SIM:
            return _flatten_atom(n)
        return rebuild(n, kids)

    return fold(formula, leave)


def _first_residual_atom(formula: Formula) -> Formula:
    found: list[Formula] = []

    def leave(n, _c, _kids):
        if isinstance(n, (Atom, PredAtom)) and not found and boolean_occurrences(n):
            found.append(n)
        return None

    fold(formula, leave)
    return found[0] if found else formula


def flatten_constant_atoms(formula: Formula) -> Formula:
    """Flatten every constant-sided compound atom into a connective chain.

    Raises ``ResidualTermError`` when algebra symbols survive, which means the
    input was not in the case-analysis form ``unnest_atoms`` produces.
    """
    out = _to_fixpoint(formula, flatten_pass)
    if boolean_occurrences(out):
        raise ResidualTermError(_first_residual_atom(out))
    return out


def translate_20(formula: Formula) -> Formula:
    """Rewrite an algebra sentence for structures with an equivalence relation.

    The output speaks only the equivalence symbol and the two distinguished
    constants; it holds in such a structure (with the constants in distinct
    classes) exactly when the input holds in the two-element algebra.
    """
    if free_vars(formula):
        raise ValueError("translation needs a closed formula")
    return flatten_constant_atoms(unnest_atoms(relativize(formula)))


def _all_var_ids(formula: Formula) -> set[VarId]:
    def leave(n, _c, kids):
        merged = set().union(*kids) if kids else set()
        if isinstance(n, Var):
            merged.add(n.vid)
        elif isinstance(n, (ForAll, Exists)):
            merged.update(n.vars)
        return merged

    return fold(formula, leave)


def _fresh_pair(formula: Formula) -> tuple[VarId, VarId]:
    group = 1 + max((v.group for v in _all_var_ids(formula)), default=-1)
    return VarId("a", group, 0), VarId("b", group, 0)


def _check_relational(formula: Formula) -> None:
    feats = signature_features(formula)
    if feats["eq"] or feats["bool_term"]:
        raise ValueError("expected the constant-bearing relational form")


def translate_21(formula: Formula) -> Formula:
    """Trade the two distinguished constants for existential witnesses.

    ``formula`` is a ``translate_20`` result. The constants become fresh
    variables bound up front together with the promise that they are
    inequivalent, so the output needs no constant symbols at all.
    """
    _check_relational(formula)
    a, b = _fresh_pair(formula)

    def leave(n, _c, kids):
        if isinstance(n, CConst):
            return Var(a) if n.bit == 0 else Var(b)
        return rebuild(n, kids)

    body = fold(formula, leave)
    return Exists((a, b), And(Not(Atom(Var(a), Var(b), SIM)), body))


def translate_22(formula: Formula, n_formula: Formula) -> Formula:
    """Express a ``translate_20`` result through a disagreement predicate.

    ``n_formula`` must define, over the target structure with exactly two
    free variables, that its arguments are inequivalent. Every equivalence
    atom becomes a negated predicate application (no simplification: a doubly
    negated atom stays doubly negated), and the witness prefix asserts the
    predicate directly instead of a negated equivalence.
    """
    _check_relational(formula)
    if len(free_vars(n_formula)) != 2:
        raise ValueError("the distinguishing predicate needs exactly two free variables")
    a, b = _fresh_pair(formula)

    def leave(n, _c, kids):
        if isinstance(n, CConst):
            return Var(a) if n.bit == 0 else Var(b)
        if isinstance(n, Atom) and n.rel == SIM:
            return Not(PredAtom("N", kids[0], kids[1]))
        return rebuild(n, kids)

    body = fold(formula, leave)
    return Exists((a, b), And(PredAtom("N", Var(a), Var(b)), body))


@dataclass(frozen=True, slots=True)
class EqStructure:
    """A finite structure: universe 0..size-1 with an equivalence partition.

    ``constants`` interprets the two distinguished constants when present;
    ``n_formula`` defines the binary disagreement predicate over the
    structure's own relational signature. ``evaluate.eval_relational``
    consumes instances through ``size``, ``same_class``, ``constant``,
    ``n_formula`` and ``n_free_pair``.
    """

    size: int
    partition: tuple[tuple[int, ...], ...]
    constants: tuple[int, int] | None = None
    n_formula: Formula | None = None

    def __post_init__(self):
        members = [e for block in self.partition for e in block]
        if self.size < 1 or sorted(members) != list(range(self.size)):
            raise ValueError("partition must cover 0..size-1 exactly once")
        if self.constants is not None:
            for element in self.constants:
                if not 0 <= element < self.size:
                    raise ValueError(f"constant {element} is outside the universe")
        if self.n_formula is not None and len(free_vars(self.n_formula)) != 2:
            raise ValueError("n_formula needs exactly two free variables")

    def class_index(self, element: int) -> int:
        for i, block in enumerate(self.partition):
            if element in block:
                return i
        raise ValueError(f"{element} is not in the universe")

    def same_class(self, a: int, b: int) -> bool:
        return self.class_index(a) == self.class_index(b)

    def constant(self, bit: int) -> int | None:
        return None if self.constants is None else self.constants[bit]

    @property
    def nontrivial(self) -> bool:
        return len(self.partition) >= 2

    def n_free_pair(self) -> tuple[VarId, VarId]:
        if self.n_formula is None:
            raise ValueError("no distinguishing predicate attached")
        first, second = sorted(free_vars(self.n_formula))
        return first, second

    def problems(self) -> list[str]:
        """Why this structure cannot interpret translated sentences, if at all."""
        issues: list[str] = []
        if not self.nontrivial:
            issues.append(
                "the partition has a single class; translated sentences need two"
            )
        if self.constants is not None and self.same_class(*self.constants):
            issues.append("the two distinguished constants fall in the same class")
        if self.n_formula is not None:
            feats = signature_features(self.n_formula)
            if feats["eq"] or feats["bool_term"]:
                issues.append("n_formula uses algebra symbols")
            if (feats["c0"] or feats["c1"]) and self.constants is None:
                issues.append("n_formula mentions constants the structure lacks")
        return issues

    @classmethod
    def from_json(cls, data: dict, n_formula: Formula | None = None) -> "EqStructure":
        try:
            size = int(data["size"])
            partition = tuple(tuple(int(e) for e in block) for block in data["partition"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"model file needs 'size' and 'partition': {exc}") from exc
        constants = None
        raw = data.get("constants")
        if raw is not None:
            try:
                constants = (int(raw["c0"]), int(raw["c1"]))
            except (KeyError, TypeError) as exc:
                raise ValueError("model constants need 'c0' and 'c1'") from exc
        return cls(size=size, partition=partition, constants=constants, n_formula=n_formula)
