"""First-order formulas over the two-element Boolean algebra.

Terms are built from variables, the constants 0 and 1, complement, meet and
join; atoms compare terms with the algebra's equality or, after translation,
with an equivalence symbol and an optional binary predicate. The module also
carries the symbol-counting length metric, a deterministic text form with a
parser, and the tuple-level helpers (pointwise equality, lexicographic order,
increment and decrement) that the encoder leans on.

Traversals that must survive deep formulas (folds, substitution, rendering,
parsing) are iterative; nothing here recurses on the formula spine.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence


class CaptureError(ValueError):
    """A substitution target would be captured by a binder."""


class ParseError(ValueError):
    """Malformed formula text."""


@dataclass(frozen=True, slots=True, order=True)
class VarId:
    """A variable name: a one-letter kind plus a group and bit index."""

    kind: str
    group: int
    bit: int

    def text(self) -> str:
        return f"{self.kind}{self.group},{self.bit}"


class Term:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Const(Term):
    """Boolean constant 0 or 1."""

    bit: int


@dataclass(frozen=True, slots=True)
class CConst(Term):
    """Relational constant c0 or c1, distinct from the Boolean constants."""

    bit: int


@dataclass(frozen=True, slots=True)
class Var(Term):
    vid: VarId


@dataclass(frozen=True, slots=True)
class Complement(Term):
    arg: Term


@dataclass(frozen=True, slots=True)
class Meet(Term):
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Join(Term):
    left: Term
    right: Term


class Formula:
    __slots__ = ()


EQ = "eq"
SIM = "sim"


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    """Term comparison; ``rel`` is the algebra equality or the equivalence symbol."""

    left: Term
    right: Term
    rel: str = EQ


@dataclass(frozen=True, slots=True)
class PredAtom(Formula):
    """Application of a named binary predicate to two terms."""

    name: str
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class ForAll(Formula):
    vars: tuple[VarId, ...]
    body: Formula


@dataclass(frozen=True, slots=True)
class Exists(Formula):
    vars: tuple[VarId, ...]
    body: Formula


Node = Term | Formula


def children(node: Node) -> tuple[Node, ...]:
    if isinstance(node, (Var, Const, CConst)):
        return ()
    if isinstance(node, Complement):
        return (node.arg,)
    if isinstance(node, (Meet, Join, And, Or, Implies)):
        return (node.left, node.right)
    if isinstance(node, (Atom, PredAtom)):
        return (node.left, node.right)
    if isinstance(node, Not):
        return (node.arg,)
    if isinstance(node, (ForAll, Exists)):
        return (node.body,)
    raise TypeError(f"not a formula node: {node!r}")


def rebuild(node: Node, kids: Sequence[Node]) -> Node:
    """Copy ``node`` with new children; returns ``node`` itself when unchanged."""
    old = children(node)
    if all(a is b for a, b in zip(old, kids)) and len(old) == len(kids):
        return node
    if isinstance(node, Complement):
        return Complement(kids[0])
    if isinstance(node, Meet):
        return Meet(kids[0], kids[1])
    if isinstance(node, Join):
        return Join(kids[0], kids[1])
    if isinstance(node, Atom):
        return Atom(kids[0], kids[1], node.rel)
    if isinstance(node, PredAtom):
        return PredAtom(node.name, kids[0], kids[1])
    if isinstance(node, Not):
        return Not(kids[0])
    if isinstance(node, And):
        return And(kids[0], kids[1])
    if isinstance(node, Or):
        return Or(kids[0], kids[1])
    if isinstance(node, Implies):
        return Implies(kids[0], kids[1])
    if isinstance(node, ForAll):
        return ForAll(node.vars, kids[0])
    if isinstance(node, Exists):
        return Exists(node.vars, kids[0])
    raise TypeError(f"cannot rebuild {node!r}")


def fold(
    root: Node,
    leave: Callable,
    enter: Callable | None = None,
    ctx=None,
):
    """Iterative post-order fold.

    ``enter(node, ctx)`` produces the context for the node's children;
    ``leave(node, ctx, child_values)`` produces the node's value, where ``ctx``
    is the node's own (post-enter) context.
    """
    stack: list[tuple[Node, object, bool]] = [(root, ctx, False)]
    values: list[object] = []
    while stack:
        node, c, done = stack.pop()
        if done:
            kids = children(node)
            if kids:
                vals = values[-len(kids):]
                del values[-len(kids):]
            else:
                vals = []
            values.append(leave(node, c, vals))
        else:
            cc = enter(node, c) if enter is not None else c
            stack.append((node, cc, True))
            for ch in reversed(children(node)):
                stack.append((ch, cc, False))
    return values[0]


def free_vars(node: Node) -> frozenset[VarId]:
    def leave(n, _c, kids):
        if isinstance(n, Var):
            return frozenset((n.vid,))
        merged = frozenset().union(*kids) if kids else frozenset()
        if isinstance(n, (ForAll, Exists)):
            return merged - frozenset(n.vars)
        return merged

    return fold(node, leave)


def term_vars(term: Term) -> frozenset[VarId]:
    return free_vars(term)


def substitute(node: Node, mapping: dict[VarId, Term]) -> Node:
    """Replace free occurrences of the mapped variables by their target terms.

    Keys shadowed by a binder stop applying inside it. If a binder's own
    variables intersect the variables of any still-active target term, the
    substitution is rejected with ``CaptureError`` (conservatively, without
    checking that the key actually occurs in the body).
    """
    if not mapping:
        return node
    target_vars = {k: term_vars(t) for k, t in mapping.items()}

    def enter(n, active):
        if isinstance(n, (ForAll, Exists)) and active:
            bound = set(n.vars)
            reduced = {k: t for k, t in active.items() if k not in bound}
            for k in reduced:
                if target_vars[k] & bound:
                    raise CaptureError(
                        f"substituting {k.text()} would capture a variable bound here"
                    )
            return reduced
        return active

    def leave(n, active, kids):
        if isinstance(n, Var) and active:
            return active.get(n.vid, n)
        return rebuild(n, kids)

    return fold(node, leave, enter, dict(mapping))


def substitute_tuple(
    node: Node,
    mapping: dict,
) -> Node:
    """Substitution keyed by variables or variable tuples.

    Tuple keys map componentwise to equal-width term tuples; plain ``VarId``
    keys map to single terms.
    """
    flat: dict[VarId, Term] = {}
    for key, value in mapping.items():
        if isinstance(key, VarId):
            flat[key] = value
        else:
            if len(key) != len(value):
                raise ValueError(
                    f"tuple width mismatch: {len(key)} variables vs {len(value)} terms"
                )
            for k, t in zip(key, value):
                flat[k] = t
    return substitute(node, flat)


def conj(parts: Sequence[Formula]) -> Formula:
    """Left-associated conjunction of a non-empty sequence."""
    if not parts:
        raise ValueError("empty conjunction")
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Sequence[Formula]) -> Formula:
    if not parts:
        raise ValueError("empty disjunction")
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def var_tuple(kind: str, group: int, width: int) -> tuple[Var, ...]:
    return tuple(Var(VarId(kind, group, bit)) for bit in range(width))


def const_bits(value: int, width: int) -> tuple[int, ...]:
    """``value`` as ``width`` bits, index 0 most significant."""
    if value < 0 or value >= (1 << width):
        raise ValueError(f"{value} does not fit in {width} bits")
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def const_tuple(value: int, width: int) -> tuple[Const, ...]:
    return tuple(Const(b) for b in const_bits(value, width))


def eq_tuple(lhs: Sequence[Term], rhs: Sequence[Term]) -> Formula:
    """Pointwise equality of two equal-width term tuples."""
    if len(lhs) != len(rhs):
        raise ValueError(f"tuple width mismatch: {len(lhs)} vs {len(rhs)}")
    return conj([Atom(a, b) for a, b in zip(lhs, rhs)])


def xor_term(x: Term, y: Term) -> Term:
    """Symmetric difference, spelled out with meet, join and complement."""
    return Join(Meet(x, Complement(y)), Meet(Complement(x), y))


def meet_chain(parts: Sequence[Term]) -> Term:
    if not parts:
        raise ValueError("empty meet")
    out = parts[0]
    for p in parts[1:]:
        out = Meet(out, p)
    return out


def shifted_tuple(terms: Sequence[Term], delta: int) -> tuple[Term, ...]:
    """Tuple increment or decrement as componentwise terms.

    For ``delta=+1`` bit j flips exactly when all lower bits are 1; for
    ``delta=-1`` when all lower bits are 0. Wrap-around is deliberate in both
    directions: incrementing all-ones and decrementing all-zeros both flip
    every bit.
    """
    if delta not in (1, -1):
        raise ValueError("delta must be +1 or -1")
    width = len(terms)
    out: list[Term] = []
    for j in range(width - 1):
        tail = terms[j + 1:]
        if delta == -1:
            tail = [Complement(t) for t in tail]
        out.append(xor_term(terms[j], meet_chain(tail)))
    out.append(xor_term(terms[-1], Const(1)))
    return tuple(out)


def lex_less(lhs: Sequence[Term], rhs: Sequence[Term]) -> Formula:
    """Strict lexicographic order on equal-width tuples, most significant first."""
    if len(lhs) != len(rhs) or not lhs:
        raise ValueError("lex_less needs two non-empty equal-width tuples")

    def lt(x: Term, y: Term) -> Formula:
        return And(Atom(x, Const(0)), Atom(y, Const(1)))

    core = lt(lhs[-1], rhs[-1])
    for i in reversed(range(len(lhs) - 1)):
        core = Or(lt(lhs[i], rhs[i]), And(Atom(lhs[i], rhs[i]), core))
    return core


_PREC_ATOMIC = 5
_PREC_NOT = 4
_PREC_AND = 3
_PREC_OR = 2
_PREC_IMPLIES = 1

_TERM_ATOMIC = 4
_TERM_COMP = 3
_TERM_MEET = 2
_TERM_JOIN = 1

_REL_TEXT = {EQ: "≈", SIM: "∼"}


def _digits(n: int) -> int:
    return len(str(n))


def _render_value(node: Node, kids: list, as_len: bool, with_idx: bool):
    """Shared renderer: returns (payload, precedence) with payload str or int."""

    def wrap(payload, need: bool):
        if not need:
            return payload
        return payload + 2 if as_len else f"({payload})"

    def lit(text: str):
        return len(text) if as_len else text

    def cat(*parts):
        if as_len:
            return sum(parts)
        return "".join(parts)

    if isinstance(node, Var):
        if as_len:
            return (1 if not with_idx else 1 + _digits(node.vid.group) + 1 + _digits(node.vid.bit)), _TERM_ATOMIC
        return node.vid.text(), _TERM_ATOMIC
    if isinstance(node, Const):
        return lit(str(node.bit)), _TERM_ATOMIC
    if isinstance(node, CConst):
        return lit(f"c{node.bit}"), _TERM_ATOMIC
    if isinstance(node, Complement):
        payload, prec = kids[0]
        return cat(lit("C"), wrap(payload, prec < _TERM_ATOMIC)), _TERM_COMP
    if isinstance(node, Meet):
        (lp, lprec), (rp, rprec) = kids
        return (
            cat(wrap(lp, lprec < _TERM_MEET), lit("∩"), wrap(rp, rprec <= _TERM_MEET)),
            _TERM_MEET,
        )
    if isinstance(node, Join):
        (lp, lprec), (rp, rprec) = kids
        return (
            cat(wrap(lp, lprec < _TERM_JOIN), lit("∪"), wrap(rp, rprec <= _TERM_JOIN)),
            _TERM_JOIN,
        )
    if isinstance(node, Atom):
        (lp, _), (rp, _) = kids
        return cat(lp, lit(_REL_TEXT[node.rel]), rp), _PREC_ATOMIC
    if isinstance(node, PredAtom):
        (lp, _), (rp, _) = kids
        return cat(lit(node.name), lit("("), lp, lit(","), rp, lit(")")), _PREC_ATOMIC
    if isinstance(node, Not):
        payload, prec = kids[0]
        return cat(lit("¬"), wrap(payload, prec < _PREC_NOT)), _PREC_NOT
    if isinstance(node, And):
        (lp, lprec), (rp, rprec) = kids
        return (
            cat(wrap(lp, lprec < _PREC_AND), lit("∧"), wrap(rp, rprec <= _PREC_AND)),
            _PREC_AND,
        )
    if isinstance(node, Or):
        (lp, lprec), (rp, rprec) = kids
        return (
            cat(wrap(lp, lprec < _PREC_OR), lit("∨"), wrap(rp, rprec <= _PREC_OR)),
            _PREC_OR,
        )
    if isinstance(node, Implies):
        (lp, lprec), (rp, rprec) = kids
        return (
            cat(wrap(lp, lprec <= _PREC_IMPLIES), lit("→"), rp),
            _PREC_IMPLIES,
        )
    if isinstance(node, (ForAll, Exists)):
        sym = "∀" if isinstance(node, ForAll) else "∃"
        payload, _prec = kids[0]
        if as_len:
            head = 0
            for v in node.vars:
                head += 1 + (1 if not with_idx else 1 + _digits(v.group) + 1 + _digits(v.bit))
            return head + payload + 2, _PREC_ATOMIC
        head_s = "".join(sym + v.text() for v in node.vars)
        return head_s + "(" + payload + ")", _PREC_ATOMIC
    raise TypeError(f"cannot render {node!r}")


def render_natural(node: Node) -> str:
    """Deterministic display form with minimal parenthesization.

    Meet binds tighter than join, conjunction tighter than disjunction, and
    the conditional is loosest; complement and negation are prefix operators
    with compound operands parenthesized; quantifier bodies are always
    parenthesized. Chains associate to the left, conditionals to the right.
    """
    payload, _ = fold(node, lambda n, _c, kids: _render_value(n, kids, False, True))
    return payload


def length_natural(node: Node, with_indices: bool = True) -> int:
    """Symbol count of the display form.

    Every operator, parenthesis, constant and digit counts 1; a variable
    counts its kind letter plus, when ``with_indices`` is set, one symbol per
    index digit and one for the comma. Relational constants count 2 either
    way.
    """
    payload, _ = fold(
        node, lambda n, _c, kids: _render_value(n, kids, True, with_indices)
    )
    return payload


def boolean_occurrences(node: Node) -> int:
    """Occurrences of algebra symbols: 0, 1, meet, join, complement, equality."""

    def leave(n, _c, kids):
        own = 1 if isinstance(n, (Const, Meet, Join, Complement)) else 0
        if isinstance(n, Atom) and n.rel == EQ:
            own = 1
        return own + sum(kids)

    return fold(node, leave)


def signature_features(node: Node) -> dict[str, bool]:
    """Which signature symbols occur anywhere in the formula."""

    feats = {"eq": False, "sim": False, "bool_term": False, "c0": False, "c1": False, "pred": False}

    def leave(n, _c, _kids):
        if isinstance(n, Atom):
            feats["eq" if n.rel == EQ else "sim"] = True
        elif isinstance(n, PredAtom):
            feats["pred"] = True
        elif isinstance(n, (Const, Meet, Join, Complement)):
            feats["bool_term"] = True
        elif isinstance(n, CConst):
            feats["c0" if n.bit == 0 else "c1"] = True
        return None

    fold(node, leave)
    return feats


_VAR_RE = re.compile(r"^([a-z])(\d+),(\d+)$")

_BINARY_OPS = {
    "meet": Meet,
    "join": Join,
    "and": And,
    "or": Or,
    "implies": Implies,
}


def _sig_line(node: Node) -> str:
    feats = signature_features(node)
    boolean = feats["eq"] or feats["bool_term"]
    relational = feats["sim"] or feats["c0"] or feats["c1"] or feats["pred"]
    if boolean and relational:
        raise ValueError("formula mixes algebra and relational signatures")
    if relational:
        extras = [name for name in ("c0", "c1") if feats[name]]
        if feats["pred"]:
            extras.append("N")
        return "(signature relational" + "".join(" " + e for e in extras) + ")"
    return "(signature boolean)"


def serialize(node: Formula) -> str:
    """Two-line text form: a signature header, then a prefix expression."""

    def leave(n, _c, kids):
        if isinstance(n, Var):
            return n.vid.text()
        if isinstance(n, Const):
            return str(n.bit)
        if isinstance(n, CConst):
            return f"c{n.bit}"
        if isinstance(n, Complement):
            return f"(comp {kids[0]})"
        if isinstance(n, Meet):
            return f"(meet {kids[0]} {kids[1]})"
        if isinstance(n, Join):
            return f"(join {kids[0]} {kids[1]})"
        if isinstance(n, Atom):
            op = "eq" if n.rel == EQ else "sim"
            return f"({op} {kids[0]} {kids[1]})"
        if isinstance(n, PredAtom):
            return f"(pred {n.name} {kids[0]} {kids[1]})"
        if isinstance(n, Not):
            return f"(not {kids[0]})"
        if isinstance(n, (And, Or, Implies)):
            op = {And: "and", Or: "or", Implies: "implies"}[type(n)]
            return f"({op} {kids[0]} {kids[1]})"
        if isinstance(n, (ForAll, Exists)):
            op = "forall" if isinstance(n, ForAll) else "exists"
            head = " ".join(v.text() for v in n.vars)
            return f"({op} ({head}) {kids[0]})"
        raise TypeError(f"cannot serialize {n!r}")

    return _sig_line(node) + "\n" + fold(node, leave) + "\n"


def _coerce_term(item) -> Term:
    if isinstance(item, VarId):
        return Var(item)
    if isinstance(item, Term):
        return item
    raise ParseError(f"expected a term, got {item!r}")


def _coerce_formula(item) -> Formula:
    if isinstance(item, Formula):
        return item
    raise ParseError(f"expected a formula, got {item!r}")


def _reduce_group(items: list) -> object:
    if not items:
        raise ParseError("empty group")
    head = items[0]
    if isinstance(head, str):
        if head in ("meet", "join"):
            if len(items) != 3:
                raise ParseError(f"{head} takes two arguments")
            return _BINARY_OPS[head](_coerce_term(items[1]), _coerce_term(items[2]))
        if head in ("and", "or", "implies"):
            if len(items) != 3:
                raise ParseError(f"{head} takes two arguments")
            return _BINARY_OPS[head](_coerce_formula(items[1]), _coerce_formula(items[2]))
        if head == "comp":
            if len(items) != 2:
                raise ParseError("comp takes one argument")
            return Complement(_coerce_term(items[1]))
        if head in ("eq", "sim"):
            if len(items) != 3:
                raise ParseError(f"{head} takes two arguments")
            return Atom(_coerce_term(items[1]), _coerce_term(items[2]), EQ if head == "eq" else SIM)
        if head == "pred":
            if len(items) != 4 or not isinstance(items[1], str):
                raise ParseError("pred takes a name and two terms")
            return PredAtom(items[1], _coerce_term(items[2]), _coerce_term(items[3]))
        if head == "not":
            if len(items) != 2:
                raise ParseError("not takes one argument")
            return Not(_coerce_formula(items[1]))
        if head in ("forall", "exists"):
            if len(items) != 3 or not isinstance(items[1], tuple):
                raise ParseError(f"{head} takes a variable list and a body")
            cls = ForAll if head == "forall" else Exists
            return cls(items[1], _coerce_formula(items[2]))
        raise ParseError(f"unknown operator {head!r}")
    if all(isinstance(x, VarId) for x in items):
        return tuple(items)
    raise ParseError(f"cannot interpret group starting with {head!r}")


def _parse_body(tokens: list[str]) -> Formula:
    stack: list[list] = []
    top: list = []
    for tok in tokens:
        if tok == "(":
            stack.append(top)
            top = []
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'")
            value = _reduce_group(top)
            top = stack.pop()
            top.append(value)
        else:
            m = _VAR_RE.match(tok)
            if m:
                top.append(VarId(m.group(1), int(m.group(2)), int(m.group(3))))
            elif tok in ("0", "1"):
                top.append(Const(int(tok)))
            elif tok in ("c0", "c1"):
                top.append(CConst(int(tok[1])))
            else:
                top.append(tok)
    if stack:
        raise ParseError("unbalanced '('")
    if len(top) != 1:
        raise ParseError("expected exactly one formula")
    return _coerce_formula(top[0] if not isinstance(top[0], VarId) else Var(top[0]))


def parse_formula(text: str) -> Formula:
    """Parse the two-line text form and check it against its signature header."""
    tokens = re.findall(r"[()]|[^\s()]+", text)
    if len(tokens) < 3 or tokens[0] != "(" or tokens[1] != "signature":
        raise ParseError("missing signature header")
    depth = 1
    idx = 2
    header: list[str] = []
    while idx < len(tokens) and depth:
        if tokens[idx] == "(":
            depth += 1
        elif tokens[idx] == ")":
            depth -= 1
        else:
            header.append(tokens[idx])
        idx += 1
    if depth or not header:
        raise ParseError("malformed signature header")
    kind = header[0]
    extras = set(header[1:])
    if kind not in ("boolean", "relational"):
        raise ParseError(f"unknown signature {kind!r}")
    formula = _parse_body(tokens[idx:])
    feats = signature_features(formula)
    if kind == "boolean":
        bad = [k for k in ("sim", "c0", "c1", "pred") if feats[k]]
        if bad:
            raise ParseError(f"boolean signature does not declare: {', '.join(bad)}")
    else:
        if feats["eq"] or feats["bool_term"]:
            raise ParseError("relational signature does not declare algebra symbols")
        for name in ("c0", "c1"):
            if feats[name] and name not in extras:
                raise ParseError(f"undeclared constant {name}")
        if feats["pred"] and "N" not in extras:
            raise ParseError("undeclared predicate")
    return formula
