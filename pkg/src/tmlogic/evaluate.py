"""Deciding closed sentences over the two-element algebra.

Four strategies, ordered by cleverness:

* ``naive`` enumerates every assignment of every quantifier and evaluates
  every connective operand; no short-circuiting anywhere. It is the oracle
  the others are checked against.
* ``shortcircuit`` adds connective short-circuiting and unit pinning:
  quantified variables forced by premise or conjunct equalities are
  substituted through instead of branched.
* ``guarded`` adds the structural rewrites that exploit how the encoder's
  sentences are shaped: splitting universals over disjunctive guards,
  distributing universals over conjunctions, hoisting existential conjuncts
  out of implication premises (with fresh renaming), merging and flattening
  quantifier blocks, and brute expansion of small quantifiers with
  contradiction detection across the expanded conjunction.
* ``qbfsearch`` hands the sentence to the prenex/CNF search in ``qbf``.

Evaluation under a strategy either returns a bool or raises
``BudgetExceeded``; a budget overrun is never reported as false.

``eval_relational`` interprets translated sentences in an explicit finite
structure carrying an equivalence relation, optional named constants and an
optional defining formula for a binary predicate.
"""

from __future__ import annotations

import sys
import time
from itertools import count, product

from .formulas import (
    And,
    Atom,
    CConst,
    Complement,
    Const,
    EQ,
    Exists,
    ForAll,
    Formula,
    Implies,
    Join,
    Meet,
    Not,
    Or,
    PredAtom,
    SIM,
    Term,
    Var,
    VarId,
    children,
    conj,
    disj,
    fold,
    free_vars,
    substitute,
)

STRATEGIES = ("naive", "shortcircuit", "guarded", "qbfsearch")


class EvalError(ValueError):
    """The formula cannot be evaluated in the requested setting."""


class BudgetExceeded(RuntimeError):
    """The node or wall-clock budget ran out before a verdict."""


class _Budget:
    __slots__ = ("deadline", "limit", "spent")

    def __init__(self, budget_ms: float | None, node_limit: int | None):
        self.deadline = None if budget_ms is None else time.monotonic() + budget_ms / 1000.0
        self.limit = node_limit
        self.spent = 0

    def tick(self, n: int = 1) -> None:
        self.spent += n
        if self.limit is not None and self.spent > self.limit:
            raise BudgetExceeded(f"node budget of {self.limit} exhausted")
        if self.deadline is not None and self.spent % 2048 < n:
            if time.monotonic() > self.deadline:
                raise BudgetExceeded("wall-clock budget exhausted")


class _Opts:
    __slots__ = ("budget", "pinning", "guarded", "expand_max", "expand_size_cap", "fresh")

    def __init__(self, budget: _Budget, pinning: bool, guarded: bool, fresh):
        self.budget = budget
        self.pinning = pinning
        self.guarded = guarded
        self.expand_max = 4
        self.expand_size_cap = 4000
        self.fresh = fresh


def _mask_env(env: dict, vars_: tuple[VarId, ...]) -> dict:
    if env and any(v in env for v in vars_):
        return {k: b for k, b in env.items() if k not in vars_}
    return env


def _sterm(t: Term, env: dict, o: _Opts) -> Term:
    o.budget.tick()
    if isinstance(t, Var):
        if env:
            bit = env.get(t.vid)
            if bit is not None:
                return Const(bit)
        return t
    if isinstance(t, Const):
        return t
    if isinstance(t, Complement):
        a = _sterm(t.arg, env, o)
        if isinstance(a, Const):
            return Const(1 - a.bit)
        return t if a is t.arg else Complement(a)
    if isinstance(t, Meet):
        a = _sterm(t.left, env, o)
        if isinstance(a, Const) and a.bit == 0:
            return a
        b = _sterm(t.right, env, o)
        if isinstance(b, Const):
            return a if b.bit == 1 else b
        if isinstance(a, Const):
            return b
        return t if a is t.left and b is t.right else Meet(a, b)
    if isinstance(t, Join):
        a = _sterm(t.left, env, o)
        if isinstance(a, Const) and a.bit == 1:
            return a
        b = _sterm(t.right, env, o)
        if isinstance(b, Const):
            return a if b.bit == 0 else b
        if isinstance(a, Const):
            return b
        return t if a is t.left and b is t.right else Join(a, b)
    if isinstance(t, CConst):
        raise EvalError("relational constant in an algebra sentence")
    raise EvalError(f"cannot evaluate term {t!r}")


def _simp(f: Formula, env: dict, o: _Opts):
    """Simplify under a partial assignment; returns a formula or a bool."""
    o.budget.tick()
    if isinstance(f, Atom):
        if f.rel != EQ:
            raise EvalError("equivalence atom in an algebra sentence")
        left = _sterm(f.left, env, o)
        right = _sterm(f.right, env, o)
        if isinstance(left, Const) and isinstance(right, Const):
            return left.bit == right.bit
        if isinstance(left, Var) and isinstance(right, Var) and left.vid == right.vid:
            return True
        return f if left is f.left and right is f.right else Atom(left, right)
    if isinstance(f, PredAtom):
        raise EvalError("predicate atom in an algebra sentence")
    if isinstance(f, Not):
        a = _simp(f.arg, env, o)
        if isinstance(a, bool):
            return not a
        if isinstance(a, Not):
            return a.arg
        return f if a is f.arg else Not(a)
    if isinstance(f, And):
        a = _simp(f.left, env, o)
        if a is False:
            return False
        b = _simp(f.right, env, o)
        if a is True:
            return b
        if b is True:
            return a
        if b is False:
            return False
        return f if a is f.left and b is f.right else And(a, b)
    if isinstance(f, Or):
        a = _simp(f.left, env, o)
        if a is True:
            return True
        b = _simp(f.right, env, o)
        if a is False:
            return b
        if b is False:
            return a
        if b is True:
            return True
        return f if a is f.left and b is f.right else Or(a, b)
    if isinstance(f, Implies):
        a = _simp(f.left, env, o)
        if a is False:
            return True
        b = _simp(f.right, env, o)
        if a is True:
            return b
        if b is True:
            return True
        if b is False:
            return Not(a)
        return f if a is f.left and b is f.right else Implies(a, b)
    if isinstance(f, (ForAll, Exists)):
        return _simp_quant(f, env, o)
    raise EvalError(f"cannot evaluate {f!r}")


def _scan_units(prem: Formula, varset, o: _Opts):
    """Forced equalities along a conjunction spine.

    Returns ``(pins, contradiction)``: constant or outer-variable targets for
    variables in ``varset``, and whether two conjuncts force different
    constants on the same variable (making the conjunction unsatisfiable).
    """
    consts: dict[VarId, int] = {}
    var_targets: dict[VarId, VarId] = {}
    stack = [prem]
    while stack:
        g = stack.pop()
        o.budget.tick()
        if isinstance(g, And):
            stack.append(g.left)
            stack.append(g.right)
            continue
        if isinstance(g, Atom) and g.rel == EQ:
            for a, b in ((g.left, g.right), (g.right, g.left)):
                if isinstance(a, Var):
                    if isinstance(b, Const):
                        prev = consts.get(a.vid)
                        if prev is not None and prev != b.bit:
                            return {}, True
                        consts[a.vid] = b.bit
                        break
                    if (
                        isinstance(b, Var)
                        and a.vid in varset
                        and b.vid not in varset
                        and a.vid not in var_targets
                    ):
                        var_targets[a.vid] = b.vid
                        break
    pins: dict[VarId, Term] = {}
    for vid, bit in consts.items():
        if vid in varset:
            pins[vid] = Const(bit)
    for vid, tgt in var_targets.items():
        if vid not in pins:
            pins[vid] = Var(tgt)
    return pins, False


def _replace_conjunct(node: Formula, target: Formula, repl: Formula) -> Formula:
    if node is target:
        return repl
    if isinstance(node, And):
        left = _replace_conjunct(node.left, target, repl)
        if left is not node.left:
            return And(left, node.right)
        right = _replace_conjunct(node.right, target, repl)
        if right is not node.right:
            return And(node.left, right)
    return node


def _find_exists_conjunct(node: Formula) -> Exists | None:
    stack = [node]
    while stack:
        g = stack.pop()
        if isinstance(g, Exists):
            return g
        if isinstance(g, And):
            stack.append(g.left)
            stack.append(g.right)
    return None


def _hoist(prem: Formula, o: _Opts):
    """Pull one existential conjunct out of a conjunction, renamed fresh."""
    e = _find_exists_conjunct(prem)
    if e is None:
        return None
    mapping: dict[VarId, Term] = {}
    new_vars = []
    for v in e.vars:
        nv = VarId(v.kind, next(o.fresh), v.bit)
        mapping[v] = Var(nv)
        new_vars.append(nv)
    inlined = substitute(e.body, mapping)
    return _replace_conjunct(prem, e, inlined), tuple(new_vars)


def _size_over(f: Formula, cap: int, o: _Opts) -> bool:
    seen = 0
    stack = [f]
    while stack:
        g = stack.pop()
        seen += 1
        if seen > cap:
            return True
        stack.extend(children(g))
    o.budget.tick(seen // 16 + 1)
    return False


def _expand(is_all: bool, vars_: list[VarId], body: Formula, o: _Opts):
    keep = []
    for bits in product((0, 1), repeat=len(vars_)):
        inst = _simp(body, dict(zip(vars_, bits)), o)
        if is_all:
            if inst is False:
                return False
            if inst is not True:
                keep.append(inst)
        else:
            if inst is True:
                return True
            if inst is not False:
                keep.append(inst)
    if not keep:
        return is_all
    combined = conj(keep) if is_all else disj(keep)
    if is_all and len(keep) > 1:
        _, contra = _scan_units(combined, frozenset(), o)
        if contra:
            return False
    return combined


def _simp_quant(q, env: dict, o: _Opts):
    is_all = isinstance(q, ForAll)
    cls = ForAll if is_all else Exists
    vars_ = list(q.vars)
    body = _simp(q.body, _mask_env(env, q.vars), o)
    while True:
        if isinstance(body, bool):
            return body
        while isinstance(body, cls) and not (set(vars_) & set(body.vars)):
            vars_ += list(body.vars)
            body = body.body
        varset = set(vars_)
        if o.pinning:
            pins = None
            if not is_all:
                pins, contra = _scan_units(body, varset, o)
                if contra:
                    return False
            elif isinstance(body, Implies):
                pins, contra = _scan_units(body.left, varset, o)
                if contra:
                    return True
            if pins:
                body = _simp(substitute(body, pins), {}, o)
                vars_ = [v for v in vars_ if v not in pins]
                if not vars_:
                    return body if isinstance(body, bool) else _simp(body, {}, o)
                continue
        if o.guarded:
            if is_all and isinstance(body, And):
                left = _simp_quant(ForAll(tuple(vars_), body.left), {}, o)
                if left is False:
                    return False
                right = _simp_quant(ForAll(tuple(vars_), body.right), {}, o)
                if right is False:
                    return False
                if left is True:
                    return right
                if right is True:
                    return left
                return And(left, right)
            if not is_all and isinstance(body, Or):
                left = _simp_quant(Exists(tuple(vars_), body.left), {}, o)
                if left is True:
                    return True
                right = _simp_quant(Exists(tuple(vars_), body.right), {}, o)
                if right is True:
                    return True
                if left is False:
                    return right
                if right is False:
                    return left
                return Or(left, right)
            if is_all and isinstance(body, Implies) and isinstance(body.left, Or):
                first = _simp_quant(
                    ForAll(tuple(vars_), Implies(body.left.left, body.right)), {}, o
                )
                if first is False:
                    return False
                second = _simp_quant(
                    ForAll(tuple(vars_), Implies(body.left.right, body.right)), {}, o
                )
                if second is False:
                    return False
                if first is True:
                    return second
                if second is True:
                    return first
                return And(first, second)
            if is_all and isinstance(body, Implies):
                hoisted = _hoist(body.left, o)
                if hoisted is not None:
                    prem, extra = hoisted
                    vars_ += list(extra)
                    body = _simp(Implies(prem, body.right), {}, o)
                    continue
            if not is_all:
                hoisted = _hoist(body, o)
                if hoisted is not None:
                    body2, extra = hoisted
                    vars_ += list(extra)
                    body = _simp(body2, {}, o)
                    continue
            if len(vars_) <= o.expand_max and not _size_over(body, o.expand_size_cap, o):
                return _expand(is_all, vars_, body, o)
        break
    return cls(tuple(vars_), body)


def _choose_branch_var(q, o: _Opts) -> VarId:
    """Prefer a variable that some atom compares against a constant."""
    anchored: set[VarId] = set()
    seen_atoms = 0
    stack = [q.body]
    while stack and seen_atoms < 500:
        g = stack.pop()
        if isinstance(g, Atom):
            seen_atoms += 1
            for a, b in ((g.left, g.right), (g.right, g.left)):
                if isinstance(a, Var) and isinstance(b, Const):
                    anchored.add(a.vid)
        elif not isinstance(g, (Var, Const, CConst)):
            stack.extend(children(g))
    o.budget.tick(seen_atoms + 1)
    for v in q.vars:
        if v in anchored:
            return v
    return q.vars[0]


def _branch(g, o: _Opts) -> bool:
    if isinstance(g, bool):
        return g
    o.budget.tick()
    if isinstance(g, Not):
        return not _branch(g.arg, o)
    if isinstance(g, And):
        return _branch(g.left, o) and _branch(g.right, o)
    if isinstance(g, Or):
        return _branch(g.left, o) or _branch(g.right, o)
    if isinstance(g, Implies):
        if not _branch(g.left, o):
            return True
        return _branch(g.right, o)
    if isinstance(g, (Atom, PredAtom)):
        val = _simp(g, {}, o)
        if isinstance(val, bool):
            return val
        raise EvalError("sentence is not closed")
    if isinstance(g, (ForAll, Exists)):
        is_all = isinstance(g, ForAll)
        v = _choose_branch_var(g, o)
        rest = tuple(x for x in g.vars if x != v)
        for bit in (0, 1):
            sub = type(g)(rest, g.body) if rest else g.body
            outcome = _branch(_simp(sub, {v: bit}, o), o)
            if is_all and not outcome:
                return False
            if not is_all and outcome:
                return True
        return is_all
    raise EvalError(f"cannot evaluate {g!r}")


def _term_value(t: Term, env: dict) -> int:
    if isinstance(t, Var):
        try:
            return env[t.vid]
        except KeyError:
            raise EvalError(f"unbound variable {t.vid.text()}") from None
    if isinstance(t, Const):
        return t.bit
    if isinstance(t, Complement):
        return 1 - _term_value(t.arg, env)
    if isinstance(t, Meet):
        return _term_value(t.left, env) & _term_value(t.right, env)
    if isinstance(t, Join):
        return _term_value(t.left, env) | _term_value(t.right, env)
    raise EvalError(f"cannot evaluate term {t!r}")


def _naive(f: Formula, env: dict, budget: _Budget) -> bool:
    budget.tick()
    if isinstance(f, Atom):
        if f.rel != EQ:
            raise EvalError("equivalence atom in an algebra sentence")
        return _term_value(f.left, env) == _term_value(f.right, env)
    if isinstance(f, PredAtom):
        raise EvalError("predicate atom in an algebra sentence")
    if isinstance(f, Not):
        return not _naive(f.arg, env, budget)
    if isinstance(f, And):
        left = _naive(f.left, env, budget)
        right = _naive(f.right, env, budget)
        return left and right
    if isinstance(f, Or):
        left = _naive(f.left, env, budget)
        right = _naive(f.right, env, budget)
        return left or right
    if isinstance(f, Implies):
        left = _naive(f.left, env, budget)
        right = _naive(f.right, env, budget)
        return (not left) or right
    if isinstance(f, (ForAll, Exists)):
        results = []
        for bits in product((0, 1), repeat=len(f.vars)):
            inner = dict(env)
            inner.update(zip(f.vars, bits))
            results.append(_naive(f.body, inner, budget))
        return all(results) if isinstance(f, ForAll) else any(results)
    raise EvalError(f"cannot evaluate {f!r}")


def _max_group(f: Formula) -> int:
    best = 0

    def leave(n, _c, _kids):
        nonlocal best
        if isinstance(n, Var):
            best = max(best, n.vid.group)
        elif isinstance(n, (ForAll, Exists)):
            for v in n.vars:
                best = max(best, v.group)
        return None

    fold(f, leave)
    return best


def eval_sentence(
    f: Formula,
    strategy: str = "guarded",
    budget_ms: float | None = None,
    node_limit: int | None = None,
) -> bool:
    """Decide a closed algebra sentence.

    Raises ``EvalError`` for open or ill-signed input and ``BudgetExceeded``
    when a limit runs out; a verdict is never fabricated from an overrun.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if free_vars(f):
        missing = sorted(v.text() for v in free_vars(f))
        raise EvalError(f"sentence is not closed: free {', '.join(missing)}")
    if strategy == "qbfsearch":
        from .qbf import solve_formula

        return solve_formula(f, budget_ms=budget_ms, node_limit=node_limit)
    budget = _Budget(budget_ms, node_limit)
    if sys.getrecursionlimit() < 20000:
        sys.setrecursionlimit(20000)
    if strategy == "naive":
        return _naive(f, {}, budget)
    o = _Opts(
        budget,
        pinning=True,
        guarded=(strategy == "guarded"),
        fresh=count(_max_group(f) + 1),
    )
    return _branch(_simp(f, {}, o), o)


def eval_relational(formula: Formula, model, env: dict | None = None) -> bool:
    """Evaluate a relational sentence in an explicit finite structure.

    ``model`` provides the domain size, the equivalence classes, optional
    elements for the named constants and an optional defining formula for the
    binary predicate; see ``translate.EqStructure``. When the predicate is
    applied, its defining formula's two free variables are bound to the
    argument values in sorted variable order.
    """
    env = dict(env or {})

    def tval(t: Term, scope: dict) -> int:
        if isinstance(t, Var):
            try:
                return scope[t.vid]
            except KeyError:
                raise EvalError(f"unbound variable {t.vid.text()}") from None
        if isinstance(t, CConst):
            element = model.constant(t.bit)
            if element is None:
                raise EvalError(f"structure does not interpret c{t.bit}")
            return element
        raise EvalError("algebra term in a relational sentence")

    def ev(f: Formula, scope: dict) -> bool:
        if isinstance(f, Atom):
            if f.rel != SIM:
                raise EvalError("algebra equality in a relational sentence")
            return model.same_class(tval(f.left, scope), tval(f.right, scope))
        if isinstance(f, PredAtom):
            if model.n_formula is None:
                raise EvalError("structure does not interpret the predicate")
            first, second = model.n_free_pair()
            inner = {first: tval(f.left, scope), second: tval(f.right, scope)}
            return ev(model.n_formula, inner)
        if isinstance(f, Not):
            return not ev(f.arg, scope)
        if isinstance(f, And):
            return ev(f.left, scope) and ev(f.right, scope)
        if isinstance(f, Or):
            return ev(f.left, scope) or ev(f.right, scope)
        if isinstance(f, Implies):
            return (not ev(f.left, scope)) or ev(f.right, scope)
        if isinstance(f, (ForAll, Exists)):
            is_all = isinstance(f, ForAll)
            for values in product(range(model.size), repeat=len(f.vars)):
                inner = dict(scope)
                inner.update(zip(f.vars, values))
                result = ev(f.body, inner)
                if is_all and not result:
                    return False
                if not is_all and result:
                    return True
            return is_all
        raise EvalError(f"cannot evaluate {f!r}")

    return ev(formula, env)
