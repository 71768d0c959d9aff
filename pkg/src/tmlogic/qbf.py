"""Propositional search behind the formula evaluator's last strategy.

A closed algebra sentence becomes a prenex CNF game: quantifiers are pulled
out in source order with fresh numbering (negation flips them on the way
out), terms and connectives become definition gates, and a small search
procedure plays the game by branching strictly in prefix order with
existential units forced. Writers for the two interchange formats live here
as well, one prenex (QDIMACS, with a parser for round-trips) and one that
keeps the quantifier tree as it stands (QCIR-G14, export only).
"""

from __future__ import annotations

import sys

from .evaluate import BudgetExceeded, EvalError, _Budget
from .formulas import (
    EQ,
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
    Var,
    VarId,
    fold,
    rebuild,
)

__all__ = [
    "solve_formula",
    "solve_qdimacs",
    "to_qdimacs",
    "parse_qdimacs",
    "to_qcir",
    "BudgetExceeded",
]


class _Names:
    __slots__ = ("last",)

    def __init__(self):
        self.last = 0

    def fresh(self) -> int:
        self.last += 1
        return self.last


def _strip_implies(formula: Formula) -> Formula:
    def leave(n, _c, kids):
        if isinstance(n, Implies):
            return Or(Not(kids[0]), kids[1])
        return rebuild(n, kids)

    return fold(formula, leave)


def _prenex(formula: Formula, names: _Names):
    """Prefix in source order, matrix with negations left in place.

    Every binder gets a fresh number; a quantifier under an odd number of
    negations contributes the dual kind. The matrix refers to variables by
    their number only.
    """

    def enter(n, ctx):
        pol, env = ctx
        if isinstance(n, Not):
            return (-pol, env)
        if isinstance(n, (ForAll, Exists)):
            env = dict(env)
            for vid in n.vars:
                env[vid] = names.fresh()
            return (pol, env)
        return ctx

    def leave(n, ctx, kids):
        pol, env = ctx
        if isinstance(n, Var):
            num = env.get(n.vid)
            if num is None:
                raise EvalError(f"sentence is not closed: free {n.vid.text()}")
            return Var(VarId("v", num, 0))
        if isinstance(n, Const):
            return n
        if isinstance(n, CConst):
            raise EvalError("relational constant in a propositional search")
        if isinstance(n, PredAtom):
            raise EvalError("predicate atom in a propositional search")
        if isinstance(n, (Complement, Meet, Join)):
            return rebuild(n, kids)
        if isinstance(n, Atom):
            if n.rel != EQ:
                raise EvalError("equivalence atom in a propositional search")
            return ([], Atom(kids[0], kids[1], EQ))
        if isinstance(n, Not):
            prefix, matrix = kids[0]
            return (prefix, Not(matrix))
        if isinstance(n, (And, Or)):
            (pl, ml), (pr, mr) = kids
            return (pl + pr, type(n)(ml, mr))
        if isinstance(n, (ForAll, Exists)):
            prefix, matrix = kids[0]
            kind = "a" if isinstance(n, ForAll) == (pol == 1) else "e"
            return ([(kind, env[vid]) for vid in n.vars] + prefix, matrix)
        raise EvalError(f"cannot search {n!r}")

    return fold(formula, leave, enter, (1, {}))


def _tseitin(matrix: Formula, names: _Names):
    """Definition gates for a quantifier-free matrix.

    Returns ``(clauses, root)`` where ``root`` is a literal, or a plain bool
    when constant folding decides the whole matrix.
    """
    clauses: list[list[int]] = []

    def neg(x):
        return (not x) if isinstance(x, bool) else -x

    def gate_and(a, b):
        if a is False or b is False:
            return False
        if a is True:
            return b
        if b is True:
            return a
        g = names.fresh()
        clauses.extend(([-g, a], [-g, b], [g, -a, -b]))
        return g

    def gate_or(a, b):
        if a is True or b is True:
            return True
        if a is False:
            return b
        if b is False:
            return a
        g = names.fresh()
        clauses.extend(([-g, a, b], [g, -a], [g, -b]))
        return g

    def gate_xnor(a, b):
        if isinstance(a, bool) and isinstance(b, bool):
            return a == b
        if isinstance(a, bool):
            return b if a else neg(b)
        if isinstance(b, bool):
            return a if b else neg(a)
        g = names.fresh()
        clauses.extend(([-g, -a, b], [-g, a, -b], [g, a, b], [g, -a, -b]))
        return g

    def leave(n, _c, kids):
        if isinstance(n, Var):
            return n.vid.group
        if isinstance(n, Const):
            return n.bit == 1
        if isinstance(n, (Complement, Not)):
            return neg(kids[0])
        if isinstance(n, (Meet, And)):
            return gate_and(kids[0], kids[1])
        if isinstance(n, (Join, Or)):
            return gate_or(kids[0], kids[1])
        if isinstance(n, Atom):
            return gate_xnor(kids[0], kids[1])
        raise EvalError(f"cannot encode {n!r}")

    return clauses, fold(matrix, leave)


def _compile(formula: Formula):
    """Formula to ``(nvars, blocks, clauses)``, or a bool when it folds away.

    Blocks are ``(kind, numbers)`` pairs with adjacent same-kind binders
    merged; the definition gates sit in a final existential block.
    """
    names = _Names()
    prefix, matrix = _prenex(_strip_implies(formula), names)
    clauses, root = _tseitin(matrix, names)
    if isinstance(root, bool):
        return root
    clauses = clauses + [[root]]
    blocks: list[tuple[str, list[int]]] = []
    for kind, num in prefix:
        if blocks and blocks[-1][0] == kind:
            blocks[-1][1].append(num)
        else:
            blocks.append((kind, [num]))
    gates = list(range(len(prefix) + 1, names.last + 1))
    if gates:
        if blocks and blocks[-1][0] == "e":
            blocks[-1][1].extend(gates)
        else:
            blocks.append(("e", gates))
    return names.last, blocks, clauses


class _Search:
    """Prefix-order game search on prenex CNF.

    Branches strictly in prefix order. An unsatisfied clause with no
    unassigned existential literal is a conflict (the opposing player owns
    everything left in it); one with a lone existential literal and nothing
    else forces that literal. Trail-based undo keeps the clause counters
    exact across backtracking.
    """

    def __init__(self, nvars: int, blocks, clauses, budget: _Budget):
        self.budget = budget
        self.quant = ["e"] * (nvars + 1)
        self.order: list[int] = []
        for kind, nums in blocks:
            for num in nums:
                self.quant[num] = kind
                self.order.append(num)
        self.clauses: list[list[int]] = []
        for raw in clauses:
            distinct = set(raw)
            if any(-l in distinct for l in distinct):
                continue
            self.clauses.append(sorted(distinct, key=abs))
        nc = len(self.clauses)
        self.assign = [0] * (nvars + 1)
        self.occ: list[list[tuple[int, int]]] = [[] for _ in range(nvars + 1)]
        self.sat = [0] * nc
        self.un_e = [0] * nc
        self.un_a = [0] * nc
        for ci, lits in enumerate(self.clauses):
            for l in lits:
                v = abs(l)
                self.occ[v].append((ci, 1 if l > 0 else -1))
                if self.quant[v] == "e":
                    self.un_e[ci] += 1
                else:
                    self.un_a[ci] += 1
        self.zero_sat = nc
        self.trail: list[int] = []
        self.units: list[int] = []

    def _set(self, v: int, val: bool) -> bool:
        self.budget.tick(1)
        self.assign[v] = 1 if val else -1
        self.trail.append(v)
        existential = self.quant[v] == "e"
        ok = True
        for ci, sign in self.occ[v]:
            if existential:
                self.un_e[ci] -= 1
            else:
                self.un_a[ci] -= 1
            if (sign == 1) == val:
                self.sat[ci] += 1
                if self.sat[ci] == 1:
                    self.zero_sat -= 1
            elif self.sat[ci] == 0:
                if self.un_e[ci] == 0:
                    ok = False
                elif self.un_e[ci] == 1 and self.un_a[ci] == 0:
                    self.units.append(ci)
        return ok

    def _undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            v = self.trail.pop()
            val = self.assign[v] > 0
            existential = self.quant[v] == "e"
            for ci, sign in self.occ[v]:
                if existential:
                    self.un_e[ci] += 1
                else:
                    self.un_a[ci] += 1
                if (sign == 1) == val:
                    self.sat[ci] -= 1
                    if self.sat[ci] == 0:
                        self.zero_sat += 1
            self.assign[v] = 0

    def _propagate(self) -> bool:
        while self.units:
            ci = self.units.pop()
            if self.sat[ci] > 0:
                continue
            if self.un_e[ci] == 0:
                return False
            if self.un_e[ci] != 1 or self.un_a[ci] != 0:
                continue
            lit = next(l for l in self.clauses[ci] if self.assign[abs(l)] == 0)
            if not self._set(abs(lit), lit > 0):
                return False
        return True

    def _branch(self, v: int, val: bool, pos: int) -> bool:
        mark = len(self.trail)
        self.units.clear()
        ok = self._set(v, val) and self._propagate()
        result = ok and self._rec(pos)
        self._undo(mark)
        self.units.clear()
        return result

    def _rec(self, pos: int) -> bool:
        self.budget.tick(1)
        if self.zero_sat == 0:
            return True
        while pos < len(self.order) and self.assign[self.order[pos]]:
            pos += 1
        if pos == len(self.order):
            return self.zero_sat == 0
        v = self.order[pos]
        if self.quant[v] == "e":
            return self._branch(v, True, pos + 1) or self._branch(v, False, pos + 1)
        return self._branch(v, True, pos + 1) and self._branch(v, False, pos + 1)

    def solve(self) -> bool:
        for ci in range(len(self.clauses)):
            if self.un_e[ci] == 0:
                return False
            if self.un_e[ci] == 1 and self.un_a[ci] == 0:
                self.units.append(ci)
        if not self._propagate():
            return False
        return self._rec(0)


def _solve_compiled(compiled, budget_ms, node_limit) -> bool:
    if isinstance(compiled, bool):
        return compiled
    nvars, blocks, clauses = compiled
    depth = sum(len(nums) for _kind, nums in blocks) + 100
    if sys.getrecursionlimit() < 4 * depth:
        sys.setrecursionlimit(4 * depth)
    search = _Search(nvars, blocks, clauses, _Budget(budget_ms, node_limit))
    return search.solve()


def solve_formula(
    formula: Formula,
    budget_ms: int | None = None,
    node_limit: int | None = None,
) -> bool:
    """Decide a closed algebra sentence through the prenex CNF game."""
    return _solve_compiled(_compile(formula), budget_ms, node_limit)


def to_qdimacs(formula: Formula) -> str:
    """Prenex CNF text form. Adjacent same-kind blocks are merged."""
    compiled = _compile(formula)
    if compiled is True:
        return "p cnf 0 0\n"
    if compiled is False:
        return "p cnf 0 1\n0\n"
    nvars, blocks, clauses = compiled
    lines = [f"p cnf {nvars} {len(clauses)}"]
    for kind, nums in blocks:
        lines.append(f"{kind} {' '.join(map(str, nums))} 0")
    for lits in clauses:
        lines.append(f"{' '.join(map(str, lits))} 0")
    return "\n".join(lines) + "\n"


def parse_qdimacs(text: str):
    """Inverse of ``to_qdimacs``: returns ``(nvars, blocks, clauses)``."""
    nvars = nclauses = None
    blocks: list[tuple[str, list[int]]] = []
    clauses: list[list[int]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if nvars is not None:
                raise ValueError("duplicate problem line")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"malformed problem line: {line!r}")
            nvars, nclauses = int(parts[2]), int(parts[3])
            continue
        if nvars is None:
            raise ValueError("clause or prefix before the problem line")
        if line[0] in "ae":
            if clauses:
                raise ValueError("prefix line after the first clause")
            nums = [int(tok) for tok in line[1:].split()]
            if not nums or nums[-1] != 0:
                raise ValueError(f"prefix line not 0-terminated: {line!r}")
            blocks.append((line[0], nums[:-1]))
            continue
        lits = [int(tok) for tok in line.split()]
        if not lits or lits[-1] != 0:
            raise ValueError(f"clause not 0-terminated: {line!r}")
        lits = lits[:-1]
        if any(l == 0 or abs(l) > nvars for l in lits):
            raise ValueError(f"literal out of range: {line!r}")
        clauses.append(lits)
    if nvars is None:
        raise ValueError("missing problem line")
    if nclauses != len(clauses):
        raise ValueError(f"expected {nclauses} clauses, found {len(clauses)}")
    seen: set[int] = set()
    for _kind, nums in blocks:
        for n in nums:
            if n in seen:
                raise ValueError(f"variable {n} quantified twice")
            seen.add(n)
    return nvars, blocks, clauses


def solve_qdimacs(
    text: str,
    budget_ms: int | None = None,
    node_limit: int | None = None,
) -> bool:
    """Decide a QDIMACS instance; unquantified variables count as outermost existentials."""
    nvars, blocks, clauses = parse_qdimacs(text)
    if not clauses:
        return True
    quantified = {n for _k, nums in blocks for n in nums}
    loose = [n for n in range(1, nvars + 1) if n not in quantified]
    if loose:
        blocks = [("e", loose)] + blocks
    return _solve_compiled((nvars, blocks, clauses), budget_ms, node_limit)


def to_qcir(formula: Formula) -> str:
    """Non-prenex circuit text form (QCIR-G14), keeping the quantifier tree."""
    names = _Names()
    gates: list[str] = []

    def neg(lit: str) -> str:
        return lit[1:] if lit.startswith("-") else "-" + lit

    def define(op: str, args) -> str:
        g = f"g{names.fresh()}"
        gates.append(f"{g} = {op}({', '.join(args)})")
        return g

    def enter(n, env):
        if isinstance(n, (ForAll, Exists)):
            env = dict(env)
            for vid in n.vars:
                env[vid] = f"v{names.fresh()}"
        return env

    def leave(n, env, kids):
        if isinstance(n, Var):
            name = env.get(n.vid)
            if name is None:
                raise EvalError(f"sentence is not closed: free {n.vid.text()}")
            return name
        if isinstance(n, Const):
            return define("and" if n.bit else "or", [])
        if isinstance(n, CConst):
            raise EvalError("relational constant in a propositional export")
        if isinstance(n, PredAtom):
            raise EvalError("predicate atom in a propositional export")
        if isinstance(n, (Complement, Not)):
            return neg(kids[0])
        if isinstance(n, (Meet, And)):
            return define("and", kids)
        if isinstance(n, (Join, Or)):
            return define("or", kids)
        if isinstance(n, Implies):
            return define("or", [neg(kids[0]), kids[1]])
        if isinstance(n, Atom):
            if n.rel != EQ:
                raise EvalError("equivalence atom in a propositional export")
            left = define("or", [neg(kids[0]), kids[1]])
            right = define("or", [kids[0], neg(kids[1])])
            return define("and", [left, right])
        if isinstance(n, (ForAll, Exists)):
            op = "forall" if isinstance(n, ForAll) else "exists"
            head = ", ".join(env[vid] for vid in n.vars)
            g = f"g{names.fresh()}"
            gates.append(f"{g} = {op}({head}; {kids[0]})")
            return g
        raise EvalError(f"cannot export {n!r}")

    root = fold(formula, leave, enter, {})
    return "\n".join(["#QCIR-G14", f"output({root})"] + gates) + "\n"
