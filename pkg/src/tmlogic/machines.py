"""Deterministic single-tape Turing machines.

The tape is unbounded to the right only; cell 0 always holds the left-end
marker. Instructions take a single operand: either a symbol to write or a
head move. Parsing, normalization (left-edge blocking and completion of
hanging states), idle-run completion, clone reduction, and step-by-step
simulation all live here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

BLANK = 0
START_MARKER = 1
SYM_ZERO = 2
SYM_ONE = 3

MANDATORY_SYMBOLS = ("_", ">", "0", "1")

MOVE_LEFT = "L"
MOVE_RIGHT = "R"

START_STATE = 0
ACCEPT_STATE = 1
REJECT_STATE = 2


class ProgramError(ValueError):
    """Raised for malformed or nondeterministic machine descriptions."""


class MissingInstructionError(RuntimeError):
    """No instruction applies; indicates an incomplete program for a reachable state."""


@dataclass(frozen=True, slots=True)
class Instruction:
    """One rule q_i alpha -> q_j beta, where beta is a symbol id or a move."""

    state_from: int
    read: int
    state_to: int
    action: int | str


@dataclass(frozen=True, slots=True)
class Program:
    """An instruction list together with its symbol table.

    Symbol ids index into ``alphabet``; the first four entries are fixed as
    blank, left-end marker, '0' and '1'.
    """

    instructions: tuple[Instruction, ...]
    alphabet: tuple[str, ...]

    @property
    def max_state(self) -> int:
        best = 0
        for ins in self.instructions:
            if ins.state_from > best:
                best = ins.state_from
            if ins.state_to > best:
                best = ins.state_to
        return best

    def symbol_id(self, char: str) -> int:
        try:
            return self.alphabet.index(char)
        except ValueError:
            raise ProgramError(f"symbol {char!r} not in alphabet") from None


@dataclass(frozen=True, slots=True)
class Configuration:
    """Snapshot after ``step`` steps: explicit tape prefix, head cell, state."""

    tape: tuple[int, ...]
    head: int
    state: int
    step: int


@dataclass(frozen=True, slots=True)
class SimResult:
    """Outcome of a bounded run.

    ``outcome`` is "accepted", "rejected" or "running"; ``halt_step`` is the
    first step at which the accept or reject state was entered, or None.
    """

    outcome: str
    halt_step: int | None
    trace: tuple[Configuration, ...] | None


_LINE_RE = re.compile(
    r"^q(?P<i>\d+)\s+(?P<read>\S)\s*->\s*q(?P<j>\d+)\s+(?P<act>\S)$"
)


def parse_program(text: str) -> Program:
    """Parse a machine description.

    One instruction per line, ``q<i> <sym> -> q<j> <act>`` where ``<sym>`` is
    one of ``_ > 0 1`` or a lowercase letter and ``<act>`` is additionally
    allowed to be ``L`` or ``R``. ``#`` starts a comment; blank lines are
    skipped. Extra symbols enter the alphabet in order of first appearance.
    """
    alphabet = list(MANDATORY_SYMBOLS)

    def sym_id(char: str, lineno: int) -> int:
        if char in alphabet:
            return alphabet.index(char)
        if re.fullmatch(r"[a-z]", char):
            alphabet.append(char)
            return len(alphabet) - 1
        raise ProgramError(f"line {lineno}: unknown symbol {char!r}")

    instructions: list[Instruction] = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE_RE.match(line)
        if m is None:
            raise ProgramError(f"line {lineno}: cannot parse {line!r}")
        i = int(m.group("i"))
        j = int(m.group("j"))
        read = sym_id(m.group("read"), lineno)
        act_text = m.group("act")
        action: int | str
        if act_text in (MOVE_LEFT, MOVE_RIGHT):
            action = act_text
        else:
            action = sym_id(act_text, lineno)
        if read == START_MARKER and isinstance(action, int) and action != START_MARKER:
            raise ProgramError(f"line {lineno}: cannot erase the left-end marker")
        if read != START_MARKER and action == START_MARKER:
            raise ProgramError(f"line {lineno}: cannot write the left-end marker")
        key = (i, read)
        if key in seen:
            raise ProgramError(
                f"line {lineno}: duplicate instruction for state {i}"
                f" reading {alphabet[read]!r} (first at line {seen[key]})"
            )
        seen[key] = lineno
        instructions.append(Instruction(i, read, j, action))
    if not instructions:
        raise ProgramError("empty program")
    return Program(tuple(instructions), tuple(alphabet))


def normalize(program: Program) -> Program:
    """Block left moves at the marker and complete hanging targeted states.

    ``q_i > -> q_k L`` becomes ``q_i > -> q_i >``. Every state j outside
    {start, accept, reject} that is the target of some instruction but lacks a
    rule for some symbol gets the self-loop ``q_j a -> q_j a`` for each
    missing symbol. Idempotent.
    """
    out: list[Instruction] = []
    for ins in program.instructions:
        if ins.read == START_MARKER and ins.action == MOVE_LEFT:
            out.append(Instruction(ins.state_from, START_MARKER, ins.state_from, START_MARKER))
        else:
            out.append(ins)
    targeted = {ins.state_to for ins in out}
    covered: dict[int, set[int]] = {}
    for ins in out:
        covered.setdefault(ins.state_from, set()).add(ins.read)
    special = {START_STATE, ACCEPT_STATE, REJECT_STATE}
    for j in sorted(targeted - special):
        have = covered.get(j, set())
        for sym in range(len(program.alphabet)):
            if sym not in have:
                out.append(Instruction(j, sym, j, sym))
    return Program(tuple(out), program.alphabet)


def add_idle_run(program: Program) -> Program:
    """Give the accept and reject states a self-loop on every symbol.

    Makes halting configurations repeat forever, so a run can be continued to
    any step bound. Skips loops that already exist.
    """
    present = {(ins.state_from, ins.read) for ins in program.instructions}
    extra: list[Instruction] = []
    for state in (ACCEPT_STATE, REJECT_STATE):
        for sym in range(len(program.alphabet)):
            if (state, sym) not in present:
                extra.append(Instruction(state, sym, state, sym))
    return Program(program.instructions + tuple(extra), program.alphabet)


def reduce_clone(program: Program) -> Program:
    """Delete instructions whose source state is never a target, to a fixpoint.

    The start, accept and reject states are kept regardless. The criterion is
    purely syntactic; a cluster of states that target each other survives even
    if nothing reaches it from the start state.
    """
    keep = list(program.instructions)
    special = {START_STATE, ACCEPT_STATE, REJECT_STATE}
    while True:
        targeted = {ins.state_to for ins in keep} | special
        pruned = [ins for ins in keep if ins.state_from in targeted]
        if len(pruned) == len(keep):
            return Program(tuple(pruned), program.alphabet)
        keep = pruned


def _canonical_instructions(program: Program) -> frozenset[tuple]:
    """Instruction set with symbols spelled out, for cross-program comparison."""
    rows = []
    for ins in program.instructions:
        act = ins.action if isinstance(ins.action, str) else program.alphabet[ins.action]
        rows.append((ins.state_from, program.alphabet[ins.read], ins.state_to, act))
    return frozenset(rows)


def monoclonal(p: Program, q: Program) -> bool:
    """True when the two programs have the same reduced instruction set."""
    return _canonical_instructions(reduce_clone(p)) == _canonical_instructions(reduce_clone(q))


def parse_input(program: Program, word: str) -> list[int]:
    """Map an input word to symbol ids; the marker is not allowed in input."""
    if not word:
        raise ProgramError("input word must be non-empty")
    ids = []
    for ch in word:
        if ch == ">":
            raise ProgramError("input word may not contain the left-end marker")
        ids.append(program.symbol_id(ch))
    return ids


def simulate(
    program: Program,
    input_word: str,
    max_steps: int,
    trace: bool = False,
) -> SimResult:
    """Run the machine for exactly ``max_steps`` steps from ``> input``.

    Reports the first entry into the accept or reject state at or before the
    bound; with ``trace`` the full configuration sequence step 0..max_steps is
    returned (halting states must be idle-completed for that to be possible).
    Without ``trace`` the run stops at the first halt.
    """
    table = {(ins.state_from, ins.read): ins for ins in program.instructions}
    tape = [START_MARKER] + parse_input(program, input_word)
    head = 0
    state = START_STATE
    outcome = "running"
    halt_step: int | None = None
    configs: list[Configuration] | None = None
    if trace:
        configs = [Configuration(tuple(tape), head, state, 0)]
    for step in range(1, max_steps + 1):
        key = (state, tape[head])
        ins = table.get(key)
        if ins is None:
            raise MissingInstructionError(
                f"state {state} has no instruction for {program.alphabet[tape[head]]!r}"
            )
        if ins.action == MOVE_RIGHT:
            head += 1
            if head == len(tape):
                tape.append(BLANK)
        elif ins.action == MOVE_LEFT:
            if head == 0:
                raise MissingInstructionError("left move at the marker survived normalization")
            head -= 1
        else:
            tape[head] = ins.action
        state = ins.state_to
        if halt_step is None and state in (ACCEPT_STATE, REJECT_STATE):
            outcome = "accepted" if state == ACCEPT_STATE else "rejected"
            halt_step = step
            if not trace:
                break
        if trace:
            configs.append(Configuration(tuple(tape), head, state, step))
    return SimResult(outcome, halt_step, tuple(configs) if trace else None)


def trace_json(result: SimResult, program: Program) -> list[dict]:
    """Render a traced run as JSON-ready rows with the tape as a string."""
    if result.trace is None:
        raise ValueError("simulate was not asked for a trace")
    rows = []
    for cfg in result.trace:
        rows.append(
            {
                "step": cfg.step,
                "state": cfg.state,
                "head": cfg.head,
                "tape": "".join(program.alphabet[s] for s in cfg.tape),
            }
        )
    return rows


def format_program(program: Program) -> str:
    """Write the instruction list back out in the input syntax."""
    lines = []
    for ins in program.instructions:
        act = ins.action if isinstance(ins.action, str) else program.alphabet[ins.action]
        lines.append(f"q{ins.state_from} {program.alphabet[ins.read]} -> q{ins.state_to} {act}")
    return "\n".join(lines) + "\n"
