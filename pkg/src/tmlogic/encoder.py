"""Compiling bounded machine runs into algebra sentences.

A configuration at step t is described by five bit-vector variable groups:
cell address, state, head address, scanned-symbol code and cell content. The
builders here produce, over those groups, the per-instruction step formulas,
their conjunction for one step, the step-compression tower that reaches 2^m
steps with three variable blocks per level, the configuration and boundary
descriptions, and the closed sentence asserting acceptance within the zone.

Zone geometry: addresses carry m+1 bits for a horizon of T = 2^m steps;
symbol and state codes share a width of r+1 bits, minimal so that the
alphabet and every state index fit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from math import log

from .formulas import (
    And,
    Atom,
    Const,
    Exists,
    ForAll,
    Formula,
    Implies,
    Not,
    Or,
    Term,
    Var,
    VarId,
    conj,
    const_tuple,
    eq_tuple,
    length_natural,
    lex_less,
    shifted_tuple,
    var_tuple,
)
from .machines import (
    BLANK,
    START_MARKER,
    START_STATE,
    Configuration,
    MOVE_LEFT,
    MOVE_RIGHT,
    Program,
    add_idle_run,
    normalize,
    parse_input,
)


class ParamError(ValueError):
    """Instance does not fit the requested zone."""


@dataclass(frozen=True, slots=True)
class EncodingParams:
    """Frozen encoding geometry for one (program, input, zone) instance.

    ``program`` is already normalized and idle-completed. ``zone_exp`` is m,
    ``horizon`` is T = 2^m; addresses use m+1 bits, symbol and state codes
    r+1 bits.
    """

    program: Program
    input_word: str
    input_ids: tuple[int, ...]
    zone_exp: int
    horizon: int
    addr_width: int
    reg_width: int

    @property
    def y_width(self) -> int:
        return 2 * self.addr_width + 3 * self.reg_width


def derive_params(program: Program, input_word: str, zone_exp: int) -> EncodingParams:
    """Normalize and idle-complete the program, then fix the widths.

    Requires 2^(m+1) >= |X| + 2 so that the marker, the input and one
    trailing blank all have addresses; r is minimal with 2^(r+1) >= |A| + U
    where U is the largest state index.
    """
    if zone_exp < 1:
        raise ParamError("zone exponent must be at least 1")
    completed = add_idle_run(normalize(program))
    ids = tuple(parse_input(completed, input_word))
    n = len(ids)
    if (1 << (zone_exp + 1)) < n + 2:
        raise ParamError(
            f"input of length {n} does not fit a zone with exponent {zone_exp}"
        )
    need = len(completed.alphabet) + completed.max_state
    r = 0
    while (1 << (r + 1)) < need:
        r += 1
    return EncodingParams(
        program=completed,
        input_word=input_word,
        input_ids=ids,
        zone_exp=zone_exp,
        horizon=1 << zone_exp,
        addr_width=zone_exp + 1,
        reg_width=r + 1,
    )


class _Slot:
    """The five per-configuration tuples, viewed at a color or a flat block."""

    __slots__ = ("x", "q", "z", "d", "f")

    def __init__(self, x, q, z, d, f):
        self.x, self.q, self.z, self.d, self.f = x, q, z, d, f

    def concat(self) -> tuple[Term, ...]:
        return self.x + self.q + self.z + self.d + self.f


def _slot(params: EncodingParams, spec) -> _Slot:
    aw, rw = params.addr_width, params.reg_width
    if isinstance(spec, int):
        return _Slot(
            var_tuple("x", spec, aw),
            var_tuple("q", spec, rw),
            var_tuple("z", spec, aw),
            var_tuple("d", spec, rw),
            var_tuple("f", spec, rw),
        )
    kind, group = spec
    flat = var_tuple(kind, group, params.y_width)
    x = flat[:aw]
    q = flat[aw:aw + rw]
    z = flat[aw + rw:2 * aw + rw]
    d = flat[2 * aw + rw:2 * aw + 2 * rw]
    f = flat[2 * aw + 2 * rw:]
    return _Slot(x, q, z, d, f)


def config_var_ids(params: EncodingParams, spec) -> tuple[VarId, ...]:
    """The variable names of one configuration tuple, in layout order."""
    return tuple(t.vid for t in _slot(params, spec).concat())


def _addr(params: EncodingParams, value) -> tuple[Term, ...]:
    if isinstance(value, int):
        return const_tuple(value, params.addr_width)
    return tuple(value)


def _reg(params: EncodingParams, value) -> tuple[Term, ...]:
    if isinstance(value, int):
        return const_tuple(value, params.reg_width)
    return tuple(value)


def _clause(slot: _Slot, addr, content) -> Formula:
    return Implies(eq_tuple(slot.x, addr), eq_tuple(slot.f, content))


def _timer(slot: _Slot, code, state, head) -> Formula:
    return And(And(eq_tuple(slot.d, code), eq_tuple(slot.q, state)), eq_tuple(slot.z, head))


def build_clause(params: EncodingParams, t: int, cell, content) -> Formula:
    """Cell description at color t: if the address tuple names ``cell``, the
    content tuple holds ``content``. Integers are spelled as constant tuples."""
    return _clause(_slot(params, t), _addr(params, cell), _reg(params, content))


def build_timer(params: EncodingParams, t: int, scanned, state, head) -> Formula:
    """Head description at color t: scanned-symbol code, state code, head address."""
    return _timer(_slot(params, t), _reg(params, scanned), _reg(params, state), _addr(params, head))


def build_phi_k(params: EncodingParams, k: int, src=0, dst=1) -> Formula:
    """Step formula of instruction k (1-based) between two configuration tuples.

    The address witness, the copy quantifier and the content witnesses use
    auxiliary groups indexed by k, so the formulas of different instructions
    never share bound names.
    """
    ins = params.program.instructions[k - 1]
    s_src = _slot(params, src)
    s_dst = _slot(params, dst)
    u = var_tuple("u", k, params.addr_width)
    if ins.action == MOVE_RIGHT:
        u_after: tuple[Term, ...] = shifted_tuple(u, 1)
    elif ins.action == MOVE_LEFT:
        u_after = shifted_tuple(u, -1)
    else:
        u_after = u
    w = var_tuple("w", k, params.addr_width)
    g = var_tuple("g", k, params.reg_width)
    h = var_tuple("h", k, params.reg_width)

    pi_here = _timer(s_src, _reg(params, ins.read), _reg(params, ins.state_from), u)
    copy_rest = ForAll(
        tuple(t.vid for t in w),
        Implies(
            Not(eq_tuple(w, u_after)),
            Exists(
                tuple(t.vid for t in g),
                And(_clause(s_src, w, g), _clause(s_dst, w, g)),
            ),
        ),
    )
    if isinstance(ins.action, str):
        fetch = _clause(s_src, u_after, h)
    else:
        fetch = eq_tuple(h, _reg(params, ins.action))
    write_back = _clause(s_dst, u_after, h)
    pi_next = _timer(s_dst, h, _reg(params, ins.state_to), u_after)
    body = And(copy_rest, ForAll(tuple(t.vid for t in h), Implies(fetch, And(write_back, pi_next))))
    return ForAll(tuple(t.vid for t in u), Implies(pi_here, body))


def build_phi0(params: EncodingParams, src=0, dst=1) -> Formula:
    """One full step: the conjunction of every instruction's step formula."""
    n = len(params.program.instructions)
    return conj([build_phi_k(params, k, src, dst) for k in range(1, n + 1)])


def build_phi_s(params: EncodingParams, s: int, src=0, dst=None) -> Formula:
    """Step-compression level s, relating configurations 2^s steps apart.

    Level s+1 quantifies a middle configuration and two universal copies and
    dispatches the two half-runs through a disjunctive guard, so each level
    doubles the reachable distance while adding a constant number of blocks.
    """
    if dst is None:
        dst = 1 << s
    if s == 0:
        return build_phi0(params, src, dst)
    width = params.y_width
    v = var_tuple("v", s, width)
    a = var_tuple("a", s, width)
    b = var_tuple("b", s, width)
    src_terms = _slot(params, src).concat()
    dst_terms = _slot(params, dst).concat()
    guard = Or(
        And(eq_tuple(src_terms, a), eq_tuple(v, b)),
        And(eq_tuple(v, a), eq_tuple(b, dst_terms)),
    )
    inner = build_phi_s(params, s - 1, ("a", s), ("b", s))
    return Exists(
        tuple(t.vid for t in v),
        ForAll(
            tuple(t.vid for t in a),
            ForAll(tuple(t.vid for t in b), Implies(guard, inner)),
        ),
    )


def build_psi_config(params: EncodingParams, cfg: Configuration) -> Formula:
    """Full description of a traced configuration at its own color.

    Pins the head block and the content of every zone cell 0..T; cells beyond
    the explicit tape prefix are blank.
    """
    if cfg.head > params.horizon:
        raise ParamError(f"head {cfg.head} is outside the zone (T={params.horizon})")
    scanned = cfg.tape[cfg.head]
    parts = [build_timer(params, cfg.step, scanned, cfg.state, cfg.head)]
    for cell in range(params.horizon + 1):
        content = cfg.tape[cell] if cell < len(cfg.tape) else BLANK
        parts.append(build_clause(params, cfg.step, cell, content))
    return conj(parts)


def build_chi0(params: EncodingParams) -> Formula:
    """Start-configuration sentence at color 0.

    The head block sits on the marker in the start state; cells 0..n spell
    the marker and the input; one universal cell quantifier forces every
    lexicographically larger address to hold a blank.
    """
    n = len(params.input_ids)
    parts = [build_timer(params, 0, START_MARKER, START_STATE, 0)]
    tape = (START_MARKER,) + params.input_ids
    for cell, sym in enumerate(tape):
        parts.append(build_clause(params, 0, cell, sym))
    u = var_tuple("u", 0, params.addr_width)
    bound = const_tuple(n, params.addr_width)
    blank = _reg(params, BLANK)
    tail = ForAll(
        tuple(t.vid for t in u),
        Implies(lex_less(bound, u), _clause(_slot(params, 0), u, blank)),
    )
    return conj(parts + [tail])


def build_chi_omega(params: EncodingParams) -> Formula:
    """Acceptance at the horizon: the color-T state block holds the accept code."""
    state = var_tuple("q", params.horizon, params.reg_width)
    return eq_tuple(state, const_tuple(1, params.reg_width))


def build_omega(
    params: EncodingParams,
    depth="full",
    src_cfg: Configuration | None = None,
    dst_cfg: Configuration | None = None,
) -> Formula:
    """The closed sentence for this instance.

    With ``depth="full"``, the sentence asserts: every pair of configuration
    tuples that satisfies the start description and the m-level compression
    tower between them satisfies acceptance. With an integer depth s and two
    traced configurations 2^s steps apart, the sentence instead asserts the
    one-pair faithfulness statement between their full descriptions.
    """
    if depth != "full":
        s = int(depth)
        if src_cfg is None or dst_cfg is None:
            raise ValueError("depth-s sentences need a source and target configuration")
        if dst_cfg.step - src_cfg.step != (1 << s):
            raise ValueError(
                f"configurations must be {1 << s} steps apart, got"
                f" {dst_cfg.step - src_cfg.step}"
            )
        t = src_cfg.step
        here = build_psi_config(params, src_cfg)
        there = build_psi_config(params, dst_cfg)
        step = build_phi_s(params, s, t, dst_cfg.step) if s else build_phi0(params, t, dst_cfg.step)
        body = Implies(And(here, step), there)
        return ForAll(
            config_var_ids(params, t),
            ForAll(config_var_ids(params, dst_cfg.step), body),
        )

    m = params.zone_exp
    y0 = _slot(params, 0).concat()
    yt = _slot(params, params.horizon).concat()

    def flat(kind: str, level: int) -> tuple[Term, ...]:
        return var_tuple(kind, level, params.y_width)

    thetas = []
    for s in range(1, m + 1):
        a_up = y0 if s == m else flat("a", s + 1)
        b_up = yt if s == m else flat("b", s + 1)
        thetas.append(
            Or(
                And(eq_tuple(a_up, flat("a", s)), eq_tuple(flat("v", s), flat("b", s))),
                And(eq_tuple(flat("v", s), flat("a", s)), eq_tuple(flat("b", s), b_up)),
            )
        )
    core: Formula = Implies(conj(thetas), build_phi0(params, ("a", 1), ("b", 1)))
    for s in range(1, m + 1):
        core = Exists(
            tuple(t.vid for t in flat("v", s)),
            ForAll(
                tuple(t.vid for t in flat("a", s)),
                ForAll(tuple(t.vid for t in flat("b", s)), core),
            ),
        )
    outer = tuple(t.vid for t in y0) + tuple(t.vid for t in yt)
    return ForAll(outer, Implies(And(build_chi0(params), core), build_chi_omega(params)))


@dataclass(frozen=True, slots=True)
class AuditRow:
    x_len: int
    p_len: int
    omega_len: int
    omega_len_noidx: int
    build_ms: float


@dataclass(frozen=True, slots=True)
class AuditReport:
    rows: tuple[AuditRow, ...]
    slope: float | None

    def csv(self) -> str:
        lines = ["x_len,p_len,omega_len,omega_len_noidx,build_ms"]
        for r in self.rows:
            lines.append(
                f"{r.x_len},{r.p_len},{r.omega_len},{r.omega_len_noidx},{r.build_ms:.3f}"
            )
        return "\n".join(lines) + "\n"


def length_audit(jobs: list[tuple[Program, str, int]]) -> AuditReport:
    """Build the full sentence for each (program, input, zone) job and audit it.

    Reports per-instance lengths and build times plus the least-squares slope
    of log(sentence length) against log(input length) when at least two
    distinct input lengths are present.
    """
    rows = []
    for program, word, m in jobs:
        params = derive_params(program, word, m)
        started = time.perf_counter()
        omega = build_omega(params)
        built_ms = (time.perf_counter() - started) * 1000.0
        rows.append(
            AuditRow(
                x_len=len(word),
                p_len=len(params.program.instructions),
                omega_len=length_natural(omega),
                omega_len_noidx=length_natural(omega, with_indices=False),
                build_ms=built_ms,
            )
        )
    xs = [log(r.x_len) for r in rows]
    ys = [log(r.omega_len) for r in rows]
    slope = None
    if len(set(xs)) >= 2:
        mean_x = sum(xs) / len(xs)
        mean_y = sum(ys) / len(ys)
        var = sum((x - mean_x) ** 2 for x in xs)
        cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
        slope = cov / var
    return AuditReport(tuple(rows), slope)
