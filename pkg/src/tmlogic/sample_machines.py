"""A small corpus of machines used by the tests and the documentation."""

from __future__ import annotations

from .machines import Program, parse_program

WALKER = """\
# scan right, accept at the first blank
q0 > -> q0 R
q0 0 -> q0 R
q0 1 -> q0 R
q0 _ -> q1 _
"""

IMMEDIATE_REJECT = """\
q0 > -> q2 >
"""

BIT_FLIPPER = """\
# complement every bit, then accept at the blank
q0 > -> q0 R
q0 0 -> q4 1
q4 1 -> q0 R
q0 1 -> q5 0
q5 0 -> q0 R
q0 _ -> q1 _
"""

LEFT_BOUNCER = """\
# walk to the blank, walk back, accept at the marker
q0 > -> q0 R
q0 0 -> q0 R
q0 1 -> q0 R
q0 _ -> q6 L
q6 0 -> q6 L
q6 1 -> q6 L
q6 > -> q1 >
"""

ALTERNATOR = """\
# accept exactly the words of the form 0101...01 or empty-tail variants
q0 > -> q3 R
q3 0 -> q4 R
q4 1 -> q3 R
q3 _ -> q1 _
q4 _ -> q2 _
q3 1 -> q2 1
q4 0 -> q2 0
"""

SOURCES: dict[str, str] = {
    "walker": WALKER,
    "immediate_reject": IMMEDIATE_REJECT,
    "bit_flipper": BIT_FLIPPER,
    "left_bouncer": LEFT_BOUNCER,
    "alternator": ALTERNATOR,
}


def load(name: str) -> Program:
    """Parse one of the bundled machines by name."""
    return parse_program(SOURCES[name])


def names() -> list[str]:
    return sorted(SOURCES)
