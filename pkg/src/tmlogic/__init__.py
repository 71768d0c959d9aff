"""Bounded machine runs as sentences over the two-element algebra.

The package compiles a deterministic single-tape machine and an input word
into a closed first-order sentence that is true exactly when the machine
accepts the word within a power-of-two step horizon. Around that core sit a
direct simulator to check the sentence against, several evaluation
strategies for deciding it, a length auditor, and a three-stage translation
that re-expresses such sentences for structures carrying nothing but an
equivalence relation.
"""

from .encoder import (
    AuditReport,
    AuditRow,
    EncodingParams,
    ParamError,
    build_chi0,
    build_chi_omega,
    build_clause,
    build_omega,
    build_phi0,
    build_phi_k,
    build_phi_s,
    build_psi_config,
    build_timer,
    config_var_ids,
    derive_params,
    length_audit,
)
from .evaluate import (
    STRATEGIES,
    BudgetExceeded,
    EvalError,
    eval_relational,
    eval_sentence,
)
from .formulas import (
    Formula,
    ParseError,
    Term,
    VarId,
    length_natural,
    parse_formula,
    render_natural,
    serialize,
)
from .machines import (
    MissingInstructionError,
    Program,
    ProgramError,
    SimResult,
    add_idle_run,
    format_program,
    monoclonal,
    normalize,
    parse_input,
    parse_program,
    reduce_clone,
    simulate,
    trace_json,
)
from .qbf import solve_formula, solve_qdimacs, to_qcir, to_qdimacs
from .translate import (
    EqStructure,
    ResidualTermError,
    translate_20,
    translate_21,
    translate_22,
)

__version__ = "0.1.0"
