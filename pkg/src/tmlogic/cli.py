"""Command line front end.

Subcommands mirror the library's phases: ``simulate`` runs a machine
directly, ``encode`` builds the sentence for an instance, ``verify`` checks
the sentence's truth against the simulator, ``stats`` audits sentence
lengths, ``translate`` rewrites sentences for equivalence-only signatures,
``eval`` decides a serialized sentence, and ``clone-check`` compares two
machines by their reduced instruction sets.

Exit codes: 0 for success or agreement, 1 for usage and input errors, 2 for
an exhausted budget, 3 for a semantic disagreement.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import qbf
from .encoder import build_omega, derive_params, length_audit
from .evaluate import (
    STRATEGIES,
    BudgetExceeded,
    EvalError,
    eval_relational,
    eval_sentence,
)
from .formulas import length_natural, parse_formula, render_natural, serialize
from .machines import (
    MissingInstructionError,
    add_idle_run,
    monoclonal,
    normalize,
    parse_program,
    simulate,
    trace_json,
)
from .translate import EqStructure, translate_20, translate_21, translate_22


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to this tool's exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_model(args) -> EqStructure:
    data = json.loads(_read(args.model))
    n_formula = parse_formula(_read(args.n_formula)) if args.n_formula else None
    return EqStructure.from_json(data, n_formula)


def _cmd_verify(args) -> int:
    program = parse_program(_read(args.program))
    params = derive_params(program, args.input, args.zone_exp)

    started = time.perf_counter()
    omega = build_omega(params)
    build_ms = (time.perf_counter() - started) * 1000.0

    started = time.perf_counter()
    truth: bool | None
    try:
        truth = eval_sentence(omega, strategy=args.strategy, budget_ms=args.budget_ms)
    except BudgetExceeded:
        truth = None
    eval_ms = (time.perf_counter() - started) * 1000.0

    started = time.perf_counter()
    run = simulate(params.program, args.input, params.horizon)
    sim_ms = (time.perf_counter() - started) * 1000.0

    accepted = run.outcome == "accepted"
    agree = None if truth is None else truth == accepted
    report = {
        "machine": Path(args.program).stem,
        "input": args.input,
        "zone_exp": params.zone_exp,
        "horizon": params.horizon,
        "omega_len": length_natural(omega),
        "omega_len_noidx": length_natural(omega, with_indices=False),
        "omega_truth": "timeout" if truth is None else truth,
        "simulator": {"outcome": run.outcome, "halt_step": run.halt_step},
        "agree": agree,
        "times_ms": {
            "build": round(build_ms, 3),
            "eval": round(eval_ms, 3),
            "simulate": round(sim_ms, 3),
        },
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    if agree is None:
        return 2
    return 0 if agree else 3


def _cmd_encode(args) -> int:
    program = parse_program(_read(args.program))
    zone_exp = args.zone_exp if args.zone_exp is not None else len(args.input)
    omega = build_omega(derive_params(program, args.input, zone_exp))
    if args.format == "natural":
        text = render_natural(omega) + "\n"
    elif args.format == "sexpr":
        text = serialize(omega)
    elif args.format == "qdimacs":
        text = qbf.to_qdimacs(omega)
    else:
        text = qbf.to_qcir(omega)
    _emit(text, args.out)
    return 0


def _cmd_stats(args) -> int:
    program = parse_program(_read(args.program))
    jobs = []
    for word in args.input:
        zone_exp = args.zone_exp if args.zone_exp is not None else len(word)
        jobs.append((program, word, zone_exp))
    _emit(length_audit(jobs).csv(), args.out)
    return 0


def _input_formula(args):
    if args.formula:
        return parse_formula(_read(args.formula))
    if args.program and args.input:
        program = parse_program(_read(args.program))
        zone_exp = args.zone_exp if args.zone_exp is not None else len(args.input)
        return build_omega(derive_params(program, args.input, zone_exp))
    raise ValueError("need either --formula or --program with --input")


def _cmd_translate(args) -> int:
    base = translate_20(_input_formula(args))
    if args.level == "2.0":
        out = base
    elif args.level == "2.1":
        out = translate_21(base)
    else:
        if not args.n_formula:
            raise ValueError("--level 2.2 needs --n-formula")
        out = translate_22(base, parse_formula(_read(args.n_formula)))
    _emit(serialize(out), args.out)
    return 0


def _cmd_eval(args) -> int:
    if args.check_model:
        if not args.model:
            raise ValueError("--check-model needs --model")
        issues = _load_model(args).problems()
        print("ok" if not issues else "\n".join(issues))
        return 0 if not issues else 1
    if not args.formula:
        raise ValueError("eval needs --formula")
    formula = parse_formula(_read(args.formula))
    if args.model:
        value = eval_relational(formula, _load_model(args))
    else:
        value = eval_sentence(
            formula, strategy=args.strategy, budget_ms=args.budget_ms
        )
    print("true" if value else "false")
    return 0


def _cmd_simulate(args) -> int:
    program = add_idle_run(normalize(parse_program(_read(args.program))))
    run = simulate(program, args.input, args.max_steps, trace=args.trace)
    payload: dict = {"outcome": run.outcome, "halt_step": run.halt_step}
    if args.trace:
        payload["trace"] = trace_json(run, program)
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _cmd_clone_check(args) -> int:
    if len(args.program) != 2:
        raise ValueError("clone-check needs exactly two --program files")
    first, second = (parse_program(_read(p)) for p in args.program)
    same = monoclonal(first, second)
    print("monoclonal" if same else "different")
    return 0 if same else 3


def _build_parser() -> _Parser:
    parser = _Parser(prog="tmlogic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="check the sentence against the simulator")
    verify.add_argument("--program", required=True, help="machine description file")
    verify.add_argument("--input", required=True, help="input word")
    verify.add_argument("--zone-exp", type=int, required=True, help="horizon exponent")
    verify.add_argument("--strategy", choices=STRATEGIES, default="guarded")
    verify.add_argument("--budget-ms", type=int)
    verify.add_argument("--out", help="write the report here instead of stdout")
    verify.set_defaults(func=_cmd_verify)

    encode = sub.add_parser("encode", help="build the sentence for an instance")
    encode.add_argument("--program", required=True)
    encode.add_argument("--input", required=True)
    encode.add_argument("--zone-exp", type=int, help="defaults to the input length")
    encode.add_argument(
        "--format",
        choices=("sexpr", "natural", "qdimacs", "qcir"),
        default="sexpr",
    )
    encode.add_argument("--out")
    encode.set_defaults(func=_cmd_encode)

    stats = sub.add_parser("stats", help="audit sentence lengths, one CSV row per input")
    stats.add_argument("--program", required=True)
    stats.add_argument("--input", action="append", required=True)
    stats.add_argument("--zone-exp", type=int, help="defaults to each input's length")
    stats.add_argument("--out")
    stats.set_defaults(func=_cmd_stats)

    translate = sub.add_parser(
        "translate", help="rewrite a sentence for equivalence-only signatures"
    )
    translate.add_argument("--formula", help="serialized sentence file")
    translate.add_argument("--program", help="build the sentence from this machine instead")
    translate.add_argument("--input")
    translate.add_argument("--zone-exp", type=int)
    translate.add_argument("--level", choices=("2.0", "2.1", "2.2"), default="2.0")
    translate.add_argument("--n-formula", help="defining formula for the predicate")
    translate.add_argument("--out")
    translate.set_defaults(func=_cmd_translate)

    evaluate = sub.add_parser("eval", help="decide a serialized sentence")
    evaluate.add_argument("--formula")
    evaluate.add_argument("--strategy", choices=STRATEGIES, default="guarded")
    evaluate.add_argument("--budget-ms", type=int)
    evaluate.add_argument("--model", help="JSON structure for relational sentences")
    evaluate.add_argument("--n-formula")
    evaluate.add_argument("--check-model", action="store_true")
    evaluate.set_defaults(func=_cmd_eval)

    sim = sub.add_parser("simulate", help="run a machine directly")
    sim.add_argument("--program", required=True)
    sim.add_argument("--input", required=True)
    sim.add_argument("--max-steps", type=int, default=256)
    sim.add_argument("--trace", action="store_true")
    sim.add_argument("--out")
    sim.set_defaults(func=_cmd_simulate)

    clone = sub.add_parser("clone-check", help="compare two machines after reduction")
    clone.add_argument("--program", action="append", required=True)
    clone.set_defaults(func=_cmd_clone_check)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 2
    except (ValueError, EvalError, MissingInstructionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
