"""Command line: ``polytree {sample,learn,mi,eval,dot}``.

Exit codes: 0 success, 1 usage or parse error, 2 data/validation error,
3 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .estimator import PolytreeLearner
from .evaluation import evaluate
from .exceptions import ConfigurationError, DegeneracyError, InputError, ParseError
from .info import conditional_mutual_information, mutual_information
from .model import Empirical, Factored, pair_marginal, sample_array, triple_marginal

log = logging.getLogger("polytree")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _add_input(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--model", help="poly-tree model JSON (exact input)")
    g.add_argument("--jpdf", help="explicit joint table JSON (exact input)")
    g.add_argument("--data", help="CSV of samples (empirical input)")


def _add_learn_options(p):
    p.add_argument("--oracle", choices=["auto", "exact", "fixed", "gtest"], default="auto")
    p.add_argument("--epsilon", type=_positive_float, default=1e-9, help="exact threshold, bits")
    p.add_argument("--tau", type=_positive_float, default=1e-3, help="fixed threshold, bits")
    p.add_argument("--alpha", type=float, default=0.01, help="G-test significance level")
    p.add_argument("--tie-tolerance", type=_positive_float, default=None)
    p.add_argument("--degenerate", action="store_true", help="use I(A,C|B) > 0 collider test")
    p.add_argument("--fit", action="store_true", help="complete orientation and fit CPTs")
    p.add_argument("--smoothing", type=float, default=0.0)
    p.add_argument(
        "--orient", action="append", default=[], metavar="PARENT:CHILD",
        help="direction for an undetermined edge (with --fit); repeatable",
    )


def build_parser():
    parser = _Parser(prog="polytree", description="Recover causal poly-trees from distributions.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw records from a model")
    p.add_argument("--model", required=True)
    p.add_argument("-n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("learn", help="recover structure (and parameters)")
    _add_input(p)
    _add_learn_options(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dot", help="also write a DOT rendering")

    p = sub.add_parser("mi", help="print I(A,B) or I(A,B|C) in bits")
    _add_input(p)
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--given")

    p = sub.add_parser("eval", help="score a result against the true model")
    p.add_argument("--result", help="result JSON; otherwise learn inline from an input")
    _add_input(p, required=False)
    _add_learn_options(p)
    p.add_argument("--truth", required=True)
    p.add_argument("-o", "--output")

    p = sub.add_parser("dot", help="render a result JSON as DOT")
    p.add_argument("--result", required=True)
    p.add_argument("-o", "--output")
    return parser


def load_source(args):
    if args.model:
        return Factored(io.read_model(args.model))
    if args.jpdf:
        return io.read_jpdf(args.jpdf)
    if args.data:
        return Empirical(io.read_csv(args.data))
    raise UsageError("one of --model, --jpdf or --data is required")


def _write(path, text):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_sample(args):
    model = io.read_model(args.model)
    io.write_csv(model.names, sample_array(model, args.n, args.seed), args.output)
    log.info("wrote %d rows to %s", args.n, args.output)


def learn_result(args) -> dict:
    src = load_source(args)
    if src.n < 2:
        raise UsageError("learning needs at least two variables")
    overrides = []
    for spec in args.orient:
        if ":" not in spec:
            raise UsageError(f"--orient expects PARENT:CHILD, got {spec!r}")
        overrides.append(tuple(spec.split(":", 1)))
    learner = PolytreeLearner(
        oracle=args.oracle,
        epsilon=args.epsilon,
        tau=args.tau,
        alpha=args.alpha,
        tie_tolerance=args.tie_tolerance,
        degenerate=args.degenerate,
        estimate_parameters=args.fit,
        smoothing=args.smoothing,
        orientation_override=overrides or None,
    )
    learner.fit(src)
    result = io.result_to_dict(src.names, learner.weights_, learner.structure_, learner.model_)
    if learner.directed_ is not None:
        result["warnings"].extend(learner.directed_.warnings)
    return result


def cmd_learn(args):
    result = learn_result(args)
    Path(args.output).write_text(io.dumps_result(result))
    if args.dot:
        Path(args.dot).write_text(io.to_dot(result))


def cmd_mi(args):
    src = load_source(args)
    a, b = src.index(args.a), src.index(args.b)
    if a == b:
        raise InputError("mi needs two different variables")
    if args.given:
        k = src.index(args.given)
        value = conditional_mutual_information(triple_marginal(src, a, b, k))
    else:
        value = mutual_information(pair_marginal(src, a, b))
    print(f"{value:.6f}")


def cmd_eval(args):
    truth = io.read_model(args.truth)
    if args.result:
        result = io.read_result(args.result)
    else:
        result = learn_result(args)
    report = evaluate(result, truth)
    _write(args.output, json.dumps(report.to_dict(), indent=2) + "\n")


def cmd_dot(args):
    _write(args.output, io.to_dot(io.read_result(args.result)))


COMMANDS = {
    "sample": cmd_sample,
    "learn": cmd_learn,
    "mi": cmd_mi,
    "eval": cmd_eval,
    "dot": cmd_dot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except (UsageError, ParseError) as exc:
        print(f"polytree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, ConfigurationError, DegeneracyError) as exc:
        print(f"polytree: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        log.exception("internal error")
        print(f"polytree: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
