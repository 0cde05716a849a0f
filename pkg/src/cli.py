# src/cli.py

import argparse
import sys
from dataclasses import dataclass
import numpy as np
from .config import Config
from .errors import DomainError, FormatError, StrongDomError, UsageError
from .gridapprox import RationalStepFunction, approximate_pair
from .logger import get_logger, parse_level, setup_logger
from .marttree import (
    MartingaleTree,
    PredictableAttachment,
    apply_node_operators,
    check_domination,
    check_kappa_domination,
    check_strong_domination,
    check_subordination,
    check_tangency,
    check_threshold_domination,
    proof_pipeline,
    run_ratio_experiment,
    transfer_operators,
)
from .marttree.experiment import CSV_COLUMNS
from .marttree.generators import GENERATOR_KINDS, GeneratorFactory
from .rearrange import StepFunction, check_lambda_equivalence, k_functional_breakpoints
from .stochmat import (
    ContractionMatrix,
    birkhoff_decompose,
    classify,
    complete_to_double,
    embed_double,
    signed_decompose,
)
from .transfer import construct_transfer
from .utils.io import dumps_csv, dumps_json, read_json, write_text_atomic

logger = get_logger("cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2
EXIT_USAGE = 64

CHECKS = ("domination", "strong", "kappa", "subordination", "tangency", "threshold")
JSON_ONLY_COMMANDS = ("complete", "embed", "transfer", "approx", "generate")
TERM_COLUMNS = ["theta", "perm"]
NODE_COLUMNS = ["check", "node", "ok"]


class StrongDomArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class CommandResult:
    payload: dict
    rows: list = None
    columns: list = None
    ok: bool = True


# INPUT HELPERS

def _load_matrix(path, tol):
    payload = read_json(path)
    if isinstance(payload, list):
        return classify(payload, tol)
    return ContractionMatrix.from_json(payload, tol)


def _load_step(path):
    payload = read_json(path)
    if isinstance(payload, list):
        return StepFunction(payload)
    return StepFunction.from_json(payload)


def _load_tree(path, config):
    return MartingaleTree.from_json(read_json(path), config.zero_sum_tolerance)


def _load_pair(args, config):
    if args.pair:
        payload = read_json(args.pair)
        if not isinstance(payload, dict) or "d" not in payload or "e" not in payload:
            raise FormatError(f"Pair file {args.pair} must hold 'd' and 'e' trees")
        tol = config.zero_sum_tolerance
        return MartingaleTree.from_json(payload["d"], tol), MartingaleTree.from_json(payload["e"], tol)
    if not (args.d and args.e):
        raise UsageError("Provide either --pair or both --d and --e")
    return _load_tree(args.d, config), _load_tree(args.e, config)


def _term_rows(combination):
    return [{"theta": float(theta), "perm": " ".join(str(j + 1) for j in perm)}
            for theta, perm in combination.terms]


def _generator_params(args):
    params = {}
    for key in ("kappa", "sign_mode", "terms", "mass"):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    return params


# COMMANDS

def cmd_decompose(args, config):
    combination = birkhoff_decompose(_load_matrix(args.input, config.tolerance), config.tolerance,
                                     config.residual_zero_tolerance)
    payload = dict(combination.to_json(), n=combination.n, term_count=len(combination.terms))
    return CommandResult(payload, _term_rows(combination), TERM_COLUMNS)


def cmd_signed_decompose(args, config):
    combination = signed_decompose(_load_matrix(args.input, config.tolerance), config.tolerance,
                                   config.residual_zero_tolerance)
    payload = dict(combination.to_json(), n=combination.n, term_count=len(combination.terms))
    return CommandResult(payload, _term_rows(combination), TERM_COLUMNS)


def cmd_complete(args, config):
    matrix = _load_matrix(args.input, config.tolerance)
    completion = complete_to_double(matrix, config.tolerance, config.residual_zero_tolerance)
    payload = dict(completion.to_json(), sum_rows=(matrix.entries + completion.entries).tolist())
    return CommandResult(payload)


def cmd_embed(args, config):
    return CommandResult(embed_double(_load_matrix(args.input, config.tolerance), config.tolerance).to_json())


def cmd_transfer(args, config):
    certificate = construct_transfer(_load_step(args.f), _load_step(args.g), config.tolerance)
    return CommandResult(certificate.to_json())


def cmd_majorize_check(args, config):
    f, g = _load_step(args.f), _load_step(args.g)
    report = check_lambda_equivalence(f, g, config.tolerance)
    payload = dict(report.to_json(), weakly_majorizes=report.majorization_condition,
                   k_f=k_functional_breakpoints(f).tolist(), k_g=k_functional_breakpoints(g).tolist())
    row = {key: value for key, value in payload.items() if key not in ("k_f", "k_g")}
    return CommandResult(payload, [row], sorted(row), ok=report.majorization_condition)


def cmd_approx(args, config):
    d = RationalStepFunction.from_json(read_json(args.d))
    e = RationalStepFunction.from_json(read_json(args.e))
    p = args.p if args.p is not None else config.gridapprox_config['default_p']
    result = approximate_pair(d, e, args.eps, p, n=args.grid, tol=config.tolerance,
                              gamma_fraction=float(config.gridapprox_config['gamma_fraction']))
    return CommandResult(result.to_json())


def cmd_mart_generate(args, config):
    generator = GeneratorFactory.create_generator(args.generator, _generator_params(args))
    pair = generator.pair(args.depth, args.branching, args.seed)
    ok = bool(generator.hypothesis_holds(pair.d, pair.e, config.tolerance))
    payload = {
        "generator": pair.kind,
        "params": pair.params,
        "seed": pair.seed,
        "hypothesis_ok": ok,
        "d": pair.d.to_json(),
        "e": pair.e.to_json(),
        "attachment": pair.attachment.to_json() if pair.attachment is not None else None,
    }
    return CommandResult(payload, ok=ok)


def cmd_mart_verify(args, config):
    d, e = _load_pair(args, config)
    tol = config.tolerance
    if args.check == "kappa":
        if args.kappa is None:
            raise UsageError("--check kappa needs --kappa")
        result = check_kappa_domination(d, e, args.kappa, tol)
        rows = result.tail_condition.to_rows() + result.majorization_condition.to_rows()
        payload = dict(result.to_json(), nodes=result.majorization_condition.results,
                       tail_nodes=result.tail_condition.results)
        return CommandResult(payload, rows, NODE_COLUMNS, ok=result.holds)
    if args.check == "threshold":
        if args.thresholds is None:
            raise UsageError("--check threshold needs --thresholds")
        thresholds = PredictableAttachment.from_json(read_json(args.thresholds))
        result = check_threshold_domination(d, e, thresholds, tol)
        return CommandResult(result.to_json(), result.to_rows(), NODE_COLUMNS, ok=result.holds)
    check = {
        "domination": check_domination,
        "strong": check_strong_domination,
        "subordination": check_subordination,
        "tangency": lambda d_, e_, tol_: check_tangency(d_, e_),
    }[args.check]
    result = check(d, e, tol)
    return CommandResult(result.to_json(), result.to_rows(), NODE_COLUMNS, ok=result.holds)


def cmd_mart_ratio(args, config):
    p_values = args.p or ["2"]
    params = _generator_params(args)
    report = run_ratio_experiment(
        args.generator, p_values, args.depth, args.branching, args.pairs, args.seed,
        samples=args.samples, params=params, tol=config.tolerance, cap=config.enumeration_cap,
        workers=config.workers, bootstrap=config.bootstrap_resamples, chunk_size=config.mc_chunk_size,
    )
    return CommandResult(report.to_json(), report.to_rows(), CSV_COLUMNS, ok=report.hypothesis_ok)


def cmd_mart_transfer(args, config):
    d, e = _load_pair(args, config)
    operators = transfer_operators(d, e, config.tolerance)
    image = apply_node_operators(d, operators, config.tolerance, config.zero_sum_tolerance)
    deviation = max((float(np.max(np.abs(got - want))) for got, want in zip(image.tree.levels, e.levels)),
                    default=0.0)
    payload = {
        "attachment": operators.to_json(),
        "max_deviation": deviation,
        "normalized_nodes": list(image.normalized_nodes),
    }
    return CommandResult(payload)


def cmd_mart_pipeline(args, config):
    if args.pair:
        payload = read_json(args.pair)
        if not isinstance(payload, dict) or "d" not in payload or not payload.get("attachment"):
            raise FormatError(f"Pair file {args.pair} must hold 'd' and a matrix 'attachment'")
        d = MartingaleTree.from_json(payload["d"], config.zero_sum_tolerance)
        operators = PredictableAttachment.from_json(payload["attachment"])
    elif args.d and args.operators:
        d = _load_tree(args.d, config)
        operators = PredictableAttachment.from_json(read_json(args.operators))
    else:
        raise UsageError("Provide either --pair or both --d and --T")
    report = proof_pipeline(d, operators, args.seed, config.tolerance, config.identity_tolerance)
    columns = ["node", "classification", "terms", "deviation", "identity_holds",
               "sampled_index", "sampled_sign", "tangent"]
    return CommandResult(report.to_json(), report.to_rows(), columns, ok=report.holds)


# PARSER

def _global_options():
    # SUPPRESS keeps a subcommand from resetting a value given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="Comparison tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="Random seed (default 0)")
    common.add_argument("--format", choices=["json", "csv"], default=argparse.SUPPRESS, help="Report format")
    common.add_argument("--out", default=argparse.SUPPRESS, help="Write the report to this path instead of stdout")
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="Path to configuration file (default config/config.yaml)")
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS, help="Worker threads for enumeration and sampling")
    common.add_argument("--log-level", default=argparse.SUPPRESS, help="DEBUG, INFO, WARNING or ERROR")
    return common


def _add_generator_options(parser, default=None):
    parser.add_argument("--generator", choices=GENERATOR_KINDS, default=default, required=default is None)
    parser.add_argument("--depth", type=int, default=3)
    parser.add_argument("--branching", type=int, default=3)
    parser.add_argument("--kappa", type=float, default=None)
    parser.add_argument("--sign-mode", dest="sign_mode", choices=["uniform", "global"], default=None)
    parser.add_argument("--terms", type=int, default=None, help="Permutations per sign in operator attachments")
    parser.add_argument("--mass", type=float, default=None, help="Absolute row sum of operator attachments")


def build_parser():
    common = _global_options()
    parser = StrongDomArgumentParser(prog="strongdom", parents=[common],
                                     description="Strong domination and majorization toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, handler, help_text in (
        ("decompose", cmd_decompose, "Birkhoff decomposition of a doubly stochastic matrix"),
        ("complete", cmd_complete, "Complete a sub-doubly stochastic matrix to a doubly stochastic one"),
        ("signed-decompose", cmd_signed_decompose, "Signed permutation decomposition of a zero-sum contraction"),
        ("embed", cmd_embed, "Embed a sub-doubly stochastic matrix in a 2n x 2n doubly stochastic one"),
    ):
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("--in", dest="input", required=True, help="Matrix JSON file")
        sub.set_defaults(handler=handler)

    sub = commands.add_parser("transfer", parents=[common], help="Build T with Tf = g")
    sub.add_argument("--f", required=True)
    sub.add_argument("--g", required=True)
    sub.set_defaults(handler=cmd_transfer)

    sub = commands.add_parser("majorize-check", parents=[common], help="Compare lambda and majorization conditions")
    sub.add_argument("--f", required=True)
    sub.add_argument("--g", required=True)
    sub.set_defaults(handler=cmd_majorize_check)

    sub = commands.add_parser("approx", parents=[common], help="Grid approximation of a dominated pair")
    sub.add_argument("--d", required=True)
    sub.add_argument("--e", required=True)
    sub.add_argument("--eps", type=float, required=True)
    sub.add_argument("--p", type=str, default=None)
    sub.add_argument("--grid", type=int, default=None, help="Grid size; a multiple of the common grid")
    sub.set_defaults(handler=cmd_approx)

    mart = commands.add_parser("mart", parents=[common], help="Martingale tree tools")
    mart_commands = mart.add_subparsers(dest="mart_command", required=True)

    sub = mart_commands.add_parser("generate", parents=[common], help="Generate a dominated pair")
    _add_generator_options(sub)
    sub.set_defaults(handler=cmd_mart_generate)

    sub = mart_commands.add_parser("verify", parents=[common], help="Check a domination hypothesis node by node")
    sub.add_argument("--pair", default=None)
    sub.add_argument("--d", default=None)
    sub.add_argument("--e", default=None)
    sub.add_argument("--check", choices=CHECKS, default="domination")
    sub.add_argument("--kappa", type=float, default=None)
    sub.add_argument("--thresholds", default=None, help="Scalar attachment JSON for --check threshold")
    sub.set_defaults(handler=cmd_mart_verify)

    sub = mart_commands.add_parser("ratio", parents=[common], help="Measure norm ratios over generated pairs")
    _add_generator_options(sub, default="tangent")
    sub.add_argument("--p", action="append", default=None, help="Exponent; repeatable, 'inf' allowed")
    sub.add_argument("--samples", type=int, default=0, help="Monte Carlo samples; 0 enumerates exactly")
    sub.add_argument("--pairs", type=int, default=1)
    sub.set_defaults(handler=cmd_mart_ratio)

    sub = mart_commands.add_parser("transfer", parents=[common], help="Node operators carrying d onto a dominated e")
    sub.add_argument("--pair", default=None)
    sub.add_argument("--d", default=None)
    sub.add_argument("--e", default=None)
    sub.set_defaults(handler=cmd_mart_transfer)

    sub = mart_commands.add_parser("pipeline", parents=[common], help="Replay the signed decomposition randomization")
    sub.add_argument("--pair", default=None)
    sub.add_argument("--d", default=None)
    sub.add_argument("--T", dest="operators", default=None, help="Matrix attachment JSON")
    sub.set_defaults(handler=cmd_mart_pipeline)

    return parser


def _load_config(args):
    path = getattr(args, "config", None)
    config = Config(config_path=path) if path else Config.default()
    config.override('tolerances', 'comparison', getattr(args, "tol", None))
    config.override('marttree', 'workers', getattr(args, "workers", None))
    config.override('output', 'format', getattr(args, "format", None))
    config.override('logging', 'level', getattr(args, "log_level", None))
    return config


def _render(result, config):
    if config.output_format == "csv":
        return dumps_csv(result.rows, result.columns)
    return dumps_json(result.payload)


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.seed = getattr(args, "seed", 0)
        config = _load_config(args)
        setup_logger(level=parse_level(config.logging_config.get('level')),
                     log_file=config.logging_config.get('file') or None)
        if config.output_format not in ("json", "csv"):
            raise UsageError(f"{config.output_format} is not a valid format.  Please provide json or csv.")

        name = args.mart_command if args.command == "mart" else args.command
        if config.output_format == "csv" and name in JSON_ONLY_COMMANDS:
            raise UsageError(f"CSV output is not available for '{name}'; use --format json")

        result = args.handler(args, config)
        text = _render(result, config)

        out = getattr(args, "out", None)
        if out:
            write_text_atomic(out, text)
        else:
            sys.stdout.write(text)
        return EXIT_OK if result.ok else EXIT_REJECTED
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_OK
    except UsageError as e:
        print(f"Usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as e:
        print(f"Rejected: {e}", file=sys.stderr)
        return EXIT_REJECTED
    except (FormatError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (StrongDomError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception:
        logger.exception("Unexpected failure")
        return EXIT_ERROR


def run_main():
    sys.exit(run())
