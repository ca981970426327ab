"""CLI entrypoints for ooskge commands."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional

from .aggregation import AggregatorKind
from .config import ALGORITHMS, FILTER_MODES, SEED_ENV_VAR, ConfigError
from .logging import configure_logging, get_logger, release_handlers, run_log_path
from .orchestrator import BASELINES, Orchestrator
from .splitgen import DEFAULT_OOS_FRACTION

_AGGREGATORS = [kind.value for kind in AggregatorKind]


def _add_verbose_option(
    parser: argparse.ArgumentParser, *, suppress_default: bool = False
) -> None:
    kwargs: dict[str, object] = {
        "action": "store_true",
        "help": "Increase log verbosity for troubleshooting.",
    }
    if suppress_default:
        kwargs["default"] = argparse.SUPPRESS
    else:
        kwargs["default"] = False
    parser.add_argument(
        "-v",
        "--verbose",
        **kwargs,
    )


def _fraction(value: str) -> float:
    try:
        parsed = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None
    if not 0.0 < parsed < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {parsed}")
    return parsed


def _probability(value: str) -> float:
    try:
        parsed = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None
    if not 0.0 <= parsed <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {parsed}")
    return parsed


def _add_out_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", required=True, help="Run directory for all outputs.")


def _add_training_options(
    parser: argparse.ArgumentParser, *, include_psi: bool = True, include_lr: bool = True
) -> None:
    parser.add_argument("--dataset", required=True, help="Dataset directory from build-dataset.")
    parser.add_argument("--config", help="YAML file with training hyperparameters.")
    if include_lr:
        parser.add_argument("--lr", type=float, help="AdaGrad learning rate (default 0.1).")
        parser.add_argument(
            "--lambda",
            dest="reg_lambda",
            type=float,
            help="L2 regularization weight (default 0.01).",
        )
    parser.add_argument(
        "--negative-ratio", type=int, help="Negatives per positive triple (default 1)."
    )
    if include_psi:
        parser.add_argument(
            "--psi", type=_probability, help="Aggregation probability per triple (default 0.5)."
        )
    parser.add_argument("--dim", type=int, help="Embedding dimension (default 200).")
    parser.add_argument("--epochs", type=int, help="Training epochs (default 1000).")
    parser.add_argument("--batch-size", type=int, help="Positive triples per batch (default 1000).")
    parser.add_argument("--seed", type=int, help=f"Random seed (fallback: ${SEED_ENV_VAR}, then 0).")
    parser.add_argument("--aggregator", choices=_AGGREGATORS, help="Aggregation function.")
    parser.add_argument(
        "--agg-lambda", type=float, help="Ridge weight of the LS aggregators (default: --lambda)."
    )
    parser.add_argument("--eval-every", type=int, help="Epochs between validation passes.")
    parser.add_argument(
        "--algorithm", choices=ALGORITHMS, help="oos (aggregation-aware) or transductive."
    )
    parser.add_argument("--filter-mode", choices=FILTER_MODES, help="Validation filtering.")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ooskge",
        description="Out-of-sample DistMult training and evaluation for knowledge graphs.",
    )
    _add_verbose_option(parser)
    subparsers = parser.add_subparsers(dest="command", required=True)

    build_parser = subparsers.add_parser(
        "build-dataset",
        help="Merge triple files and build an out-of-sample split.",
    )
    _add_verbose_option(build_parser, suppress_default=True)
    build_parser.add_argument(
        "--input", nargs="+", required=True, help="Triple TSV files to merge (train, valid, test)."
    )
    _add_out_option(build_parser)
    build_parser.add_argument(
        "--oos-fraction",
        type=_fraction,
        default=DEFAULT_OOS_FRACTION,
        help="Fraction of eligible entities made out-of-sample (default 0.2).",
    )
    build_parser.add_argument("--seed", type=int, help=f"Split seed (fallback: ${SEED_ENV_VAR}).")

    train_parser = subparsers.add_parser("train", help="Train a DistMult model on a dataset.")
    _add_verbose_option(train_parser, suppress_default=True)
    _add_training_options(train_parser)
    _add_out_option(train_parser)

    eval_parser = subparsers.add_parser(
        "evaluate", help="Rank leave-one-out queries of out-of-sample entities."
    )
    _add_verbose_option(eval_parser, suppress_default=True)
    eval_parser.add_argument("--split", required=True, help="Dataset directory.")
    eval_parser.add_argument("--checkpoint", help="Checkpoint written by train.")
    eval_parser.add_argument(
        "--aggregator", choices=_AGGREGATORS, help="Aggregation function (default: as trained)."
    )
    eval_parser.add_argument("--agg-lambda", type=float, help="Ridge weight of LS aggregators.")
    eval_parser.add_argument(
        "--baseline", choices=BASELINES, help="Rank with a baseline instead of aggregation."
    )
    eval_parser.add_argument("--part", choices=("valid", "test"), default="test")
    eval_parser.add_argument("--filter-mode", choices=FILTER_MODES, default="gv")
    eval_parser.add_argument(
        "--force", action="store_true", help="Evaluate even if dataset checksums changed."
    )
    eval_parser.add_argument("--seed", type=int, help="Tie-break seed of the popularity baseline.")
    _add_out_option(eval_parser)

    psi_parser = subparsers.add_parser(
        "sweep-psi", help="Train and evaluate one model per psi value."
    )
    _add_verbose_option(psi_parser, suppress_default=True)
    _add_training_options(psi_parser, include_psi=False)
    psi_parser.add_argument(
        "--psi", nargs="+", type=_probability, required=True, help="Psi values to sweep."
    )
    psi_parser.add_argument("--part", choices=("valid", "test"), default="test")
    _add_out_option(psi_parser)

    grid_parser = subparsers.add_parser(
        "sweep-grid", help="Select lr and lambda on validation filtered MRR."
    )
    _add_verbose_option(grid_parser, suppress_default=True)
    _add_training_options(grid_parser, include_lr=False)
    grid_parser.add_argument(
        "--lrs", nargs="+", type=float, default=[0.1, 0.01], help="Learning rates to try."
    )
    grid_parser.add_argument(
        "--lambdas",
        nargs="+",
        type=float,
        default=[0.1, 0.01, 0.001, 0.0001],
        help="L2 weights to try.",
    )
    _add_out_option(grid_parser)

    return parser


_OVERRIDE_KEYS = (
    "lr",
    "reg_lambda",
    "negative_ratio",
    "psi",
    "dim",
    "epochs",
    "batch_size",
    "seed",
    "aggregator",
    "agg_lambda",
    "eval_every",
    "algorithm",
    "filter_mode",
)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values = {key: getattr(args, key, None) for key in _OVERRIDE_KEYS}
    return {key: value for key, value in values.items() if value is not None}


def _resolve_seed(explicit: Optional[int]) -> int:
    if explicit is not None:
        return explicit
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _dispatch(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    orchestrator = Orchestrator()
    out = Path(args.out)

    if args.command == "build-dataset":
        split = orchestrator.run_build_dataset(
            args.input, out, oos_fraction=args.oos_fraction, seed=_resolve_seed(args.seed)
        )
        stats = split.stats
        print(
            f"Split written to {_relativize(out)}: {stats.in_sample_entities} in-sample entities, "
            f"{stats.oos_valid}+{stats.oos_test} out-of-sample, {stats.train_triples} train triples"
        )
    elif args.command == "train":
        outcome = orchestrator.run_train(
            args.dataset, out, config_path=args.config, overrides=_overrides(args)
        )
        mrr = outcome.result.best_valid_mrr
        suffix = f", validation MRR {mrr:.4f}" if mrr is not None else ""
        print(
            f"Checkpoint written to {_relativize(outcome.checkpoint)} "
            f"(epoch {outcome.result.best_epoch}{suffix})"
        )
    elif args.command == "evaluate":
        if args.baseline != "popularity" and args.checkpoint is None:
            parser.exit(2, "ooskge evaluate: --checkpoint is required unless --baseline popularity\n")
        result = orchestrator.run_evaluate(
            args.split,
            out,
            checkpoint=args.checkpoint,
            aggregator=args.aggregator,
            agg_lambda=args.agg_lambda,
            baseline=args.baseline,
            part=args.part,
            filter_mode=args.filter_mode,
            force=bool(args.force),
            seed=_resolve_seed(args.seed),
        )
        report = result.report
        print(
            f"MRR {report.mrr:.4f}  Hit@1 {report.hits[1]:.4f}  Hit@3 {report.hits[3]:.4f}  "
            f"Hit@10 {report.hits[10]:.4f}  ({report.num_queries} queries)"
        )
    elif args.command == "sweep-psi":
        overrides = _overrides(args)
        overrides.pop("psi")
        rows = orchestrator.run_sweep_psi(
            args.dataset,
            out,
            args.psi,
            config_path=args.config,
            overrides=overrides,
            part=args.part,
        )
        for row in rows:
            print(f"psi={row.psi:g}\tMRR={row.mrr or 0.0:.4f}")
    elif args.command == "sweep-grid":
        overrides = _overrides(args)
        _, best = orchestrator.run_sweep_grid(
            args.dataset,
            out,
            lrs=args.lrs,
            reg_lambdas=args.lambdas,
            config_path=args.config,
            overrides=overrides,
        )
        print(
            f"Best lr={best.lr:g} lambda={best.reg_lambda:g} "
            f"(epoch {best.best_epoch}, validation MRR {best.valid_mrr or 0.0:.4f})"
        )
    else:  # pragma: no cover - argparse enforces choices
        parser.exit(1, "Unknown command\n")


def main(argv: list[str] | None = None) -> None:
    """CLI entrypoint for ooskge commands."""
    parser = _build_parser()
    args = parser.parse_args(argv)

    configure_logging(verbose=bool(args.verbose), run_dir=Path(args.out))
    logger = get_logger("cli")

    try:
        _dispatch(args, parser)
        logger.debug("Run log at %s", run_log_path(Path(args.out)))
    except (ConfigError, FileNotFoundError) as exc:
        parser.exit(2, f"ooskge {args.command}: {exc}\n")
    except (RuntimeError, ValueError, KeyError, OSError) as exc:
        logger.debug("Command failed", exc_info=True)
        parser.exit(
            1,
            f"ooskge {args.command} failed: {exc}\nRun with --verbose for more details.\n",
        )
    finally:
        release_handlers()


def _relativize(path: Path) -> str:
    try:
        return str(path.resolve().relative_to(Path.cwd()))
    except ValueError:
        return str(path)


if __name__ == "__main__":
    main(sys.argv[1:])
