"""``neuroassist`` command-line entry point.

Subcommands: ``synth``, ``features``, ``train``, ``eval``, ``sweep-rewards``
and ``rnac-demo``.  Settings come from the built-in defaults, then the
``--config`` file, then flags (flags win).

Exit codes: 0 success, 2 configuration or schema error, 3 I/O error,
4 data or dimension error, 5 numeric failure.
"""
import argparse
import sys

from . import pipeline
from .config import ConfigError, build_config
from .exceptions import FormatError, NumericError

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="64-bit master seed")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--jobs", type=int, help="parallel workers for feature extraction")

    parser = _Parser(prog="neuroassist",
                     description="EEG motor-imagery pipeline and robust actor-critic demo")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("synth", parents=[common], help="generate a synthetic recording")
    sub.add_parser("features", parents=[common],
                   help="epoch, filter, fit CSP and write normalized features")
    sub.add_parser("train", parents=[common], help="train the hybrid Q-network")
    p = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint on held-out trials")
    p.add_argument("--checkpoint", metavar="PATH")
    p.add_argument("--k-folds", type=int, dest="k_folds")
    sub.add_parser("sweep-rewards", parents=[common],
                   help="train and evaluate once per reward structure")
    p = sub.add_parser("rnac-demo", parents=[common],
                       help="robust actor-critic on a tabular fixture")
    p.add_argument("--fixture", metavar="PATH")
    return parser


def _overrides(args):
    ov = {"seed": args.seed, "out": args.out, "jobs": args.jobs}
    if getattr(args, "checkpoint", None):
        ov["data"] = {"checkpoint": args.checkpoint}
    if getattr(args, "k_folds", None):
        ov["eval"] = {"k_folds": args.k_folds}
    if getattr(args, "fixture", None):
        ov["rnac"] = {"fixture": args.fixture}
    return ov


def _fmt(x):
    return f"{x:.2f}"


def _report(command, summary):
    if command == "synth":
        print(f"wrote {summary['manifest']}: {summary['n_trials']} trials, "
              f"{summary['n_channels']} channels, {summary['n_classes']} classes, "
              f"{summary['n_samples']} samples at {summary['fs_hz']:g} Hz")
    elif command == "features":
        print(f"{summary['n_features']} feature columns from "
              f"{summary['n_spatial_filters']} spatial filters "
              f"({summary['n_train']} train / {summary['n_test']} test trials)")
        if summary["degenerate_models"]:
            print(f"warning: degenerate CSP for classes {summary['degenerate_models']}")
    elif command == "train":
        m = summary["train_metrics"]
        print(f"trained {summary['steps']} steps; train accuracy {_fmt(m['accuracy'])} "
              f"f1 {_fmt(m['f1'])} reward-based accuracy {_fmt(m['reward_based_accuracy'])}")
    elif command == "eval":
        print(" ".join(f"{k} {_fmt(summary[k])}" for k in
                       ("accuracy", "f1", "precision", "recall", "reward_based_accuracy")))
        if "fold_mean" in summary:
            print(f"{len(summary['fold_values']['accuracy'])}-fold accuracy "
                  f"{_fmt(summary['fold_mean']['accuracy'])} +- "
                  f"{_fmt(summary['fold_std']['accuracy'])}")
    elif command == "sweep-rewards":
        for row in summary:
            print(f"{row['structure']:>12}  acc {_fmt(row['accuracy'])}  "
                  f"rba {_fmt(row['reward_based_accuracy'])}")
    elif command == "rnac-demo":
        print(f"{summary['uncertainty_set']}: robust value {summary['final_value']:.6f}, "
              f"optimum {summary['optimum']:.6f}, gap {round(summary['gap'], 6) + 0.0:.6f}")


def run(command, cfg):
    out = cfg["out"]
    if command == "synth":
        return pipeline.run_synth(cfg, out)
    if command == "features":
        return pipeline.run_features(cfg, out, cfg["jobs"])
    if command == "train":
        return pipeline.run_train(cfg, out)
    if command == "eval":
        return pipeline.run_eval(cfg, out)
    if command == "sweep-rewards":
        return pipeline.run_sweep_rewards(cfg, out)
    if command == "rnac-demo":
        try:
            return pipeline.run_rnac_demo(cfg, out)
        except FormatError as exc:
            raise ConfigError(f"fixture: {exc}") from None
    raise ConfigError(f"unknown command {command!r}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args.config, _overrides(args))
        summary = run(args.command, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, RuntimeError, KeyError, TypeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    _report(args.command, summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
