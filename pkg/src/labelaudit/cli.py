"""Command-line interface: reproducible audit runs driven by a config
file with full flag override (flags > file > defaults).

Commands:
    identify  run protocol A on a train/test pair and report the verdict
    validate  run protocol B on train + good/mistake/corrected test parts
    synth     generate a synthetic corpus with injected label corruption
    eval      train one model and print span P/R/F1 (plus a model file)
    plot      re-render the SVG figure from a report JSON

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numeric
failure during training.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import __version__
from .corpus import Dataset, parse_conll, serialize_conll
from .crf import TrainConfig, save_model
from .errors import ConllParseError, DataError, LabelAuditError, NumericError
from .evaluation import evaluate_model, format_report
from .features import DEFAULT_TEMPLATES
from .protocol import DEFAULT_THRESHOLD, run_identify, run_validate
from .reporting import (build_plot_spec, report_from_dict, write_csv,
                        write_json_report)
from .svg import render_svg
from .synth import CorruptionSpec, corrupt_labels, synthesize_corpus
from .training import train
from .util import atomic_write_text


class UsageError(Exception):
    """Bad flags or config file contents."""


@dataclass
class RunConfig:
    """Everything a run needs; embedded verbatim into every report."""

    # input/output paths
    train: str | None = None
    test: str | None = None
    test_good: str | None = None
    test_mistake: str | None = None
    test_corrected: str | None = None
    report: str | None = None
    out: str = "."
    # protocol sizes (None = derived from the data)
    x: int | None = None
    y: int | None = None
    z: int | None = None
    w: int | None = None
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    checkpoints: list[int] | None = None
    threshold: float = DEFAULT_THRESHOLD
    jobs: int = 1
    # trainer hyperparameters
    templates: list[str] = field(default_factory=lambda: list(DEFAULT_TEMPLATES))
    epochs: int = 10
    learning_rate: float = 0.1
    l2: float = 1e-4
    epsilon: float = 1e-8
    seed: int = 0
    shuffle: bool = True
    min_count: int = 1
    # synthetic corpus parameters
    n_train: int = 1861
    n_test: int = 551
    vocab_size: int = 200
    entity_types: list[str] = field(default_factory=lambda: ["PER", "LOC"])
    phrases_per_type: int | None = None
    fraction: float = 0.267
    mode: str = "type-permutation"

    def train_config(self) -> TrainConfig:
        return TrainConfig(epochs=self.epochs,
                           learning_rate=self.learning_rate, l2=self.l2,
                           epsilon=self.epsilon, seed=self.seed,
                           shuffle=self.shuffle, min_count=self.min_count)

    def to_dict(self) -> dict:
        """Config as embedded into reports. Drops `jobs`: worker count is
        an execution detail that must not change any output byte."""
        payload = dataclasses.asdict(self)
        del payload["jobs"]
        return payload


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Merge defaults, config file, and command-line overrides."""
    config = RunConfig()
    if path is not None:
        try:
            with open(path, encoding="utf-8") as handle:
                payload = json.load(handle)
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(payload, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in payload.items():
            if key not in _FIELDS:
                raise UsageError(f"unknown config key {key!r}")
            setattr(config, key, value)
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    return config


def _load_dataset(path: str | None, what: str) -> Dataset:
    if path is None:
        raise UsageError(f"missing required input: {what}")
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise DataError(f"cannot read {what} file: {exc}") from None
    return parse_conll(text, name=os.path.basename(path))


def _write_outputs(report, config: RunConfig) -> None:
    os.makedirs(config.out, exist_ok=True)
    run_config = config.to_dict()
    write_json_report(report, os.path.join(config.out, "report.json"),
                      run_config)
    write_csv(report, os.path.join(config.out, "curves.csv"))
    spec = build_plot_spec(report, run_config)
    render_svg(spec, os.path.join(config.out, "curves.svg"))


def _print_gaps(report) -> None:
    for name, stats in sorted(report.gap_stats.items()):
        if name.endswith(":early-window"):
            g = stats[0]
            print(f"  {name}: mean {g.mean:+.4f} "
                  f"[{g.lo:+.4f}, {g.hi:+.4f}]")
            continue
        early = [g for g in stats if g.checkpoint in set(report.early_window)]
        shown = early if early else list(stats)
        text = "  ".join(f"{g.checkpoint}:{g.mean:+.4f}" for g in shown)
        print(f"  {name}: {text}")


def cmd_identify(config: RunConfig) -> int:
    train_set = _load_dataset(config.train, "--train")
    test_set = _load_dataset(config.test, "--test")
    x = config.x
    if x is None:
        x = min(len(test_set), len(train_set) // 3)
    report = run_identify(train_set, test_set, x, config.seeds,
                          config.checkpoints, config.train_config(),
                          tuple(config.templates), config.threshold,
                          jobs=config.jobs)
    _write_outputs(report, config)
    print(f"verdict: {report.verdict}")
    print(f"early window: {list(report.early_window)}")
    _print_gaps(report)
    return 0


def cmd_validate(config: RunConfig) -> int:
    train_set = _load_dataset(config.train, "--train")
    test_good = _load_dataset(config.test_good, "--test-good")
    test_mistake = _load_dataset(config.test_mistake, "--test-mistake")
    test_corrected = _load_dataset(config.test_corrected, "--test-corrected")
    y = config.y if config.y is not None else len(test_good)
    z = config.z if config.z is not None else len(test_mistake)
    x = config.x
    if x is None:
        x = min(y + z, max(1, len(train_set) // 3))
    w = config.w
    if w is None:
        w = len(train_set) - x - y
    report = run_validate(train_set, test_good, test_mistake, test_corrected,
                          x, y, z, w, config.seeds, config.checkpoints,
                          config.train_config(), tuple(config.templates),
                          config.threshold, jobs=config.jobs)
    _write_outputs(report, config)
    print(f"verdict: {report.verdict}")
    for name, stats in sorted(report.gap_stats.items()):
        print(f"  {name}: final {stats[-1].mean:+.4f} "
              f"[{stats[-1].lo:+.4f}, {stats[-1].hi:+.4f}]")
    return 0


def cmd_synth(config: RunConfig) -> int:
    """Generate train/test files plus corrupted and corrected variants.

    One corpus is synthesized and split, so all parts share a single
    labeling codebook; corruption is then injected into the test part.
    """
    total = config.n_train + config.n_test
    corpus = synthesize_corpus(total, config.vocab_size,
                               config.entity_types, config.seed,
                               phrases_per_type=config.phrases_per_type)
    train_part = corpus.subset(range(config.n_train), "train")
    test_part = corpus.subset(range(config.n_train, total), "test")
    spec = CorruptionSpec(config.fraction, config.mode, config.seed)
    corrupted, indices = corrupt_labels(test_part, spec)
    bad = set(indices)
    good_indices = [i for i in range(len(test_part)) if i not in bad]

    os.makedirs(config.out, exist_ok=True)
    files = {
        "train.conll": train_part,
        "test_clean.conll": test_part,
        "test_corrupted.conll": corrupted,
        "test_good.conll": corrupted.subset(good_indices, "test_good"),
        "test_mistake.conll": corrupted.subset(indices, "test_mistake"),
        "test_corrected.conll": test_part.subset(indices, "test_corrected"),
    }
    for name, dataset in files.items():
        atomic_write_text(os.path.join(config.out, name),
                          serialize_conll(dataset))
    manifest = {
        "tool": {"name": "labelaudit", "version": __version__},
        "run_config": config.to_dict(),
        "sizes": {"train": len(train_part), "test": len(test_part),
                  "corrupted": len(indices)},
        "corrupted_indices": indices,
        "files": sorted(files),
    }
    atomic_write_text(os.path.join(config.out, "manifest.json"),
                      json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(files)} corpus files + manifest to {config.out} "
          f"({len(indices)} of {len(test_part)} test sentences corrupted)")
    return 0


def cmd_eval(config: RunConfig) -> int:
    train_set = _load_dataset(config.train, "--train")
    test_set = _load_dataset(config.test, "--test")
    model = train(train_set, tuple(config.templates), config.train_config())
    result = evaluate_model(model, test_set)
    os.makedirs(config.out, exist_ok=True)
    save_model(model, os.path.join(config.out, "model.json"))
    print(f"{'P':>7s} {'R':>7s} {'F1':>7s}")
    print(f"{100 * result.precision:7.2f} {100 * result.recall:7.2f} "
          f"{100 * result.f1:7.2f}")
    print()
    print(format_report(result))
    return 0


def cmd_plot(config: RunConfig) -> int:
    if config.report is None:
        raise UsageError("missing required input: --report")
    try:
        with open(config.report, encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise DataError(f"cannot read report file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"report file is not valid JSON: {exc}") from None
    report = report_from_dict(payload)
    os.makedirs(config.out, exist_ok=True)
    spec = build_plot_spec(report, run_config=payload.get("run_config"))
    render_svg(spec, os.path.join(config.out, "curves.svg"))
    print(f"wrote {os.path.join(config.out, 'curves.svg')}")
    return 0


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _str_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labelaudit",
        description="Audit label consistency of NER annotation subsets "
                    "via CRF learning curves.")
    parser.add_argument("--version", action="version",
                        version=f"labelaudit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--jobs", type=int, help="worker processes")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--epochs", type=int)
        p.add_argument("--learning-rate", type=float, dest="learning_rate")
        p.add_argument("--l2", type=float)
        p.add_argument("--min-count", type=int, dest="min_count")
        p.add_argument("--templates", type=_str_list)

    p = sub.add_parser("identify", help="detect test/train inconsistency")
    add_common(p)
    p.add_argument("--train")
    p.add_argument("--test")
    p.add_argument("--x", type=int)
    p.add_argument("--seeds", type=_int_list)
    p.add_argument("--checkpoints", type=_int_list)
    p.add_argument("--threshold", type=float)

    p = sub.add_parser("validate", help="validate a corrected test set")
    add_common(p)
    p.add_argument("--train")
    p.add_argument("--test-good", dest="test_good")
    p.add_argument("--test-mistake", dest="test_mistake")
    p.add_argument("--test-corrected", dest="test_corrected")
    for size in "xyzw":
        p.add_argument(f"--{size}", type=int)
    p.add_argument("--seeds", type=_int_list)
    p.add_argument("--checkpoints", type=_int_list)
    p.add_argument("--threshold", type=float)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    add_common(p)
    p.add_argument("--n-train", type=int, dest="n_train")
    p.add_argument("--n-test", type=int, dest="n_test")
    p.add_argument("--vocab-size", type=int, dest="vocab_size")
    p.add_argument("--entity-types", type=_str_list, dest="entity_types")
    p.add_argument("--phrases-per-type", type=int, dest="phrases_per_type")
    p.add_argument("--fraction", type=float)
    p.add_argument("--mode")

    p = sub.add_parser("eval", help="train once and report span P/R/F1")
    add_common(p)
    p.add_argument("--train")
    p.add_argument("--test")

    p = sub.add_parser("plot", help="re-render the SVG from a report JSON")
    add_common(p)
    p.add_argument("--report")
    return parser


COMMANDS = {
    "identify": cmd_identify,
    "validate": cmd_validate,
    "synth": cmd_synth,
    "eval": cmd_eval,
    "plot": cmd_plot,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; this tool reserves 2 for
        # data errors, so remap
        return 0 if exc.code in (0, None) else 1
    overrides = {key: value for key, value in vars(args).items()
                 if key in _FIELDS}
    try:
        config = load_config(args.config, overrides)
        return COMMANDS[args.command](config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConllParseError, DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except LabelAuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
