"""
Command-line front end

    python -m loster cluster --data X_TRAIN.tsv --test X_TEST.tsv --k 6 --seed 7
    python -m loster pretrain --data X_TRAIN.tsv --out runs/views
    python -m loster eval --labels pred.csv --truth truth.csv
    python -m loster synth --k 3 --n 50 --len 64 --out blob.tsv
    python -m loster gradcheck
    python -m loster bench --data X_TRAIN.tsv --k 6

Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage problem
(bad flag, missing file, invalid configuration or input format).
"""

import argparse
import copy
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from loster import __version__
from loster.augment import augment_dataset
from loster.cli.config_file import (
    ResolvedConfig,
    parse_assignment,
    read_config_file,
    resolve_configs,
)
from loster.cli.gradcheck import THRESHOLD, gradcheck_command
from loster.cli.manifest import RunManifest
from loster.concrete import GumbelSampler
from loster.dataio import (
    RunRecord,
    TimeSeriesDataset,
    gen_synthetic,
    labels_array,
    load_ucr,
    read_labels,
    save_results,
    write_training_log,
    write_ucr,
    znorm_dataset,
)
from loster.densenet import ViewModel, load_checkpoint, save_checkpoint
from loster.errors import (
    ConfigError,
    DataFormatError,
    InvalidArgumentError,
    LosterError,
)
from loster.metrics import evaluate
from loster.trainer import (
    cluster_series,
    init_state,
    joint_epoch,
    pretrain_views,
    seed_streams,
)

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "LOSTER_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "runs"
THREAD_VARIABLES = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")
DELIMITERS = {"tab": "\t", "comma": ",", "whitespace": None}
CHECKPOINT_NAMES = {"original": "original.npz", "augmented": "augmented.npz"}

# flag attribute -> configuration key
FLAG_SETTINGS = {
    "k": "k",
    "seed": "seed",
    "pretrain_epochs": "pretrain_epochs",
    "max_epochs": "max_epochs",
    "batch_size": "batch_size",
    "hidden_dim": "hidden_dim",
}


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))


def apply_thread_limit(threads: Optional[int]) -> None:
    """
    Ask the linear-algebra backends for a thread count

    Takes effect for backends not loaded yet; `python -m loster` applies it
    before numpy is imported.
    """
    if threads is None:
        return
    if threads < 1:
        raise ConfigError("--threads must be at least 1")
    for variable in THREAD_VARIABLES:
        os.environ[variable] = str(threads)
    if threads > 1:
        logger.warning(
            "running linear algebra on %d threads; "
            "results may not be bitwise reproducible",
            threads,
        )


def configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("loster").setLevel(level)


def resolve_settings(args: argparse.Namespace) -> ResolvedConfig:
    """Defaults, then the config file, then --set overrides, then flags"""
    values: Dict[str, Any] = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for assignment in getattr(args, "set", None) or []:
        values.update(parse_assignment(assignment))
    for attribute, key in FLAG_SETTINGS.items():
        value = getattr(args, attribute, None)
        if value is not None:
            values[key] = value
    if getattr(args, "no_progress", False):
        values["progress"] = False
    return resolve_configs(values)


def load_dataset(args: argparse.Namespace) -> TimeSeriesDataset:
    for path in [args.data] + ([args.test] if args.test else []):
        if not Path(path).is_file():
            raise FileNotFoundError(f"no such file: {path}")
    dataset = load_ucr(args.data, args.test, DELIMITERS[args.delimiter])
    return znorm_dataset(dataset)


def data_paths(args: argparse.Namespace) -> List[str]:
    return [str(path) for path in (args.data, getattr(args, "test", None)) if path]


def output_dir(args: argparse.Namespace) -> Path:
    return Path(args.out) if args.out else default_output_dir()


def load_pretrained(directory: str) -> Tuple[ViewModel, ViewModel]:
    directory = Path(directory)
    paths = [directory / CHECKPOINT_NAMES[view] for view in ("original", "augmented")]
    for path in paths:
        if not path.is_file():
            raise FileNotFoundError(f"no checkpoint at {path}")
    return load_checkpoint(paths[0]), load_checkpoint(paths[1])


def command_cluster(args: argparse.Namespace) -> int:
    """Full pipeline, once per seed; writes results, labels, log and manifest"""
    settings = resolve_settings(args)
    if settings.k is None:
        raise ConfigError(
            "the number of clusters is required (--k or k = ... in --config)"
        )
    if args.repeats < 1:
        raise ConfigError("--repeats must be at least 1")
    dataset = load_dataset(args)
    pretrained = load_pretrained(args.pretrained) if args.pretrained else None
    out = output_dir(args)
    scores: List[Dict[str, float]] = []
    for repeat in range(args.repeats):
        run_settings = settings.for_seed(settings.train.seed + repeat)
        seed = run_settings.train.seed
        run_dir = out if args.repeats == 1 else out / f"seed_{seed}"
        models = copy.deepcopy(pretrained) if pretrained is not None else None
        run = cluster_series(
            dataset.series, settings.k, run_settings.train, run_settings.augment, models
        )
        record = RunRecord(
            dataset=dataset.name,
            seed=seed,
            config=run_settings.to_dict(),
            labels=[int(label) for label in run.assignment.labels],
            history=[asdict(epoch) for epoch in run.history],
            timings={
                "pretrain_seconds": run.pretrain_seconds,
                "joint_seconds": run.joint_seconds,
            },
        )
        line = f"seed {seed}: {run.epochs} epochs"
        if dataset.labels is not None and dataset.n >= 2:
            score = evaluate(dataset.labels, run.labels)
            record.ri, record.nmi = score["ri"], score["nmi"]
            scores.append(score)
            line += f", RI={score['ri']:.4f} NMI={score['nmi']:.4f}"
        save_results(record, run_dir / "results.json")
        write_training_log(run.history, run_dir / "training_log.csv")
        RunManifest(
            "cluster",
            args.config,
            run_settings.to_dict(),
            data_paths(args),
            str(run_dir),
            seed,
            asdict(run.cluster),
        ).write(run_dir)
        print(line)
    if args.repeats > 1 and scores:
        summary = {
            "seeds": [settings.train.seed + repeat for repeat in range(args.repeats)],
            "ri": [score["ri"] for score in scores],
            "nmi": [score["nmi"] for score in scores],
            "mean_ri": float(np.mean([score["ri"] for score in scores])),
            "mean_nmi": float(np.mean([score["nmi"] for score in scores])),
        }
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "summary.json", "w", encoding="utf-8") as handle:
            json.dump(summary, handle, indent=2)
        print(
            f"mean over {args.repeats} runs: "
            f"RI={summary['mean_ri']:.4f} NMI={summary['mean_nmi']:.4f}"
        )
    return 0


def command_pretrain(args: argparse.Namespace) -> int:
    """Pretrain both views and write one checkpoint per view"""
    settings = resolve_settings(args)
    dataset = load_dataset(args)
    X_a = augment_dataset(dataset.series, settings.augment)
    init_rng = seed_streams(settings.train.seed, 3)[0]
    model, model_aug = pretrain_views(dataset.series, X_a, settings.train, init_rng)
    out = output_dir(args)
    for view_model, name in ((model, "original"), (model_aug, "augmented")):
        print(save_checkpoint(view_model, out / CHECKPOINT_NAMES[name]))
    cluster = None
    if settings.k is not None:
        cluster = asdict(settings.train.cluster_config(settings.k))
    RunManifest(
        "pretrain",
        args.config,
        settings.to_dict(),
        data_paths(args),
        str(out),
        settings.train.seed,
        cluster,
    ).write(out)
    return 0


def command_eval(args: argparse.Namespace) -> int:
    """Print RI and NMI of a labeling against ground truth"""
    for path in (args.labels, args.truth):
        if not Path(path).is_file():
            raise FileNotFoundError(f"no such file: {path}")
    predicted = labels_array(read_labels(args.labels))
    truth = labels_array(read_labels(args.truth))
    if len(predicted) != len(truth):
        raise InvalidArgumentError(
            f"{len(predicted)} predicted labels for {len(truth)} ground-truth labels"
        )
    score = evaluate(truth, predicted)
    print(f"RI: {score['ri']:.6f}")
    print(f"NMI: {score['nmi']:.6f}")
    return 0


def command_synth(args: argparse.Namespace) -> int:
    """Write a sinusoid-frequency dataset in UCR format"""
    dataset = gen_synthetic(
        args.n, args.len, args.k, args.noise, np.random.default_rng(args.seed)
    )
    print(write_ucr(dataset, args.out, DELIMITERS[args.delimiter] or " "))
    return 0


def command_gradcheck(args: argparse.Namespace) -> int:
    return gradcheck_command(
        n=args.n,
        length=args.len,
        hidden_dim=args.hidden,
        k=args.k,
        seed=args.seed,
        threshold=args.threshold,
    )


def command_bench(args: argparse.Namespace) -> int:
    """Time joint epochs after a short pretraining"""
    values: Dict[str, Any] = {
        "pretrain_epochs": args.pretrain_epochs,
        "progress": False,
    }
    if args.batch_size is not None:
        values["batch_size"] = args.batch_size
    if args.seed is not None:
        values["seed"] = args.seed
    settings = resolve_configs(values)
    if args.data:
        dataset = load_dataset(args)
    else:
        dataset = znorm_dataset(
            gen_synthetic(100, 60, 6, 0.5, np.random.default_rng(settings.train.seed))
        )
    k = args.k or dataset.n_classes
    if k < 1:
        raise ConfigError("the number of clusters is required (--k)")
    cfg = settings.train
    init_rng, train_rng, noise_rng = seed_streams(cfg.seed, 3)
    X_a = augment_dataset(dataset.series, settings.augment)
    started = time.perf_counter()
    model, model_aug = pretrain_views(dataset.series, X_a, cfg, init_rng)
    elapsed = time.perf_counter() - started
    print(f"pretraining ({cfg.pretrain_epochs} epochs per view): {elapsed:.3f}s")
    sampler = GumbelSampler(noise_rng)
    state = init_state(
        model, model_aug, dataset.series, X_a, k, cfg, train_rng, sampler
    )
    records = []
    for _ in range(args.epochs):
        record = joint_epoch(state, dataset.series, X_a, cfg)
        records.append(record)
        print(f"epoch {record.epoch}: {record.seconds:.3f}s")
    if records:
        print(f"mean seconds per epoch: {np.mean([r.seconds for r in records]):.3f}")
    path = write_training_log(records, output_dir(args) / "bench.csv")
    print(path)
    return 0


def _add_data_arguments(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--data", required=required, help="UCR train file")
    parser.add_argument("--test", help="UCR test file appended to the data")
    parser.add_argument(
        "--delimiter", choices=sorted(DELIMITERS), default="tab", help="field separator"
    )


def _add_setting_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument(
        "--set", action="append", metavar="KEY=VALUE", help="override one setting"
    )
    parser.add_argument("--seed", type=int)
    parser.add_argument("--pretrain-epochs", dest="pretrain_epochs", type=int)
    parser.add_argument("--max-epochs", dest="max_epochs", type=int)
    parser.add_argument("--batch-size", dest="batch_size", type=int)
    parser.add_argument("--hidden-dim", dest="hidden_dim", type=int)
    parser.add_argument("--no-progress", dest="no_progress", action="store_true")
    parser.add_argument(
        "--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or runs/)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loster", description="Long-sequence time series clustering"
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    parser.add_argument("--threads", type=int, help="linear-algebra threads")
    commands = parser.add_subparsers(dest="command", required=True)

    cluster = commands.add_parser("cluster", help="cluster a UCR dataset")
    _add_data_arguments(cluster)
    _add_setting_arguments(cluster)
    cluster.add_argument("--k", type=int, help="number of clusters")
    cluster.add_argument(
        "--repeats", type=int, default=1, help="runs with seeds seed, seed+1, ..."
    )
    cluster.add_argument(
        "--pretrained", help="directory written by the pretrain command"
    )
    cluster.set_defaults(handler=command_cluster)

    pretrain = commands.add_parser("pretrain", help="pretrain both views")
    _add_data_arguments(pretrain)
    _add_setting_arguments(pretrain)
    pretrain.set_defaults(handler=command_pretrain)

    evaluation = commands.add_parser("eval", help="RI and NMI of a labeling")
    evaluation.add_argument("--labels", required=True, help="predicted labels CSV")
    evaluation.add_argument("--truth", required=True, help="ground-truth labels CSV")
    evaluation.set_defaults(handler=command_eval)

    synth = commands.add_parser("synth", help="generate a sinusoid dataset")
    synth.add_argument("--k", type=int, default=3)
    synth.add_argument("--n", type=int, default=50, help="series per class")
    synth.add_argument("--len", type=int, default=64)
    synth.add_argument("--noise", type=float, default=0.1)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument(
        "--delimiter", choices=sorted(DELIMITERS), default="tab", help="field separator"
    )
    synth.add_argument("--out", required=True, help="UCR file to write")
    synth.set_defaults(handler=command_synth)

    gradcheck = commands.add_parser(
        "gradcheck", help="finite-difference gradient suite"
    )
    gradcheck.add_argument("--n", type=int, default=8)
    gradcheck.add_argument("--len", type=int, default=12)
    gradcheck.add_argument("--hidden", type=int, default=6)
    gradcheck.add_argument("--k", type=int, default=3)
    gradcheck.add_argument("--seed", type=int, default=0)
    gradcheck.add_argument("--threshold", type=float, default=THRESHOLD)
    gradcheck.set_defaults(handler=command_gradcheck)

    bench = commands.add_parser("bench", help="time joint epochs")
    _add_data_arguments(bench, required=False)
    bench.add_argument("--k", type=int)
    bench.add_argument("--epochs", type=int, default=3)
    bench.add_argument("--pretrain-epochs", dest="pretrain_epochs", type=int, default=1)
    bench.add_argument("--batch-size", dest="batch_size", type=int)
    bench.add_argument("--seed", type=int)
    bench.add_argument("--out", help="directory for bench.csv")
    bench.set_defaults(handler=command_bench)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Execute one subcommand

    Parameters:
        argv (Optional[Sequence[str]]): Arguments without the program name

    Returns:
        int: Exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        return int(exit_request.code or 0)
    configure_logging(args.verbose, args.quiet)
    try:
        apply_thread_limit(args.threads)
        return args.handler(args)
    except (ConfigError, DataFormatError, FileNotFoundError) as error:
        print(f"loster {args.command}: error: {error}", file=sys.stderr)
        return 2
    except (LosterError, OSError) as error:
        print(f"loster {args.command}: {error}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
