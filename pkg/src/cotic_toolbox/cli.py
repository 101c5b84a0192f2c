import argparse
import sys
from os import makedirs
from os.path import abspath, dirname, join
from typing import Any, Callable, Dict, List, Optional

from cotic_toolbox.config import Settings, resolve
from cotic_toolbox.evaluation.ablation import ablation_sweep, parse_values, write_sweep
from cotic_toolbox.evaluation.analysis_tools import plot_intensity
from cotic_toolbox.evaluation.intensity_export import export_intensity
from cotic_toolbox.evaluation.metrics import evaluate
from cotic_toolbox.events.batching import split
from cotic_toolbox.events.csv_io import load_csv, write_csv
from cotic_toolbox.exceptions import (
    ConfigurationError,
    ContractError,
    DataFormatError,
    DimensionError,
    DomainError,
    EmptyDatasetError,
    FileNotFound,
    InsufficientDataError,
    IntegrityError,
    NoPredictionsError,
    SchemaMismatch,
    TrainingDiverged,
    UnknownFileExtension,
    UnstableParameters,
)
from cotic_toolbox.model.checkpoint import load_checkpoint, save_checkpoint
from cotic_toolbox.model.cotic import CoticModel
from cotic_toolbox.synthetic.generator import SequenceGenerator
from cotic_toolbox.training.trainer import Trainer

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DIVERGED = 4

CONFIG_ERRORS = (ConfigurationError, UnknownFileExtension, UnstableParameters)
DATA_ERRORS = (
    FileNotFound,
    DataFormatError,
    EmptyDatasetError,
    InsufficientDataError,
    SchemaMismatch,
    IntegrityError,
    NoPredictionsError,
    DomainError,
    DimensionError,
    ContractError,
    OSError,
)


def _target(settings: Settings, default_name: str) -> str:
    """
    Path of the main artifact of a command, its folder is created if needed
    """
    run = settings.run
    path = abspath(run.output) if run.output is not None else abspath(join(run.output_dir, default_name))
    makedirs(dirname(path), exist_ok=True)
    return path


def _echo(settings: Settings, folder: str) -> None:
    settings.save(join(folder, "config.yaml"))


def _require(value: Optional[str], name: str) -> str:
    if value is None:
        raise ConfigurationError(f"the '{name}' setting is required by this command")
    return value


def cmd_generate(settings: Settings) -> int:
    """
    Simulates `n_sequences` Hawkes sequences and writes them as an event CSV
    """
    run = settings.run
    path = _target(settings, "events.csv")
    generator = SequenceGenerator(
        settings.hawkes_params(), run.horizon, run.n_sequences, run.seed, verbose=settings.train_config().verbose
    )
    generator.save_dataset(path, cores=run.cores)
    _echo(settings, dirname(path))
    return EXIT_OK


def cmd_train(settings: Settings) -> int:
    """
    Splits the data 8:1:1, trains a model and writes the best checkpoint, the history, the
    three splits and the config echo to `output_dir`
    """
    run = settings.run
    dataset = load_csv(_require(run.data, "data"))
    train, val, test = split(dataset, run.split_ratios, seed=run.seed)

    folder = abspath(run.output_dir)
    makedirs(folder, exist_ok=True)
    for name, part in zip(("train", "val", "test"), (train, val, test)):
        write_csv(part, join(folder, f"{name}.csv"))
    _echo(settings, folder)

    model = CoticModel(settings.model_config(dataset.num_types))
    metadata: Dict[str, Any] = {"time_scale": dataset.time_scale, "num_types": dataset.num_types}
    checkpoint = join(folder, "checkpoint.h5")
    trainer = Trainer(model, settings.train_config(), checkpoint, metadata)

    try:
        history = trainer.fit(train, val)
    except TrainingDiverged as error:
        error.history.save(join(folder, "history.jsonl"))
        raise

    history.save(join(folder, "history.jsonl"))
    save_checkpoint(model, checkpoint, metadata)
    return EXIT_OK


def _load_for_inference(settings: Settings):
    run = settings.run
    model, metadata = load_checkpoint(_require(run.checkpoint, "checkpoint"))
    dataset = load_csv(
        _require(run.data, "data"),
        time_scale=metadata.get("time_scale"),
        num_types=model.num_types,
    )
    return model, dataset


def cmd_evaluate(settings: Settings) -> int:
    """
    Evaluates a checkpoint on an event CSV and writes the metrics report as JSON
    """
    model, dataset = _load_for_inference(settings)
    path = _target(settings, "metrics.json")
    try:
        report = evaluate(model, dataset, settings.run.eval_n_mc, settings.run.seed)
    except NoPredictionsError as error:
        error.report.save(path)
        raise
    report.save(path)
    _echo(settings, dirname(path))
    return EXIT_OK


def cmd_export(settings: Settings) -> int:
    """
    Writes the intensity curve of one sequence of an event CSV as seen by a checkpoint
    """
    run = settings.run
    model, dataset = _load_for_inference(settings)

    if run.seq_id is None:
        sequence = dataset[0]
    else:
        matches = [s for s in dataset if s.seq_id == run.seq_id]
        if not matches:
            raise ConfigurationError(f"no sequence with identifier '{run.seq_id}'")
        sequence = matches[0]

    path = _target(settings, f"intensity_{sequence.seq_id}.csv")
    curve = export_intensity(model, sequence, run.grid_size, path)
    if run.plot:
        plot_intensity(curve, sequence, path=path.rsplit(".", 1)[0] + ".png")
    _echo(settings, dirname(path))
    return EXIT_OK


def cmd_sweep(settings: Settings) -> int:
    """
    Runs an ablation sweep over one hyperparameter and writes the table as CSV
    """
    run = settings.run
    dataset = load_csv(_require(run.data, "data"))
    values = run.values
    if isinstance(values, str):
        values = parse_values(run.axis, values)
    table = ablation_sweep(
        dataset,
        run.axis,
        values,
        settings.model_config(dataset.num_types),
        settings.train_config(),
        split_seed=run.seed,
        n_mc=run.eval_n_mc,
        eval_seed=run.seed,
        verbose=settings.train_config().verbose,
    )
    path = _target(settings, f"sweep_{run.axis}.csv")
    write_sweep(table, path)
    _echo(settings, dirname(path))
    return EXIT_OK


HANDLERS: Dict[str, Callable[[Settings], int]] = {
    "generate": cmd_generate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "export-intensity": cmd_export,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cotic", description="Continuous convolutional modelling of marked event sequences"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat YAML configuration file")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="override one configuration key (repeatable)",
    )
    common.add_argument("--seed", type=int)
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--output", help="path of the main artifact")
    common.add_argument("--verbose", action="store_true", default=None)

    generate = commands.add_parser("generate", parents=[common], help="simulate Hawkes sequences")
    generate.add_argument("--baseline", type=float)
    generate.add_argument("--excitation", type=float)
    generate.add_argument("--decay", type=float)
    generate.add_argument("--horizon", type=float)
    generate.add_argument("--n-sequences", dest="n_sequences", type=int)
    generate.add_argument("--cores", type=int)

    train = commands.add_parser("train", parents=[common], help="train a model on an event CSV")
    train.add_argument("--data")
    train.add_argument("--epochs", dest="epochs_max", type=int)
    train.add_argument("--warmup-epochs", dest="warmup_epochs", type=int)
    train.add_argument("--layers", dest="num_layers", type=int)
    train.add_argument("--kernel-size", dest="kernel_size", type=int)
    train.add_argument("--activation", choices=["leaky_relu", "sine"])

    evaluate_ = commands.add_parser("evaluate", parents=[common], help="evaluate a checkpoint")
    evaluate_.add_argument("--checkpoint")
    evaluate_.add_argument("--data")
    evaluate_.add_argument("--n-mc", dest="eval_n_mc", type=int)

    export = commands.add_parser("export-intensity", parents=[common], help="export an intensity curve")
    export.add_argument("--checkpoint")
    export.add_argument("--data")
    export.add_argument("--seq-id", dest="seq_id")
    export.add_argument("--grid", dest="grid_size", type=int)
    export.add_argument("--plot", action="store_true", default=None)

    sweep = commands.add_parser("sweep", parents=[common], help="run an ablation sweep")
    sweep.add_argument("--data")
    sweep.add_argument("--axis", choices=["layers", "kernel_size", "activation"])
    sweep.add_argument("--values", help="comma separated values")
    sweep.add_argument("--epochs", dest="epochs_max", type=int)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the `cotic` command. Returns the exit code: 0 on success, 2 on a
    configuration error, 3 on a data error, 4 on a numerical divergence.
    """
    args = vars(build_parser().parse_args(argv))

    command = args.pop("command")
    config_path = args.pop("config")
    overrides = args.pop("overrides")
    args["command"] = command

    try:
        settings = resolve(config_path, overrides, args)
        return HANDLERS[command](settings)

    except CONFIG_ERRORS as error:
        print(f"configuration error: {error}", file=sys.stderr)
        return EXIT_CONFIG

    except TrainingDiverged as error:
        print(f"training diverged: {error}", file=sys.stderr)
        return EXIT_DIVERGED

    except DATA_ERRORS as error:
        print(f"data error: {error}", file=sys.stderr)
        return EXIT_DATA

    except ValueError as error:
        print(f"configuration error: {error}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
