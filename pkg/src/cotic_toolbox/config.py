from __future__ import annotations

from dataclasses import dataclass, field, fields
from os.path import isfile, splitext
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import yaml

from cotic_toolbox.exceptions import ConfigurationError, FileNotFound, UnknownFileExtension
from cotic_toolbox.model.cotic import ModelConfig
from cotic_toolbox.synthetic.hawkes import HawkesParams
from cotic_toolbox.training.trainer import TrainConfig

COMMANDS = ("generate", "train", "evaluate", "export-intensity", "sweep")


@dataclass
class RunConfig:
    """
    Settings of a command-line run that are not model or training hyperparameters.

    Parameters
    ----------
    command: str
        the command the configuration was resolved for
    data: Optional[str]
        the event CSV file read by `train`, `evaluate`, `export-intensity` and `sweep`
    checkpoint: Optional[str]
        the checkpoint read by `evaluate` and `export-intensity`
    output_dir: str
        the folder receiving the artifacts (default: ".")
    output: Optional[str]
        the path of the main artifact of `generate`, `evaluate`, `export-intensity` and
        `sweep`. If None a default name inside `output_dir` is used
    seed: int
        the seed shared by simulation, split, initialization, training and evaluation
    split_ratios: List[float]
        the train/validation/test ratios (default: 8:1:1)
    baseline, excitation, decay, type_probabilities: float, float, float, List[float]
        the Hawkes parameters used by `generate`
    horizon: float
        the observation window of the generated sequences
    n_sequences: int
        the number of generated sequences
    cores: int
        the worker processes used by `generate` (-1 for all the cores)
    eval_n_mc: int
        the Monte-Carlo samples per sequence used for evaluation
    seq_id: Optional[str]
        the sequence exported by `export-intensity` (the first one if None)
    grid_size: int
        the number of points of the exported intensity grid
    plot: bool
        if set to True `export-intensity` also saves a PNG plot of the curve
    axis: str
        the hyperparameter swept by `sweep`
    values: List[Any]
        the values taken by the swept hyperparameter
    """

    command: str = "train"
    data: Optional[str] = None
    checkpoint: Optional[str] = None
    output_dir: str = "."
    output: Optional[str] = None
    seed: int = 0
    split_ratios: List[float] = field(default_factory=lambda: [8.0, 1.0, 1.0])
    baseline: float = 0.2
    excitation: float = 0.8
    decay: float = 1.0
    type_probabilities: List[float] = field(default_factory=lambda: [1.0])
    horizon: float = 100.0
    n_sequences: int = 100
    cores: int = 1
    eval_n_mc: int = 100
    seq_id: Optional[str] = None
    grid_size: int = 200
    plot: bool = False
    axis: str = "layers"
    values: List[Any] = field(default_factory=lambda: [1, 2, 3, 4])

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command '{self.command}'")
        if self.seq_id is not None:
            self.seq_id = str(self.seq_id)


RUN_KEYS = [f.name for f in fields(RunConfig)]
MODEL_KEYS = [f.name for f in fields(ModelConfig) if f.name not in ("num_types", "seed")]
TRAIN_KEYS = [f.name for f in fields(TrainConfig) if f.name != "seed"]


def _plain(value: Any) -> Any:
    return list(value) if isinstance(value, tuple) else value


def default_values() -> Dict[str, Any]:
    """
    The documented default of every configuration key, as a flat dictionary
    """
    values = {k: _plain(v) for k, v in RunConfig().__dict__.items()}
    model = ModelConfig(num_types=1)
    values.update({k: _plain(getattr(model, k)) for k in MODEL_KEYS})
    train = TrainConfig()
    values.update({k: getattr(train, k) for k in TRAIN_KEYS})
    return values


def check_keys(values: Mapping[str, Any]) -> None:
    """
    Raises
    ------
    ConfigurationError
        exception raised if a key is not a configuration field
    """
    known = set(RUN_KEYS) | set(MODEL_KEYS) | set(TRAIN_KEYS)
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigurationError("unknown key(s) {}".format(", ".join(unknown)))


def load_config(path: str) -> Dict[str, Any]:
    """
    Reads a flat YAML configuration file

    Raises
    ------
    UnknownFileExtension
        exception raised if the file is not a `.yaml` or `.yml` file
    FileNotFound
        exception raised if the file does not exist
    ConfigurationError
        exception raised if the file is not a mapping or holds unknown keys
    """
    extension = splitext(path)[1].lower()
    if extension not in (".yaml", ".yml"):
        raise UnknownFileExtension(extension)

    if not isfile(path):
        raise FileNotFound(path)

    with open(path, "r") as file:
        try:
            content = yaml.safe_load(file)
        except yaml.YAMLError as error:
            raise ConfigurationError(f"cannot parse '{path}' ({error})")

    if content is None:
        return {}

    if not isinstance(content, dict):
        raise ConfigurationError(f"'{path}' must hold a mapping of keys to values")

    check_keys(content)
    return content


def parse_override(text: str) -> Tuple[str, Any]:
    """
    Parses a `KEY=VALUE` override, the value being read as a YAML scalar or list
    """
    if "=" not in text:
        raise ConfigurationError(f"override '{text}' is not of the form KEY=VALUE")
    key, raw = text.split("=", 1)
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        value = raw
    return key.strip(), value


class Settings:
    """
    Fully resolved configuration of a run: defaults, overridden by the configuration file,
    overridden by the command-line values.

    Parameters
    ----------
    layers: Sequence[Mapping[str, Any]]
        the successive overrides, lowest priority first

    Raises
    ------
    ConfigurationError
        exception raised on unknown keys or invalid run settings
    """

    def __init__(self, *layers: Mapping[str, Any]) -> None:

        values = default_values()
        for layer in layers:
            check_keys(layer)
            values.update(layer)

        try:
            self.__run = RunConfig(**{k: values[k] for k in RUN_KEYS})
        except TypeError as error:
            raise ConfigurationError(str(error))

        self.__values = values

    @property
    def run(self) -> RunConfig:
        return self.__run

    def to_dict(self) -> Dict[str, Any]:
        return {k: _plain(v) for k, v in self.__values.items()}

    def model_config(self, num_types: int) -> ModelConfig:
        """
        The model hyperparameters for a dataset with `num_types` event types
        """
        try:
            return ModelConfig(
                num_types=num_types,
                seed=self.__run.seed,
                **{k: self.__values[k] for k in MODEL_KEYS},
            )
        except (TypeError, ValueError) as error:
            raise ConfigurationError(str(error))

    def train_config(self) -> TrainConfig:
        try:
            return TrainConfig(seed=self.__run.seed, **{k: self.__values[k] for k in TRAIN_KEYS})
        except (TypeError, ValueError) as error:
            raise ConfigurationError(str(error))

    def hawkes_params(self) -> HawkesParams:
        run = self.__run
        try:
            return HawkesParams(run.baseline, run.excitation, run.decay, run.type_probabilities)
        except (TypeError, ValueError) as error:
            raise ConfigurationError(str(error))

    def save(self, path: str) -> None:
        """
        Writes the resolved configuration (the config echo) to a YAML file
        """
        with open(path, "w") as file:
            yaml.safe_dump(self.to_dict(), file, sort_keys=True)


def resolve(
    config_path: Optional[str] = None,
    overrides: Sequence[str] = (),
    flags: Optional[Mapping[str, Any]] = None,
) -> Settings:
    """
    Resolves the settings of a run from an optional YAML file, `KEY=VALUE` overrides and
    command-line flags (flags win, unset flags are None and ignored)
    """
    from_file = load_config(config_path) if config_path is not None else {}
    from_overrides = dict(parse_override(o) for o in overrides)
    from_flags = {k: v for k, v in (flags or {}).items() if v is not None}
    return Settings(from_file, from_overrides, from_flags)
