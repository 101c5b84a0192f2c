from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from cotic_toolbox.events.sequence import EventSequence
from cotic_toolbox.exceptions import ConfigurationError, DomainError
from cotic_toolbox.model.conv import ContConvLayer
from cotic_toolbox.model.layers import ACTIVATIONS, MLP, Embedding, Linear
from cotic_toolbox.ndarr.tensor import Tensor
from cotic_toolbox.utils import doubling_dilations

HEAD_PREFIXES = ("time_head.", "type_head.")


@dataclass
class ModelConfig:
    """
    Hyperparameters of a `CoticModel`.

    Parameters
    ----------
    num_types: int
        the number of event types K
    embedding_dim: int
        the width of the mark embeddings (default: 32)
    hidden_dim: int
        the number of channels of every convolution (default: 32)
    num_layers: int
        the number L of stacked convolutions (default: 3)
    kernel_size: Optional[int]
        the number of (dilated) past events summed by each convolution, None for the whole
        history (default: 5)
    dilations: Optional[List[int]]
        the dilation of each layer. If None (default) the dilations double at each layer
    kernel_hidden: Tuple[int, ...]
        the hidden widths of the kernel networks (default: (16, 16))
    activation: str
        the activation of the kernel networks, `leaky_relu` (default) or `sine`
    kernel_slope: float
        the negative slope of the kernel networks leaky ReLU (default: 0.1)
    sine_frequency: float
        the frequency of the sine activation (default: 1.0)
    sigma_slope: float
        the negative slope of the leaky ReLU between layers and inside the heads (default: 0.01)
    head_hidden: Tuple[int, ...]
        the hidden widths of the two prediction heads (default: (64, 64))
    intensity_kernel_size: Optional[int]
        the kernel size of the intensity convolution. If None (default) `kernel_size` is used
    intensity_dilation: Optional[int]
        the dilation of the intensity convolution. If None (default) the dilation of the last
        backbone layer is used (1 without backbone layers)
    seed: int
        the seed of the parameter initialization (default: 0)
    """

    num_types: int
    embedding_dim: int = 32
    hidden_dim: int = 32
    num_layers: int = 3
    kernel_size: Optional[int] = 5
    dilations: Optional[List[int]] = None
    kernel_hidden: Tuple[int, ...] = (16, 16)
    activation: str = "leaky_relu"
    kernel_slope: float = 0.1
    sine_frequency: float = 1.0
    sigma_slope: float = 0.01
    head_hidden: Tuple[int, ...] = (64, 64)
    intensity_kernel_size: Optional[int] = None
    intensity_dilation: Optional[int] = None
    seed: int = 0

    def __post_init__(self) -> None:

        self.kernel_hidden = tuple(int(w) for w in self.kernel_hidden)
        self.head_hidden = tuple(int(w) for w in self.head_hidden)

        if self.num_types < 1:
            raise ConfigurationError("num_types must be a positive integer")

        if self.embedding_dim < 1 or self.hidden_dim < 1:
            raise ConfigurationError("embedding_dim and hidden_dim must be positive integers")

        if self.num_layers < 0:
            raise ConfigurationError("num_layers cannot be negative")

        for name in ("kernel_size", "intensity_kernel_size", "intensity_dilation"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigurationError(f"{name} must be a positive integer or None")

        if self.dilations is not None:
            self.dilations = [int(d) for d in self.dilations]
            if len(self.dilations) != self.num_layers or any(d < 1 for d in self.dilations):
                raise ConfigurationError(
                    "dilations must hold one positive integer per layer ({} given for {} layers)".format(
                        len(self.dilations), self.num_layers
                    )
                )

        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(
                f"'{self.activation}' is not a valid activation, use one of {ACTIVATIONS}"
            )

        if any(w < 1 for w in self.kernel_hidden + self.head_hidden):
            raise ConfigurationError("hidden widths must be positive integers")

    @property
    def layer_dilations(self) -> List[int]:
        """
        The dilation actually used by each backbone layer
        """
        return list(self.dilations) if self.dilations is not None else doubling_dilations(self.num_layers)

    def to_dict(self) -> Dict[str, Any]:
        """
        Plain-python (JSON and YAML friendly) representation of the configuration
        """
        values = asdict(self)
        values["kernel_hidden"] = list(self.kernel_hidden)
        values["head_hidden"] = list(self.head_hidden)
        return values

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> ModelConfig:
        return cls(**values)


class IntensityCurve:
    """
    Per-type intensities of a marked point process evaluated on a grid of times.

    Parameters
    ----------
    grid: numpy.ndarray
        the strictly increasing evaluation times
    values: numpy.ndarray
        the `(len(grid), K)` positive intensities

    Raises
    ------
    ValueError
        exception raised if the grid is not strictly increasing, if the shapes disagree or if
        an intensity is not positive
    """

    def __init__(self, grid: np.ndarray, values: np.ndarray) -> None:

        grid = np.array(grid, dtype=np.float64).reshape(-1)
        values = np.array(values, dtype=np.float64)

        if values.ndim != 2 or values.shape[0] != len(grid):
            raise ValueError("The intensity values must be a (len(grid), K) matrix.")

        if np.any(np.diff(grid) <= 0):
            raise ValueError("The grid must be strictly increasing.")

        if not np.all(values > 0):
            raise ValueError("Intensities must be positive.")

        grid.setflags(write=False)
        values.setflags(write=False)

        self.__grid = grid
        self.__values = values

    def __len__(self) -> int:
        return len(self.__grid)

    @property
    def grid(self) -> np.ndarray:
        return self.__grid

    @property
    def values(self) -> np.ndarray:
        """
        The `(len(grid), K)` per-type intensities
        """
        return self.__values

    @property
    def num_types(self) -> int:
        return int(self.__values.shape[1])

    @property
    def total(self) -> np.ndarray:
        """
        The total intensity, sum of the per-type intensities at each grid point
        """
        return self.__values.sum(axis=1)


class CoticModel:
    """
    Continuous convolutional model of marked event sequences. Event types are embedded and fed
    to a stack of continuous causal convolutions (each followed by a leaky ReLU) producing one
    embedding per event. Three heads read the embeddings:

    * the intensity head, a further continuous convolution evaluated at arbitrary times,
      followed by an affine map to K outputs and a softplus, giving the per-type intensity
      from the events strictly before the query time;
    * the return-time head, an MLP predicting from the embedding of event k the gap to event
      k + 1;
    * the event-type head, an MLP producing from the embedding of event k the K scores of the
      type of event k + 1.

    Parameters
    ----------
    config: ModelConfig
        the hyperparameters of the model
    """

    def __init__(self, config: ModelConfig) -> None:

        self.__config = config
        rng = np.random.default_rng(config.seed)

        K = config.num_types
        kernel_options = {
            "hidden": config.kernel_hidden,
            "activation": config.activation,
            "slope": config.kernel_slope,
            "frequency": config.sine_frequency,
        }

        self.__embedding = Embedding(K, config.embedding_dim, rng)

        dilations = config.layer_dilations
        self.__layers: List[ContConvLayer] = []
        width = config.embedding_dim
        for dilation in dilations:
            self.__layers.append(
                ContConvLayer(
                    width, config.hidden_dim, rng, config.kernel_size, dilation, **kernel_options
                )
            )
            width = config.hidden_dim

        self.__intensity_conv = ContConvLayer(
            width,
            config.hidden_dim,
            rng,
            config.intensity_kernel_size or config.kernel_size,
            config.intensity_dilation or (dilations[-1] if dilations else 1),
            **kernel_options,
        )
        self.__intensity_linear = Linear(config.hidden_dim, K, rng)

        self.__time_head = MLP([width, *config.head_hidden, 1], rng, slope=config.sigma_slope)
        self.__type_head = MLP([width, *config.head_hidden, K], rng, slope=config.sigma_slope)

    @property
    def config(self) -> ModelConfig:
        return self.__config

    @property
    def num_types(self) -> int:
        return self.__config.num_types

    @property
    def layers(self) -> List[ContConvLayer]:
        return list(self.__layers)

    @property
    def intensity_layer(self) -> ContConvLayer:
        return self.__intensity_conv

    # Parameters
    # --------------------------------------------------------------------------------------

    def named_parameters(self) -> Dict[str, Tensor]:
        """
        All the trainable parameters, indexed by a dotted path (e.g. `layers.0.kernel.1.weight`)
        """
        parameters = {f"embedding.{k}": v for k, v in self.__embedding.named_parameters().items()}
        for index, layer in enumerate(self.__layers):
            parameters.update({f"layers.{index}.{k}": v for k, v in layer.named_parameters().items()})
        parameters.update({f"intensity.conv.{k}": v for k, v in self.__intensity_conv.named_parameters().items()})
        parameters.update({f"intensity.linear.{k}": v for k, v in self.__intensity_linear.named_parameters().items()})
        parameters.update({f"time_head.{k}": v for k, v in self.__time_head.named_parameters().items()})
        parameters.update({f"type_head.{k}": v for k, v in self.__type_head.named_parameters().items()})
        return parameters

    def backbone_parameters(self) -> Dict[str, Tensor]:
        """
        The parameters trained by the likelihood alone: embedding, convolutions and intensity head
        """
        return {k: v for k, v in self.named_parameters().items() if not k.startswith(HEAD_PREFIXES)}

    def head_parameters(self) -> Dict[str, Tensor]:
        """
        The parameters of the return-time and event-type heads
        """
        return {k: v for k, v in self.named_parameters().items() if k.startswith(HEAD_PREFIXES)}

    def zero_grad(self) -> None:
        for parameter in self.named_parameters().values():
            parameter.grad = None

    def snapshot(self) -> Dict[str, np.ndarray]:
        """
        Copy of the current value of every parameter
        """
        return {k: v.value.copy() for k, v in self.named_parameters().items()}

    def restore(self, snapshot: Dict[str, np.ndarray]) -> None:
        """
        Sets every parameter to the value stored in a snapshot
        """
        parameters = self.named_parameters()
        missing = set(parameters).symmetric_difference(snapshot)
        if missing:
            raise KeyError("Snapshot and model parameters differ: {}".format(sorted(missing)))
        for name, parameter in parameters.items():
            parameter.assign(snapshot[name])

    # Forward computations
    # --------------------------------------------------------------------------------------

    def embed_marks(self, marks: np.ndarray) -> Tensor:
        """
        Looks up the embedding of each event type

        Raises
        ------
        DomainError
            exception raised if a type lies outside `[1, K]`
        """
        return self.__embedding(marks)

    def backbone(self, sequence: EventSequence) -> Tensor:
        """
        Computes the `(n, hidden_dim)` embedding of every event of a sequence (`(n,
        embedding_dim)` when the model has no layer). An empty sequence gives an empty matrix.
        """
        h = self.embed_marks(sequence.marks)
        for layer in self.__layers:
            h = layer.conv_at_events(sequence.times, h).leaky_relu(self.__config.sigma_slope)
        return h

    def intensity_tensor(
        self, sequence: EventSequence, query_times: np.ndarray, embeddings: Optional[Tensor] = None
    ) -> Tensor:
        """
        Differentiable `(Q, K)` per-type intensities at the query times

        Parameters
        ----------
        sequence: EventSequence
            the observed history
        query_times: numpy.ndarray
            the times at which the intensity is evaluated (any order)
        embeddings: Optional[Tensor]
            the backbone output for `sequence`, computed if not given
        """
        h = self.backbone(sequence) if embeddings is None else embeddings
        y = self.__intensity_conv.conv_at_queries(
            sequence.times, h, query_times, include_current=False
        )
        return self.__intensity_linear(y.leaky_relu(self.__config.sigma_slope)).softplus()

    def intensity(self, sequence: EventSequence, query_times: np.ndarray) -> IntensityCurve:
        """
        Evaluates the per-type intensities on a grid

        Parameters
        ----------
        sequence: EventSequence
            the observed history
        query_times: numpy.ndarray
            the strictly increasing, non-negative evaluation times

        Raises
        ------
        DomainError
            exception raised if a query time is negative

        Returns
        -------
        IntensityCurve
            the intensity curve
        """
        queries = np.asarray(query_times, dtype=np.float64).reshape(-1)
        if np.any(queries < 0):
            raise DomainError("query times must be non-negative")
        return IntensityCurve(queries, self.intensity_tensor(sequence, queries).value)

    def predict_heads(
        self, sequence: EventSequence, embeddings: Optional[Tensor] = None
    ) -> Tuple[Tensor, Tensor]:
        """
        Applies the prediction heads to the embedding of every event. Row k holds the
        prediction for event k + 1, so the last row has no target.

        Returns
        -------
        Tuple[Tensor, Tensor]
            the `(n, 1)` predicted return times and the `(n, K)` type scores
        """
        h = self.backbone(sequence) if embeddings is None else embeddings
        return self.__time_head(h), self.__type_head(h)

    def forward(
        self, sequence: EventSequence, query_times: np.ndarray
    ) -> Tuple[Tensor, Tensor, Tensor]:
        """
        Runs the backbone once and evaluates the three heads.

        Returns
        -------
        Tuple[Tensor, Tensor, Tensor]
            the `(Q, K)` intensities at the query times, the `(n, 1)` return-time predictions
            and the `(n, K)` type scores
        """
        h = self.backbone(sequence)
        return_times, scores = self.predict_heads(sequence, embeddings=h)
        return self.intensity_tensor(sequence, query_times, embeddings=h), return_times, scores
