from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from cotic_toolbox.events.batching import Batch
from cotic_toolbox.events.sequence import EventSequence
from cotic_toolbox.exceptions import DomainError
from cotic_toolbox.ndarr.tensor import Operand, Tensor, as_tensor

LOG_FLOOR = 1e-9

IntensityFunction = Callable[[np.ndarray], Operand]


class Phase(Enum):
    """
    Training phases: during `warmup` only the likelihood is optimized (prediction heads
    frozen), during `joint` the head losses are added
    """

    warmup = "warmup"
    joint = "joint"


@dataclass
class SequenceLoss:
    """
    Differentiable loss terms of a single sequence.

    Arguments
    ---------
    ll: Tensor
        the Monte-Carlo negative log-likelihood
    time: Tensor
        the LogCosh return-time loss averaged over the positions with a target
    type: Tensor
        the cross-entropy event-type loss averaged over the positions with a target
    n_events: int
        the number of events of the sequence
    n_predictions: int
        the number of positions with a target (`n_events - 1`, or 0)
    mc_samples: int
        the number of Monte-Carlo samples used for the compensator
    """

    ll: Tensor
    time: Tensor
    type: Tensor
    n_events: int
    n_predictions: int
    mc_samples: int


@dataclass
class LossReport:
    """
    Numerical summary of a batch loss.

    Arguments
    ---------
    ll: float
        the mean negative log-likelihood
    time: float
        the mean return-time loss
    type: float
        the mean event-type loss
    combined: float
        the value that is back-propagated
    mc_samples: int
        the Monte-Carlo samples drawn per sequence
    """

    ll: float
    time: float
    type: float
    combined: float
    mc_samples: int

    def to_dict(self) -> Dict[str, Union[float, int]]:
        return asdict(self)


def mc_integral(
    f: Callable[[np.ndarray], np.ndarray], T: float, n: int, rng: np.random.Generator
) -> float:
    """
    Monte-Carlo estimate `(T/n) sum_i f(u_i)` of the integral of `f` over `[0, T]`, with the
    `u_i` drawn uniformly and independently.

    Parameters
    ----------
    f: Callable[[numpy.ndarray], numpy.ndarray]
        the vectorized integrand
    T: float
        the upper integration limit
    n: int
        the number of samples
    rng: numpy.random.Generator
        the generator the samples are drawn from

    Raises
    ------
    DomainError
        exception raised if `T` is negative
    ValueError
        exception raised if `n` is smaller than one

    Returns
    -------
    float
        the estimate of the integral
    """
    if T < 0:
        raise DomainError("the integration limit cannot be negative")

    if n < 1:
        raise ValueError("At least one Monte-Carlo sample is required.")

    samples = rng.uniform(0.0, T, n)
    if T == 0:
        return 0.0

    values = np.asarray(f(samples), dtype=np.float64).reshape(-1)
    return T * float(np.sum(values) / n)


def nll(
    intensity: IntensityFunction,
    sequence: EventSequence,
    n_mc: int,
    rng: np.random.Generator,
    horizon: Optional[float] = None,
) -> Tensor:
    """
    Negative log-likelihood of a sequence under a marked intensity, with the compensator
    (integral of the total intensity) estimated by Monte-Carlo. The event term reads the
    intensity of the observed type at each event time and is floored at 1e-9 before the log.

    Parameters
    ----------
    intensity: IntensityFunction
        function mapping `Q` query times to the `(Q, K)` per-type intensities (a `Tensor` to
        differentiate through it, or any array)
    sequence: EventSequence
        the observed sequence
    n_mc: int
        the number of Monte-Carlo samples
    rng: numpy.random.Generator
        the generator of the Monte-Carlo samples
    horizon: Optional[float]
        the upper limit of the compensator. If None (default) the last event time is used

    Returns
    -------
    Tensor
        the scalar negative log-likelihood
    """
    if n_mc < 1:
        raise ValueError("At least one Monte-Carlo sample is required.")

    upper = sequence.last_time if horizon is None else float(horizon)
    if upper < sequence.last_time:
        raise DomainError("the compensator horizon cannot precede the last event")

    n = len(sequence)
    samples = rng.uniform(0.0, upper, n_mc)
    values = as_tensor(intensity(np.concatenate([sequence.times, samples])))
    if values.ndim == 1:
        values = values.reshape(-1, 1)

    K = values.shape[1]
    marks = sequence.marks
    if n > 0 and marks.max() > K:
        raise DomainError(f"event type {int(marks.max())} exceeds the {K} modelled types")

    observed = values[np.arange(n), marks - 1].clamp_min(LOG_FLOOR).log().sum()
    compensator = values[n:].sum() / float(n_mc) * upper
    return compensator - observed


def logcosh_loss(predicted: Operand, target: Operand) -> Tensor:
    """
    Return-time loss `x + log(1 + exp(-2x))` of the error `x = predicted - target`, evaluated
    element-wise in a form that is stable for large `|x|`. It equals `log(cosh(x)) + log(2)`.
    """
    return (as_tensor(predicted) - as_tensor(target)).logcosh()


def cross_entropy_loss(scores: Operand, true_type: Union[int, np.ndarray]) -> Tensor:
    """
    Negative log-softmax of the true type scores, with max-subtraction.

    Parameters
    ----------
    scores: Operand
        the `(..., K)` unnormalized type scores
    true_type: Union[int, numpy.ndarray]
        the true type(s) in `[1, K]`, one per score vector

    Raises
    ------
    DomainError
        exception raised if a true type lies outside `[1, K]`

    Returns
    -------
    Tensor
        the loss of each score vector (shape of `true_type`)
    """
    scores = as_tensor(scores)
    K = scores.shape[-1]
    types = np.asarray(true_type, dtype=np.int64)

    if types.size > 0 and (types.min() < 1 or types.max() > K):
        raise DomainError(f"event types must lie in [1, {K}]")

    flat = scores.reshape(-1, K)
    rows = flat.shape[0]
    if rows != types.size:
        raise ValueError("One true type is required per score vector.")

    z = flat - flat.value.max(axis=1, keepdims=True)
    log_norm = z.exp().sum(axis=1).log()
    picked = z[np.arange(rows), types.reshape(-1) - 1]
    return (log_norm - picked).reshape(types.shape)


def sequence_loss(
    model,
    sequence: EventSequence,
    n_mc: int,
    rng: np.random.Generator,
    detach_heads: bool = True,
) -> SequenceLoss:
    """
    Computes the three loss terms of a sequence from one backbone pass.

    Parameters
    ----------
    model: CoticModel
        the model
    sequence: EventSequence
        the sequence
    n_mc: int
        the number of Monte-Carlo samples of the compensator
    rng: numpy.random.Generator
        the generator of the Monte-Carlo samples
    detach_heads: bool
        if True (default) the head losses do not propagate into the backbone, which is then
        trained by the likelihood only

    Returns
    -------
    SequenceLoss
        the loss terms
    """
    h = model.backbone(sequence)
    ll = nll(lambda q: model.intensity_tensor(sequence, q, embeddings=h), sequence, n_mc, rng)

    n = len(sequence)
    if n < 2:
        zero = Tensor(0.0)
        return SequenceLoss(ll, zero, zero, n, 0, n_mc)

    return_times, scores = model.predict_heads(sequence, embeddings=h.detach() if detach_heads else h)
    time = logcosh_loss(return_times[: n - 1, 0], sequence.return_times).mean()
    kind = cross_entropy_loss(scores[: n - 1], sequence.marks[1:]).mean()
    return SequenceLoss(ll, time, kind, n, n - 1, n_mc)


def combined_loss(
    losses: Sequence[SequenceLoss],
    alpha: float = 1.0,
    beta: float = 1.0,
    phase: Phase = Phase.joint,
) -> Tuple[Tensor, LossReport]:
    """
    Averages the per-sequence losses of a batch: the likelihood alone during the warm-up
    phase, `L_ll + alpha L_time + beta L_type` during the joint phase.

    Parameters
    ----------
    losses: Sequence[SequenceLoss]
        the loss terms of each sequence of the batch
    alpha: float
        the weight of the return-time loss (default: 1.0)
    beta: float
        the weight of the event-type loss (default: 1.0)
    phase: Phase
        the training phase (default: joint)

    Raises
    ------
    ValueError
        exception raised on an empty batch or negative weights

    Returns
    -------
    Tuple[Tensor, LossReport]
        the scalar loss to back-propagate and its numerical summary
    """
    if len(losses) == 0:
        raise ValueError("Cannot combine the losses of an empty batch.")

    if alpha < 0 or beta < 0:
        raise ValueError("The loss weights must be non-negative.")

    terms: List[Tensor] = []
    for loss in losses:
        if phase == Phase.warmup:
            terms.append(loss.ll)
        else:
            terms.append(loss.ll + alpha * loss.time + beta * loss.type)

    total = terms[0]
    for term in terms[1:]:
        total = total + term
    combined = total / float(len(losses))

    report = LossReport(
        ll=float(np.mean([float(l.ll.value) for l in losses])),
        time=float(np.mean([float(l.time.value) for l in losses])),
        type=float(np.mean([float(l.type.value) for l in losses])),
        combined=float(combined.value),
        mc_samples=losses[0].mc_samples,
    )
    return combined, report


def batch_loss(
    model,
    batch: Union[Batch, Sequence[EventSequence]],
    n_mc: int,
    rng: np.random.Generator,
    alpha: float = 1.0,
    beta: float = 1.0,
    phase: Phase = Phase.joint,
    detach_heads: bool = True,
) -> Tuple[Tensor, LossReport]:
    """
    Loss of a padded batch, computed sequence by sequence on the unpadded content so that the
    result does not depend on the padding. The Monte-Carlo samples are drawn from `rng` in the
    batch order.
    """
    sequences = batch.unpad() if isinstance(batch, Batch) else list(batch)
    losses = [sequence_loss(model, s, n_mc, rng, detach_heads) for s in sequences]
    return combined_loss(losses, alpha, beta, phase)
