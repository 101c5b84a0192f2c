from __future__ import annotations

from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.stats import kstest

from cotic_toolbox.events.sequence import EventSequence
from cotic_toolbox.exceptions import UnstableParameters
from cotic_toolbox.model.cotic import IntensityCurve
from cotic_toolbox.ndarr.tensor import Tensor

History = Union[EventSequence, Sequence[float], np.ndarray]


class HawkesParams:
    """
    Parameters of a marked Hawkes process with exponential kernel. The intensity of type `k` is

        lambda_k(t) = p_k mu + sum_{t_j < t} A[m_j, k] exp(-b (t - t_j))

    By default `A = a 1 p^T`: every event raises the total intensity by `a` and the type of
    each event is drawn from the fixed categorical distribution `p`, independently of time.
    With a single type this is the classical `mu + a sum exp(-b (t - t_j))`.

    Parameters
    ----------
    baseline: float
        the base rate mu > 0
    excitation: float
        the jump a >= 0 of the total intensity after each event
    decay: float
        the decay rate b > 0 of the excitation
    type_probabilities: Sequence[float]
        the categorical distribution p of the event types (default: a single type)
    excitation_matrix: Optional[numpy.ndarray]
        a custom K x K matrix A replacing `a 1 p^T`

    Raises
    ------
    ValueError
        exception raised if a parameter lies outside its domain
    """

    def __init__(
        self,
        baseline: float,
        excitation: float,
        decay: float,
        type_probabilities: Sequence[float] = (1.0,),
        excitation_matrix: Optional[np.ndarray] = None,
    ) -> None:

        if not baseline > 0:
            raise ValueError("The baseline rate must be positive.")

        if excitation < 0:
            raise ValueError("The excitation must be non-negative.")

        if not decay > 0:
            raise ValueError("The decay rate must be positive.")

        p = np.array(type_probabilities, dtype=np.float64).reshape(-1)
        if len(p) == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("The type probabilities must be non-negative and sum to one.")

        if excitation_matrix is None:
            A = excitation * np.outer(np.ones(len(p)), p)
        else:
            A = np.array(excitation_matrix, dtype=np.float64)
            if A.shape != (len(p), len(p)) or np.any(A < 0):
                raise ValueError("The excitation matrix must be a non-negative K x K matrix.")

        p.setflags(write=False)
        A.setflags(write=False)

        self.__baseline = float(baseline)
        self.__excitation = float(excitation)
        self.__decay = float(decay)
        self.__probabilities = p
        self.__matrix = A
        self.__custom = excitation_matrix is not None

    def __repr__(self) -> str:
        return "HawkesParams(mu={:.6g}, a={:.6g}, b={:.6g}, K={})".format(
            self.__baseline, self.__excitation, self.__decay, self.num_types
        )

    @property
    def baseline(self) -> float:
        return self.__baseline

    @property
    def excitation(self) -> float:
        return self.__excitation

    @property
    def decay(self) -> float:
        return self.__decay

    @property
    def type_probabilities(self) -> np.ndarray:
        return self.__probabilities

    @property
    def excitation_matrix(self) -> np.ndarray:
        """
        The K x K matrix whose row `i` holds the intensity jump of each type after an event of
        type `i`
        """
        return self.__matrix

    @property
    def num_types(self) -> int:
        return len(self.__probabilities)

    @property
    def baselines(self) -> np.ndarray:
        """
        The per-type base rates `p_k mu`
        """
        return self.__baseline * self.__probabilities

    @property
    def branching_ratio(self) -> float:
        """
        The spectral radius of `A` divided by `b` (`a / b` by default), the mean number of
        events directly triggered by an event
        """
        return float(np.max(np.abs(np.linalg.eigvals(self.__matrix)))) / self.__decay

    def check_stability(self) -> None:
        """
        Raises
        ------
        UnstableParameters
            exception raised if the branching ratio is not smaller than one
        """
        if not self.branching_ratio < 1:
            raise UnstableParameters(self.branching_ratio)

    def rescaled(self, time_scale: float) -> HawkesParams:
        """
        The parameters of the same process observed on times divided by `time_scale`
        """
        if not time_scale > 0:
            raise ValueError("The time scale must be positive.")
        return HawkesParams(
            self.__baseline * time_scale,
            self.__excitation * time_scale,
            self.__decay * time_scale,
            self.__probabilities,
            self.__matrix * time_scale if self.__custom else None,
        )

    def to_dict(self) -> Dict[str, Any]:
        content: Dict[str, Any] = {
            "baseline": self.__baseline,
            "excitation": self.__excitation,
            "decay": self.__decay,
            "type_probabilities": self.__probabilities.tolist(),
        }
        if self.__custom:
            content["excitation_matrix"] = self.__matrix.tolist()
        return content


def _unpack(history: History) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(history, EventSequence):
        return history.times, history.marks
    times = np.asarray(history, dtype=np.float64).reshape(-1)
    return times, np.ones(len(times), dtype=np.int64)


def _states(params: HawkesParams, times: np.ndarray, marks: np.ndarray) -> np.ndarray:
    """
    The (n, K) excitation just after each event, its own jump included
    """
    A, b = params.excitation_matrix, params.decay
    states = np.zeros((len(times), params.num_types))
    current, previous = np.zeros(params.num_types), 0.0
    for j, (t, m) in enumerate(zip(times, marks)):
        current = current * np.exp(-b * (t - previous)) + A[m - 1]
        states[j] = current
        previous = t
    return states


def hawkes_type_intensities(
    params: HawkesParams, history: History, query_times: Union[float, np.ndarray]
) -> np.ndarray:
    """
    Per-type intensities at the query times, using the events strictly before each query.
    Runs in `O(n + Q)` operations through the exponential recursion.

    Returns
    -------
    numpy.ndarray
        the `(Q, K)` intensities
    """
    times, marks = _unpack(history)
    queries = np.asarray(query_times, dtype=np.float64).reshape(-1)

    values = np.tile(params.baselines, (len(queries), 1))
    if len(times) == 0:
        return values

    states = _states(params, times, marks)
    anchor = np.searchsorted(times, queries, side="left") - 1
    seen = anchor >= 0
    safe = np.where(seen, anchor, 0)
    decay = np.exp(-params.decay * np.where(seen, queries - times[safe], 0.0))
    values += np.where(seen[:, None], states[safe] * decay[:, None], 0.0)
    return values


def hawkes_intensity(
    params: HawkesParams, history: History, t: Union[float, np.ndarray]
) -> Union[float, np.ndarray]:
    """
    Total intensity `sum_k lambda_k(t)` of the process, evaluated by direct summation over
    the history events strictly before `t`

    Parameters
    ----------
    params: HawkesParams
        the process parameters
    history: History
        the past events, an `EventSequence` or a list of times (all of type 1)
    t: Union[float, numpy.ndarray]
        the evaluation time(s)

    Returns
    -------
    Union[float, numpy.ndarray]
        the total intensity at each time
    """
    times, marks = _unpack(history)
    query = np.asarray(t, dtype=np.float64)
    jumps = params.excitation_matrix.sum(axis=1)[marks - 1]

    lags = query[..., None] - times
    past = lags > 0
    terms = np.where(past, jumps * np.exp(-params.decay * np.where(past, lags, 0.0)), 0.0)
    value = params.baselines.sum() + terms.sum(axis=-1)
    return float(value) if np.ndim(value) == 0 else value


def hawkes_compensator(
    params: HawkesParams, history: History, t_from: float, t_to: float
) -> float:
    """
    Closed-form integral of the total intensity over `[t_from, t_to]`, assuming no event
    other than the history ones occurs in between

    Raises
    ------
    ValueError
        exception raised if `t_from` is greater than `t_to`
    """
    if t_from > t_to:
        raise ValueError("The integration interval is reversed.")

    times, marks = _unpack(history)
    jumps = params.excitation_matrix.sum(axis=1)[marks - 1]

    kept = times < t_to
    times, jumps = times[kept], jumps[kept]
    start = np.maximum(times, t_from)
    b = params.decay

    excited = np.sum(jumps / b * (np.exp(-b * (start - times)) - np.exp(-b * (t_to - times))))
    return float(params.baselines.sum() * (t_to - t_from) + excited)


def hawkes_nll_exact(
    params: HawkesParams, sequence: EventSequence, T: Optional[float] = None
) -> float:
    """
    Exact negative log-likelihood of a sequence observed on `[0, T]`:

        sum_k p_k mu T + sum_j |A[m_j]| / b (1 - exp(-b (T - t_j))) - sum_j log lambda_{m_j}(t_j)

    Parameters
    ----------
    params: HawkesParams
        the process parameters
    sequence: EventSequence
        the observed events
    T: Optional[float]
        the end of the observation window (default: the sequence horizon)

    Raises
    ------
    ValueError
        exception raised if `T` precedes the last event

    Returns
    -------
    float
        the negative log-likelihood
    """
    T = sequence.horizon if T is None else float(T)
    if T < sequence.last_time:
        raise ValueError("The observation window must contain all the events.")

    compensator = hawkes_compensator(params, sequence, 0.0, T)
    if len(sequence) == 0:
        return compensator

    rates = hawkes_type_intensities(params, sequence, sequence.times)
    observed = rates[np.arange(len(sequence)), sequence.marks - 1]
    return float(compensator - np.sum(np.log(observed)))


def survival_prob(
    params: HawkesParams, history: History, t_from: float, t_to: float
) -> float:
    """
    Probability that no event occurs in `(t_from, t_to]` given the events up to `t_from`,
    `exp(-integral of the total intensity)`

    Raises
    ------
    ValueError
        exception raised if `t_from` is greater than `t_to`
    """
    times, marks = _unpack(history)
    frozen = times <= t_from
    past = EventSequence(times[frozen], marks[frozen]) if np.any(frozen) else []
    return float(np.exp(-hawkes_compensator(params, past, t_from, t_to)))


def simulate_hawkes(
    params: HawkesParams,
    T: float,
    seed: Union[int, np.random.SeedSequence, np.random.Generator] = 0,
    seq_id: str = "",
) -> EventSequence:
    """
    Simulates a realization on `[0, T]` by thinning. Between events the intensity only
    decays, so its current value bounds it until the next candidate; each candidate is
    accepted with probability `lambda(t) / bound` and its type drawn proportionally to the
    per-type intensities.

    Parameters
    ----------
    params: HawkesParams
        the process parameters
    T: float
        the horizon
    seed: Union[int, numpy.random.SeedSequence, numpy.random.Generator]
        the seed (or generator) of the simulation (default: 0)
    seq_id: str
        the identifier given to the sequence

    Raises
    ------
    UnstableParameters
        exception raised if the branching ratio is not smaller than one
    ValueError
        exception raised if `T` is negative

    Returns
    -------
    EventSequence
        the simulated events with horizon `T`
    """
    params.check_stability()

    if T < 0:
        raise ValueError("The horizon must be non-negative.")

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    base, A, b = params.baselines, params.excitation_matrix, params.decay
    K = params.num_types

    times, marks = [], []
    state = np.zeros(K)
    t = 0.0
    while True:
        bound = base.sum() + state.sum()
        dt = rng.exponential(1.0 / bound)
        t += dt
        if t > T:
            break

        state = state * np.exp(-b * dt)
        rates = base + state
        total = rates.sum()
        if rng.uniform(0.0, bound) > total:
            continue

        k = 0 if K == 1 else int(rng.choice(K, p=rates / total))
        times.append(t)
        marks.append(k + 1)
        state = state + A[k]

    return EventSequence(times, marks, horizon=T, seq_id=seq_id)


def time_rescaled_intervals(params: HawkesParams, sequence: EventSequence) -> np.ndarray:
    """
    The compensator increments between consecutive events (from 0 to the first event, then
    between events). Under the true parameters they are independent Exp(1) variables.
    """
    times, marks = sequence.times, sequence.marks
    base, A, b = params.baselines.sum(), params.excitation_matrix, params.decay

    intervals = np.zeros(len(times))
    state, previous = 0.0, 0.0
    for j, (t, m) in enumerate(zip(times, marks)):
        dt = t - previous
        intervals[j] = base * dt + state / b * (1.0 - np.exp(-b * dt))
        state = state * np.exp(-b * dt) + A[m - 1].sum()
        previous = t
    return intervals


def time_rescaling_test(params: HawkesParams, sequence: EventSequence) -> Tuple[float, float]:
    """
    Kolmogorov-Smirnov test of the rescaled inter-arrival times against Exp(1)

    Returns
    -------
    Tuple[float, float]
        the KS statistic and its p-value
    """
    result = kstest(time_rescaled_intervals(params, sequence), "expon")
    return float(result.statistic), float(result.pvalue)


class HawkesOracle:
    """
    Ground-truth model of a Hawkes process exposing the same interface as `CoticModel` for
    likelihood, intensity and prediction queries. The return-time prediction is the median
    of the time to the next event and the type scores are the log per-type intensities right
    after each event.

    Parameters
    ----------
    params: HawkesParams
        the parameters of the process, in the time units of the sequences it is queried on
    """

    def __init__(self, params: HawkesParams) -> None:
        self.__params = params

    @property
    def params(self) -> HawkesParams:
        return self.__params

    @property
    def num_types(self) -> int:
        return self.__params.num_types

    def intensity_tensor(
        self, sequence: EventSequence, query_times: np.ndarray, embeddings: Any = None
    ) -> Tensor:
        return Tensor(hawkes_type_intensities(self.__params, sequence, query_times))

    def intensity(self, sequence: EventSequence, query_times: np.ndarray) -> IntensityCurve:
        queries = np.asarray(query_times, dtype=np.float64).reshape(-1)
        return IntensityCurve(queries, hawkes_type_intensities(self.__params, sequence, queries))

    def predict_heads(self, sequence: EventSequence, embeddings: Any = None) -> Tuple[Tensor, Tensor]:
        params = self.__params
        n = len(sequence)
        states = _states(params, sequence.times, sequence.marks)
        base = params.baselines.sum()
        target = np.log(2.0)

        medians = np.zeros((n, 1))
        for j in range(n):
            excited = states[j].sum()
            gap = lambda d: base * d + excited / params.decay * (1.0 - np.exp(-params.decay * d)) - target
            medians[j, 0] = brentq(gap, 0.0, target / base)

        scores = np.log(params.baselines[None, :] + states) if n > 0 else np.zeros((0, self.num_types))
        return Tensor(medians), Tensor(scores)
