from os.path import join

import numpy as np
from numpy.testing import assert_almost_equal

from cotic_toolbox.evaluation.metrics import MetricsReport, evaluate
from cotic_toolbox.events.sequence import Dataset, EventSequence
from cotic_toolbox.exceptions import FileNotFound, NoPredictionsError
from cotic_toolbox.model.cotic import CoticModel, ModelConfig
from cotic_toolbox.ndarr.tensor import Tensor
from cotic_toolbox.synthetic.hawkes import HawkesOracle, HawkesParams, simulate_hawkes


class StubModel:
    """
    Model with a unit intensity per type and predictions given by a function of the sequence
    """

    def __init__(self, num_types, predictions):
        self.num_types = num_types
        self.predictions = predictions

    def intensity_tensor(self, sequence, query_times, embeddings=None):
        return Tensor(np.ones((len(query_times), self.num_types)))

    def predict_heads(self, sequence, embeddings=None):
        return_times, scores = self.predictions(sequence)
        return Tensor(return_times), Tensor(scores)


def perfect(sequence):
    n = len(sequence)
    return_times = np.zeros((n, 1))
    return_times[: n - 1, 0] = sequence.return_times
    scores = np.zeros((n, 2))
    scores[np.arange(n - 1), sequence.marks[1:] - 1] = 1.0
    return return_times, scores


def fixture():
    return Dataset(
        [
            EventSequence([0.1, 0.3, 0.6], [1, 2, 1], seq_id="a"),
            EventSequence([0.5, 0.55], [1, 1], seq_id="b"),
        ],
        2,
    )


# TESTING THE EVALUATE FUNCTION
# ------------------------------------------------------------------------------------------

# Test the evaluate function with a perfect prediction stub
def test_evaluate_perfect():

    report = evaluate(StubModel(2, perfect), fixture(), n_mc=20)

    assert report.return_mae == 0.0
    assert report.type_accuracy == 1.0
    assert report.n_predictions == 3
    assert report.n_events == 5


# Test the evaluate function against a hand computed fixture
def test_evaluate_hand_fixture():

    constant = lambda s: (np.full((len(s), 1), 0.1), np.tile([0.7, 0.2], (len(s), 1)))
    report = evaluate(StubModel(2, constant), fixture(), n_mc=100)

    assert_almost_equal(report.return_mae, (0.1 + 0.2 + 0.05) / 3.0, decimal=14)
    assert_almost_equal(report.type_accuracy, 2.0 / 3.0, decimal=15)

    # The total unit intensity of two types integrates to 2 t_k and the log terms vanish
    assert_almost_equal(report.ll_per_event, -(2.0 * 0.6 + 2.0 * 0.55) / 5.0, decimal=12)


# Test the clamping of negative predictions and the tie breaking of the type scores
def test_evaluate_clamp_and_ties():

    negative = lambda s: (np.full((len(s), 1), -1.0), np.zeros((len(s), 2)))
    report = evaluate(StubModel(2, negative), fixture(), n_mc=10)

    assert_almost_equal(report.return_mae, (0.2 + 0.3 + 0.05) / 3.0, decimal=14)

    # Ties go to type 1, the target of two of the three predictions
    assert_almost_equal(report.type_accuracy, 2.0 / 3.0, decimal=15)


# Test that a single type model always predicts the right type
def test_evaluate_single_type():

    model = CoticModel(ModelConfig(num_types=1, embedding_dim=3, hidden_dim=3, num_layers=1, kernel_hidden=(4,), head_hidden=(4,)))
    dataset = Dataset([EventSequence([0.1, 0.2, 0.5, 0.7], [1, 1, 1, 1]), EventSequence([0.3, 0.9], [1, 1], seq_id="x")], 1)

    report = evaluate(model, dataset, n_mc=10)
    assert report.type_accuracy == 1.0
    assert report.n_predictions == 4
    assert np.isfinite(report.ll_per_event)


# Test that the metrics do not depend on the order of the sequences
def test_evaluate_order_invariance():

    model = CoticModel(ModelConfig(num_types=2, embedding_dim=3, hidden_dim=3, num_layers=2, kernel_size=2, kernel_hidden=(4,), head_hidden=(4,)))
    rng = np.random.default_rng(0)
    sequences = []
    for i in range(6):
        n = int(rng.integers(1, 7))
        sequences.append(EventSequence(np.cumsum(rng.uniform(0.05, 0.2, n)), rng.integers(1, 3, n), seq_id=str(i)))

    forward = evaluate(model, Dataset(sequences, 2), n_mc=30, seed=4)
    backward = evaluate(model, Dataset(sequences[::-1], 2), n_mc=30, seed=4)
    assert forward == backward

    # The evaluation is deterministic given the seed
    assert evaluate(model, Dataset(sequences, 2), n_mc=30, seed=4) == forward


# Test the de-normalized metrics of a rescaled dataset
def test_evaluate_time_scale():

    constant = lambda s: (np.full((len(s), 1), 0.1), np.tile([0.7, 0.2], (len(s), 1)))
    dataset = Dataset(fixture().sequences, 2, time_scale=4.0)
    report = evaluate(StubModel(2, constant), dataset, n_mc=10)

    assert report.time_scale == 4.0
    assert_almost_equal(report.return_mae_denormalized, 4.0 * report.return_mae, decimal=14)
    assert_almost_equal(report.ll_per_event_raw, report.ll_per_event - np.log(4.0), decimal=14)


# Test the evaluate function with the ground truth oracle of a Hawkes process
def test_evaluate_oracle():

    params = HawkesParams(0.5, 0.5, 1.0)
    dataset = Dataset([simulate_hawkes(params, 30.0, seed=s, seq_id=str(s)) for s in range(3)], 1)
    report = evaluate(HawkesOracle(params), dataset, n_mc=200)

    assert report.type_accuracy == 1.0
    assert report.n_predictions == dataset.n_events - 3
    assert report.return_mae > 0.0


# Test the evaluate function failures
def test_evaluate_fail():

    try:
        evaluate(StubModel(2, perfect), Dataset([], 2))
    except ValueError:
        assert True
    else:
        assert False, "An expected ValueError exception was not raised by 'evaluate'"

    singles = Dataset([EventSequence([0.4], [1], seq_id="a"), EventSequence([0.2], [2], seq_id="b")], 2)
    try:
        evaluate(StubModel(2, perfect), singles, n_mc=10)
    except NoPredictionsError as error:
        assert error.report.n_predictions == 0
        assert_almost_equal(error.report.ll_per_event, -(2.0 * 0.4 + 2.0 * 0.2) / 2.0, decimal=12)
    else:
        assert False, "An expected NoPredictionsError exception was not raised by 'evaluate'"


# TESTING THE METRICSREPORT CLASS
# ------------------------------------------------------------------------------------------

# Test the save and load methods of the MetricsReport class
def test_MetricsReport_save_load(tmpdir):

    report = MetricsReport(-1.25, 0.5, 0.75, 12, 14, 1.0, -1.9431471805599454, 2.0)
    path = join(tmpdir, "metrics.json")
    report.save(path)

    assert MetricsReport.load(path) == report
    assert set(report.to_dict()) == {
        "ll_per_event",
        "return_mae",
        "type_accuracy",
        "n_predictions",
        "n_events",
        "return_mae_denormalized",
        "ll_per_event_raw",
        "time_scale",
    }

    try:
        MetricsReport.load(join(tmpdir, "missing.json"))
    except FileNotFound:
        assert True
    else:
        assert False, "An expected FileNotFound exception was not raised by 'load'"
