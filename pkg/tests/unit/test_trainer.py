from dataclasses import asdict
from os.path import isfile, join

import numpy as np
from numpy.testing import assert_array_equal

from cotic_toolbox.events.sequence import Dataset, EventSequence
from cotic_toolbox.exceptions import ConfigurationError, TrainingDiverged
from cotic_toolbox.model.checkpoint import load_checkpoint
from cotic_toolbox.model.cotic import CoticModel, ModelConfig
from cotic_toolbox.training.trainer import History, TrainConfig, Trainer, train, validation_nll


def tiny_model(seed=0):
    config = ModelConfig(
        num_types=2,
        embedding_dim=3,
        hidden_dim=3,
        num_layers=1,
        kernel_size=3,
        kernel_hidden=(4,),
        head_hidden=(4,),
        seed=seed,
    )
    return CoticModel(config)


def tiny_dataset(count=6, seed=0):
    rng = np.random.default_rng(seed)
    sequences = []
    for i in range(count):
        n = int(rng.integers(3, 8))
        times = np.cumsum(rng.uniform(0.02, 0.12, n))
        sequences.append(EventSequence(times, rng.integers(1, 3, n), seq_id=str(i)))
    return Dataset(sequences, 2)


def tiny_config(**options):
    values = dict(epochs_max=3, warmup_epochs=1, batch_size=2, n_mc=10, lr=1e-2, seed=1)
    values.update(options)
    return TrainConfig(**values)


# TESTING THE TRAINCONFIG CLASS
# ------------------------------------------------------------------------------------------

# Test the TrainConfig defaults
def test_TrainConfig():

    config = TrainConfig()
    assert config.lr == 1e-3
    assert (config.beta1, config.beta2, config.eps) == (0.9, 0.999, 1e-8)
    assert config.epochs_max == 100 and config.warmup_epochs == 10
    assert config.batch_size == 32 and config.patience == 15
    assert config.alpha == 1.0 and config.beta == 1.0
    assert config.n_mc == 100
    assert config.clip_norm == 10.0
    assert config.to_dict()["detach_heads"] is True


# Test the TrainConfig failures
def test_TrainConfig_fail():

    invalid = [
        {"lr": 0.0},
        {"beta1": 1.0},
        {"epochs_max": 0},
        {"warmup_epochs": 5, "epochs_max": 3},
        {"batch_size": 0},
        {"n_mc": 0},
        {"alpha": -1.0},
        {"clip_norm": 0.0},
    ]
    for options in invalid:
        try:
            TrainConfig(**options)
        except ConfigurationError:
            assert True
        else:
            assert False, f"An expected ConfigurationError exception was not raised for {options}"


# TESTING THE TRAINER CLASS
# ------------------------------------------------------------------------------------------

# Test a one epoch training on a two sequences toy set
def test_Trainer_smoke(tmpdir):

    path = join(tmpdir, "checkpoint.h5")
    model = tiny_model()
    data = tiny_dataset(2)

    history = Trainer(model, tiny_config(epochs_max=1, warmup_epochs=0), path, {"time_scale": 1.0}).fit(data)

    assert len(history) == 1
    assert history[0].epoch == 1
    assert history[0].val_ll is None
    assert isfile(path)

    _, metadata = load_checkpoint(path)
    assert metadata == {"time_scale": 1.0}


# Test the phases recorded in the history
def test_Trainer_phases():

    model = tiny_model()
    history = Trainer(model, tiny_config(epochs_max=3, warmup_epochs=2, patience=10)).fit(
        tiny_dataset(4), tiny_dataset(2, seed=1)
    )

    assert history.column("phase") == ["warmup", "warmup", "joint"]
    assert all(v is not None for v in history.column("val_ll"))
    assert history[0].train_time > 0.0
    assert all(np.isfinite(history.column("train_ll")))


# Test that the training is deterministic given the seed
def test_Trainer_determinism():

    runs = []
    for _ in range(2):
        model = tiny_model(seed=3)
        history = Trainer(model, tiny_config()).fit(tiny_dataset(5), tiny_dataset(2, seed=1))
        runs.append((model.snapshot(), history))

    (first, h1), (second, h2) = runs
    for name in first:
        assert_array_equal(first[name], second[name])

    strip = lambda h: [{k: v for k, v in asdict(r).items() if k != "wall_seconds"} for r in h]
    assert strip(h1) == strip(h2)


# Test that the best parameters are restored at the end of the training
def test_Trainer_best_epoch(tmpdir):

    path = join(tmpdir, "best.h5")
    model = tiny_model()
    val = tiny_dataset(2, seed=1)
    trainer = Trainer(model, tiny_config(epochs_max=4, warmup_epochs=4), path)
    history = trainer.fit(tiny_dataset(4), val)

    best = int(np.argmin(history.column("val_ll"))) + 1
    assert trainer.best_epoch == best

    saved, _ = load_checkpoint(path)
    for name, value in saved.snapshot().items():
        assert_array_equal(value, model.snapshot()[name])

    assert validation_nll(model, val, 10, 2) == history[best - 1].val_ll


# Test that gradient clipping is counted in the history
def test_Trainer_clipping():

    model = tiny_model()
    history = Trainer(model, tiny_config(epochs_max=1, warmup_epochs=0, clip_norm=1e-8)).fit(tiny_dataset(4))

    assert history[0].clipped_steps == 2
    assert history[0].rejected_steps == 0


# Test that a non-finite loss aborts the training
def test_Trainer_diverged():

    model = tiny_model()
    table = model.named_parameters()["embedding.table"]
    table.assign(np.full(table.shape, np.nan))

    try:
        Trainer(model, tiny_config()).fit(tiny_dataset(4))
    except TrainingDiverged as error:
        assert error.epoch == 1
        assert len(error.history) == 0
    else:
        assert False, "An expected TrainingDiverged exception was not raised by 'fit'"


# Test the train function
def test_train():

    model = tiny_model()
    trained, history = train(model, tiny_dataset(4), None, tiny_config(epochs_max=2))

    assert trained is model
    assert len(history) == 2


# TESTING THE HISTORY CLASS
# ------------------------------------------------------------------------------------------

# Test the save and load methods of the History class
def test_History_save_load(tmpdir):

    history = Trainer(tiny_model(), tiny_config(epochs_max=2)).fit(tiny_dataset(3))
    path = join(tmpdir, "history.jsonl")
    history.save(path)

    loaded = History.load(path)
    assert loaded.records == history.records

    with open(path, "r") as file:
        assert len(file.readlines()) == 2
