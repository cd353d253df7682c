"""
Tests for decoder training, evaluation, grids and model files.

Tests cover:
- Trial-granular splitting
- Training and deterministic inference for all six decoder kinds
- Model file round trips
- Gradient checks of the network decoders
- Separable and chance-level sessions (slow)
"""

import numpy as np
import pytest
import torch

from bci.decoders import (
    Dataset,
    DecoderKind,
    EvaluationResult,
    Representation,
    TrainConfig,
    build_dataset,
    evaluate,
    load_model,
    majority_vote_index,
    predict,
    predict_batch,
    rank_configurations,
    render_accuracy_table,
    save_model,
    split_trials,
    stratified_split,
    train,
    train_grid,
)
from bci.decoders.networks import CompactCnn, Mlp
from bci.preprocess import FrequencyProfile, PreprocessChain
from bci.synthgen import SynthConfig, generate_session
from core.epochs import slice_epochs
from core.errors import ErrorCode, FileError, ValidationError
from core.recording import ClassLabel, Phase, Task

FAST = TrainConfig(epochs=40, learning_rate=5e-3, batch_size=16, seed=0)


def _cluster_dataset(
    task: Task = Task.MI, n_trials: int = 20, windows: int = 4, n_features: int = 10, shift: float = 3.0, seed: int = 0
) -> Dataset:
    """Gaussian DE-like rows whose class moves one feature by ``shift``."""
    rng = np.random.default_rng(seed)
    rows, labels, trial_ids = [], [], []
    for trial in range(n_trials):
        cls = trial % task.n_classes
        for _ in range(windows):
            row = rng.normal(size=n_features)
            row[cls] += shift
            rows.append(row)
            labels.append(ClassLabel(task, cls))
            trial_ids.append(trial)
    return Dataset(np.array(rows), tuple(labels), task, FrequencyProfile.F40, np.array(trial_ids))


def _time_dataset(n_trials: int = 24, windows: int = 3, n_channels: int = 4, n_times: int = 128, seed: int = 0) -> Dataset:
    """Time-domain windows; class 1 carries a 10 Hz rhythm on the first channel."""
    rng = np.random.default_rng(seed)
    t = np.arange(n_times) / 250.0
    rows, labels, trial_ids = [], [], []
    for trial in range(n_trials):
        cls = trial % 2
        for _ in range(windows):
            x = rng.normal(size=(n_channels, n_times))
            if cls == 1:
                x[0] += 3.0 * np.sin(2 * np.pi * 10.0 * t + rng.uniform(0, 2 * np.pi))
            rows.append(x)
            labels.append(ClassLabel(Task.MI, cls))
            trial_ids.append(trial)
    return Dataset(np.array(rows), tuple(labels), Task.MI, FrequencyProfile.F40, np.array(trial_ids), Representation.TIME)


def _dataset_for(kind: DecoderKind) -> Dataset:
    return _time_dataset() if kind is DecoderKind.COMPACT_CNN else _cluster_dataset()


class TestSplit:
    """Test the trial-granular stratified split."""

    def test_trials_never_straddle(self):
        """Test that no trial contributes windows to both sides."""
        ds = _cluster_dataset(n_trials=30)
        train_ids, test_ids = split_trials(ds, 0.2, seed=1)
        assert not set(train_ids) & set(test_ids)
        assert sorted(train_ids + test_ids) == ds.trials()

    def test_per_class_test_count(self):
        """Test that every class holds out round(0.2 n) trials."""
        ds = _cluster_dataset(task=Task.VI, n_trials=30)
        _, test_ids = split_trials(ds, 0.2, seed=0)
        test_classes = [tid % 3 for tid in test_ids]
        assert [test_classes.count(c) for c in range(3)] == [2, 2, 2]

    def test_split_is_seeded(self):
        """Test that the same seed gives the same split."""
        ds = _cluster_dataset(n_trials=30)
        assert split_trials(ds, 0.2, seed=5) == split_trials(ds, 0.2, seed=5)

    def test_class_with_one_trial_rejected(self):
        """Test that a class needs at least two trials."""
        ds = _cluster_dataset(n_trials=3)
        with pytest.raises(ValidationError):
            split_trials(ds, 0.2)

    def test_fraction_range(self):
        """Test that the test fraction must lie strictly between 0 and 1."""
        with pytest.raises(ValidationError):
            split_trials(_cluster_dataset(), 1.0)

    def test_stratified_split_rows(self):
        """Test that the split datasets keep all rows of their trials."""
        ds = _cluster_dataset(n_trials=20, windows=4)
        train_ds, test_ds = stratified_split(ds, 0.2, seed=0)
        assert len(train_ds) + len(test_ds) == len(ds)
        assert len(test_ds) == 4 * 4


class TestTraining:
    """Test that each decoder kind learns separable data."""

    @pytest.mark.parametrize("kind", list(DecoderKind))
    def test_learns_separable_data(self, kind):
        """Test that a trained model beats chance clearly on held-out trials."""
        ds = _dataset_for(kind)
        train_ds, test_ds = stratified_split(ds, 0.25, seed=0)
        model = train(train_ds, kind, FAST)
        result = evaluate(model, test_ds)
        assert isinstance(result, EvaluationResult)
        assert result.window.accuracy >= 0.8
        assert result.trial.n == len(test_ds.trials())

    @pytest.mark.parametrize("kind", list(DecoderKind))
    def test_scores_are_distributions(self, kind):
        """Test that every score row is non-negative and sums to 1."""
        ds = _dataset_for(kind)
        model = train(ds, kind, FAST)
        _, scores = predict_batch(model, ds.features[:10])
        assert scores.shape == (10, 2)
        assert np.all(scores >= 0.0)
        np.testing.assert_allclose(scores.sum(axis=1), 1.0)

    def test_three_class_vi(self):
        """Test that a VI model predicts VI labels."""
        ds = _cluster_dataset(task=Task.VI, n_trials=30)
        model = train(ds, DecoderKind.RIDGE, FAST)
        prediction = predict(model, ds.features[0])
        assert prediction.label.task is Task.VI
        assert prediction.scores.shape == (3,)

    def test_representation_mismatch(self):
        """Test that the CNN refuses DE datasets and the MLP refuses time windows."""
        with pytest.raises(ValidationError):
            train(_cluster_dataset(), DecoderKind.COMPACT_CNN, FAST)
        with pytest.raises(ValidationError):
            train(_time_dataset(), DecoderKind.MLP, FAST)

    def test_missing_class_rejected(self):
        """Test that training labels must cover every class."""
        ds = _cluster_dataset(task=Task.VI, n_trials=30)
        two_classes = ds.subset_trials([t for t in ds.trials() if t % 3 != 2])
        with pytest.raises(ValidationError):
            train(two_classes, DecoderKind.RIDGE, FAST)

    def test_input_shape_checked(self):
        """Test that prediction refuses inputs of the wrong width."""
        model = train(_cluster_dataset(), DecoderKind.RIDGE, FAST)
        with pytest.raises(ValidationError) as exc_info:
            predict(model, np.zeros(7))
        assert exc_info.value.code == ErrorCode.DIMENSION_MISMATCH

    def test_training_is_seeded(self):
        """Test that the same seed yields identical network parameters."""
        ds = _cluster_dataset()
        a = train(ds, DecoderKind.MLP, FAST)
        b = train(ds, DecoderKind.MLP, FAST)
        assert a.parameter_hash() == b.parameter_hash()

    def test_loss_decreases(self):
        """Test that the network loss history goes down."""
        model = train(_time_dataset(), DecoderKind.COMPACT_CNN, FAST)
        assert len(model.loss_history) == FAST.epochs
        assert model.loss_history[-1] < model.loss_history[0]

    def test_train_config_validation(self):
        """Test that nonsensical hyperparameters are rejected."""
        with pytest.raises(ValidationError):
            TrainConfig(epochs=0)
        with pytest.raises(ValidationError):
            TrainConfig(learning_rate=0.0)


class TestEvaluation:
    """Test trial-level voting and reports."""

    def test_majority_vote(self):
        """Test that the modal label wins."""
        scores = np.full((3, 3), 1 / 3)
        assert majority_vote_index(np.array([2, 2, 0]), scores, 3) == 2

    def test_tie_goes_to_higher_mean_score(self):
        """Test that a tie is broken by the mean score."""
        labels = np.array([0, 1])
        scores = np.array([[0.55, 0.45], [0.2, 0.8]])
        assert majority_vote_index(labels, scores, 2) == 1

    def test_full_tie_goes_to_lowest_index(self):
        """Test that equal counts and scores resolve to the lowest index."""
        labels = np.array([1, 0])
        scores = np.array([[0.5, 0.5], [0.5, 0.5]])
        assert majority_vote_index(labels, scores, 2) == 0

    def test_confusion_and_chance(self):
        """Test confusion totals and the chance level."""
        ds = _cluster_dataset(task=Task.VI, n_trials=30)
        model = train(ds, DecoderKind.KNN, FAST)
        result = evaluate(model, ds)
        assert result.window.confusion.sum() == len(ds)
        assert result.trial.confusion.sum() == 30
        assert result.trial.chance_level == pytest.approx(1 / 3)
        assert set(result.to_dict()) == {"window", "trial"}


class TestModelFiles:
    """Test saving and loading decoder models."""

    @pytest.mark.parametrize("kind", list(DecoderKind))
    def test_reload_predicts_identically(self, kind, tmp_path):
        """Test that a reloaded model gives bit-identical scores and hash."""
        ds = _dataset_for(kind)
        model = train(ds, kind, FAST)
        path = tmp_path / f"{kind.value}.eegm"
        save_model(model, path)
        loaded = load_model(path)

        assert loaded.kind is kind
        assert loaded.parameter_hash() == model.parameter_hash()
        np.testing.assert_array_equal(predict_batch(loaded, ds.features)[1], predict_batch(model, ds.features)[1])

    def test_truncated_file(self, tmp_path):
        """Test that a truncated model file is reported as such."""
        model = train(_cluster_dataset(), DecoderKind.RIDGE, FAST)
        path = tmp_path / "m.eegm"
        save_model(model, path)
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(FileError):
            load_model(path)

    def test_bad_magic(self, tmp_path):
        """Test that a foreign file is refused."""
        path = tmp_path / "m.eegm"
        path.write_bytes(b"NOPE" + bytes(32))
        with pytest.raises(FileError) as exc_info:
            load_model(path)
        assert exc_info.value.code == ErrorCode.BAD_MAGIC

    def test_params_are_read_only(self):
        """Test that frozen parameters cannot be modified in place."""
        model = train(_cluster_dataset(), DecoderKind.RIDGE, FAST)
        with pytest.raises(ValueError):
            model.params["coef"][0, 0] = 1.0


class TestGradients:
    """Test analytic against numerical gradients of the network decoders."""

    @pytest.mark.parametrize("seed", range(5))
    def test_mlp_gradcheck(self, seed):
        """Test the MLP input and parameter gradients in double precision."""
        torch.manual_seed(seed)
        net = Mlp(12, 3).double().eval()
        x = torch.randn(6, 12, dtype=torch.float64, requires_grad=True)
        assert torch.autograd.gradcheck(net, (x,))
        weight = net.net[0].weight

        def by_weight(w: torch.Tensor) -> torch.Tensor:
            return torch.func.functional_call(net, {"net.0.weight": w}, (x.detach(),))

        assert torch.autograd.gradcheck(by_weight, (weight.detach().clone().requires_grad_(True),), fast_mode=True)

    @pytest.mark.parametrize("seed", range(5))
    def test_compact_cnn_gradcheck(self, seed):
        """Test the compact CNN input gradients in double precision."""
        torch.manual_seed(seed)
        net = CompactCnn(4, 128, 2).double().eval()
        x = torch.randn(3, 4, 128, dtype=torch.float64, requires_grad=True)
        assert torch.autograd.gradcheck(net, (x,), fast_mode=True)

    def test_short_window_rejected(self):
        """Test that windows too short for the pooling stack are refused."""
        with pytest.raises(ValidationError):
            CompactCnn(4, 16, 2)


class TestGrid:
    """Test the model x profile grid on a short session."""

    @pytest.fixture
    def grid(self, mi_session):
        epochs = slice_epochs(mi_session, Phase.IMAGERY)
        by_profile = {profile: epochs for profile in FrequencyProfile}
        cfg = TrainConfig(epochs=5, batch_size=16, seed=0)
        return train_grid(by_profile, list(DecoderKind), cfg, test_fraction=0.2, split_seed=0)

    def test_eighteen_cells(self, grid):
        """Test that six kinds over three profiles give 18 trained cells."""
        assert len(grid) == 18
        assert {cell.kind for cell in grid.values()} == set(DecoderKind)

    def test_ranking(self, grid):
        """Test that the ranking is sorted by trial accuracy."""
        top = rank_configurations(grid, top_k=2)
        assert len(top) == 2
        assert top[0].accuracy() >= top[1].accuracy()
        assert top[0].accuracy() == max(cell.accuracy() for cell in grid.values())

    def test_rendered_table(self, grid):
        """Test that the table has a row per kind and marks in every column."""
        text = render_accuracy_table(grid, "window")
        lines = text.splitlines()
        assert lines[0] == "Window-level accuracy (%)"
        for kind in DecoderKind:
            assert any(line.startswith(kind.value) for line in lines)
        body = "\n".join(lines[3:-1])
        assert body.count("*") >= 3
        assert body.count("^") >= len(DecoderKind)


def _imagery_dataset(cfg: SynthConfig, profile: FrequencyProfile = FrequencyProfile.F40) -> Dataset:
    rec = PreprocessChain(profile=profile).fit(generate_session(cfg))
    phase = Phase.IMAGERY if cfg.task is Task.MI else Phase.PERCEPTION
    return build_dataset(slice_epochs(rec, phase), profile)


@pytest.mark.slow
class TestSeparability:
    """Test decoding accuracy at the extremes of class separability."""

    @pytest.mark.parametrize(("task", "floor"), [(Task.MI, 0.95), (Task.VI, 0.90)])
    def test_fully_separable_session(self, task, floor):
        """Test that the MLP reaches its accuracy floor at separability 1."""
        ds = _imagery_dataset(SynthConfig(task=task, n_trials=100, separability=1.0, seed=21, n_scalp=8))
        train_ds, test_ds = stratified_split(ds, 0.2, seed=0)
        model = train(train_ds, DecoderKind.MLP, TrainConfig(epochs=300, seed=0))
        assert evaluate(model, test_ds).trial.accuracy >= floor

    @pytest.mark.parametrize("kind", [k for k in DecoderKind if k is not DecoderKind.COMPACT_CNN])
    def test_chance_level_without_signal(self, kind):
        """Test that trial accuracy stays within 5 points of chance at separability 0."""
        cfg = SynthConfig(task=Task.MI, n_trials=1000, separability=0.0, seed=22, n_scalp=4, sample_rate_hz=250.0)
        rec = generate_session(cfg)
        ds = build_dataset(slice_epochs(rec, Phase.IMAGERY), FrequencyProfile.F40)
        train_ds, test_ds = stratified_split(ds, 0.5, seed=0)
        model = train(train_ds, kind, TrainConfig(epochs=30, seed=0))
        accuracy = evaluate(model, test_ds).trial.accuracy
        assert abs(accuracy - 0.5) <= 0.05
