"""Tests for the convolutional-recurrent predictor"""

import numpy as np
import pytest

from newellcast.errors import InsufficientDataError, ShapeError, ValidationError
from newellcast.nn import (
    AdadeltaState,
    CnnLstm,
    DenseSpec,
    ModelSpec,
    Standardizer,
    TrainConfig,
    WindowDataset,
    adadelta_step,
    backward,
    conv2d_forward,
    dataset1_spec,
    dataset2_spec,
    forward,
    grad_check,
    load_model,
    lstm_forward,
    predict,
    read_header,
    reshape_for_recurrence,
    save_model,
    train,
)
from newellcast.nn.layers import sigmoid


class TestConvolution:
    """Test cases for the convolution layer"""

    def test_identity_kernel(self):
        """Test a 1x1 unit kernel reproduces a non-negative input"""
        x = np.arange(12.0).reshape(3, 4)
        out = conv2d_forward(x, np.ones((1, 1, 1)), np.zeros(1))
        np.testing.assert_array_equal(out[..., 0], x)

    def test_zero_weights(self):
        """Test zero weights give zero activations"""
        out = conv2d_forward(np.random.default_rng(0).normal(size=(3, 5)), np.zeros((3, 2, 4)), np.zeros(4))
        assert out.shape == (3, 5, 4)
        assert not out.any()

    def test_same_padding_window(self):
        """Test a 3x2 box kernel sums the neighbouring stations and the next step"""
        x = np.arange(12.0).reshape(3, 4)
        out = conv2d_forward(x, np.ones((3, 2, 1)), np.zeros(1))[..., 0]
        assert out[1, 0] == pytest.approx(x[0:3, 0:2].sum())
        assert out[0, 0] == pytest.approx(x[0:2, 0:2].sum())
        assert out[1, 3] == pytest.approx(x[0:3, 3].sum())

    def test_valid_padding_shape(self):
        """Test valid padding shrinks both axes"""
        out = conv2d_forward(np.ones((2, 4, 5)), np.ones((3, 2, 6)), np.zeros(6), padding="valid")
        assert out.shape == (2, 2, 4, 6)

    def test_relu(self):
        """Test negative pre-activations are clipped"""
        out = conv2d_forward(np.ones((2, 2)), np.ones((1, 1, 1)), np.array([-5.0]))
        assert not out.any()


class TestReshape:
    """Test cases for the conv-to-recurrence reshape"""

    def test_station_major_features(self):
        """Test time becomes the sequence axis with filters innermost"""
        conv_out = np.arange(24.0).reshape(2, 3, 4)
        seq = reshape_for_recurrence(conv_out)
        assert seq.shape == (3, 8)
        np.testing.assert_array_equal(seq[1], np.concatenate([conv_out[0, 1], conv_out[1, 1]]))

    def test_batch_axis_preserved(self):
        """Test a leading batch axis survives"""
        seq = reshape_for_recurrence(np.zeros((5, 2, 3, 4)))
        assert seq.shape == (5, 3, 8)


class TestLSTM:
    """Test cases for the recurrent layer"""

    def test_zero_weights(self):
        """Test zero weights and biases keep every hidden state at zero"""
        last, states = lstm_forward(np.ones((4, 3)), np.zeros((3, 8)), np.zeros((2, 8)), np.zeros(8))
        assert states.shape == (4, 2)
        assert not last.any()
        assert not states.any()

    def test_single_step_oracle(self):
        """Test one scalar step against the gate equations"""
        w = np.array([[0.3, -0.2, 0.5, 0.7]])
        b = np.array([0.1, 1.0, -0.4, 0.2])
        x = 1.5
        z = w[0] * x + b
        c = sigmoid(z[:1])[0] * np.tanh(z[2])
        expected = sigmoid(z[3:])[0] * np.tanh(c)
        last, _ = lstm_forward(np.array([[x]]), w, np.zeros((1, 4)), b)
        assert last[0] == pytest.approx(expected)

    def test_recurrence_uses_previous_state(self):
        """Test the second step sees the first step's hidden and cell state"""
        w = np.array([[0.3, -0.2, 0.5, 0.7]])
        u = np.array([[0.4, 0.1, -0.6, 0.2]])
        b = np.zeros(4)
        _, states = lstm_forward(np.array([[1.0], [0.0]]), w, u, b)
        h1 = states[0, 0]
        c1 = sigmoid(np.array([0.3]))[0] * np.tanh(0.5)
        z = u[0] * h1
        c2 = sigmoid(z[1:2])[0] * c1 + sigmoid(z[:1])[0] * np.tanh(z[2])
        assert states[1, 0] == pytest.approx(sigmoid(z[3:])[0] * np.tanh(c2))


class TestModelSpec:
    """Test cases for architecture validation"""

    def test_dataset1_shapes(self):
        """Test per-layer output shapes of the first architecture"""
        shapes = dict(dataset1_spec(3).layer_shapes())
        assert shapes["conv"] == (3, 10, 12)
        assert shapes["reshape"] == (10, 36)
        assert shapes["lstm0"] == (10, 10)
        assert shapes["lstm1"] == (6,)
        assert shapes["output"] == (1,)

    def test_dataset2_has_relu_layer(self):
        """Test the second architecture adds a ReLU dense layer"""
        spec = dataset2_spec(4)
        assert spec.dense == (DenseSpec(6, "relu"),)
        assert spec.input_shape == (4, 20)

    def test_valid_kernel_too_large(self):
        """Test an oversized kernel is refused naming the conv layer"""
        with pytest.raises(ShapeError) as info:
            ModelSpec(input_shape=(2, 10), kernel=(3, 2), padding="valid")
        assert info.value.layer == "conv"

    def test_round_trip_dict(self):
        """Test to_dict/from_dict preserve every layer setting"""
        spec = dataset2_spec(3)
        assert ModelSpec.from_dict(spec.to_dict()) == spec


class TestNetwork:
    """Test cases for the assembled network"""

    def setup_method(self):
        """Setup a small network and random batch"""
        self.spec = ModelSpec(input_shape=(3, 4), filters=2, kernel=(3, 2), lstm_units=(3, 2))
        self.model = CnnLstm(self.spec, seed=1)
        rng = np.random.default_rng(7)
        self.x = rng.normal(size=(5, 3, 4))
        self.y = rng.normal(size=5)

    def test_zero_weights_predict_bias(self):
        """Test zeroed parameters predict the output bias"""
        params = self.model.parameters()
        for value in params.values():
            value[...] = 0.0
        params["output.b"][...] = 0.7
        np.testing.assert_allclose(forward(self.model, self.x)[:, 0], 0.7)

    def test_single_and_batch_forward(self):
        """Test a single matrix gives the same prediction as its batch row"""
        batch = forward(self.model, self.x)
        np.testing.assert_allclose(forward(self.model, self.x[2]), batch[2])

    def test_wrong_input_shape(self):
        """Test a mismatched input raises a ShapeError for the input layer"""
        with pytest.raises(ShapeError) as info:
            self.model.forward(np.zeros((2, 4, 4)))
        assert info.value.layer == "input"

    def test_set_parameters_shape(self):
        """Test parameter values must match the architecture"""
        with pytest.raises(ShapeError) as info:
            self.model.set_parameters({"lstm1.U": np.zeros((3, 3))})
        assert info.value.layer == "lstm1"

    def test_zero_residual(self):
        """Test targets equal to the prediction give zero gradients"""
        y = forward(self.model, self.x)[:, 0]
        grads = backward(self.model, self.x, y)
        for value in grads.values():
            np.testing.assert_allclose(value, 0.0, atol=1e-15)

    def test_seed_controls_init(self):
        """Test initialisation is reproducible per seed"""
        other = CnnLstm(self.spec, seed=1)
        different = CnnLstm(self.spec, seed=2)
        np.testing.assert_array_equal(other.parameters()["conv.W"], self.model.parameters()["conv.W"])
        assert not np.array_equal(different.parameters()["conv.W"], self.model.parameters()["conv.W"])


class TestGradients:
    """Test cases comparing analytic and finite-difference gradients"""

    def batch(self, spec, size=4, seed=3):
        rng = np.random.default_rng(seed)
        channels, lag = spec.input_shape
        return rng.normal(size=(size, channels, lag)), rng.normal(size=size)

    def check(self, spec, n_params=200):
        x, y = self.batch(spec)
        assert grad_check(CnnLstm(spec, seed=5), x, y, n_params=n_params) < 1e-4

    def test_convolution_and_dense(self):
        """Test a single-unit recurrence so conv and dense gradients dominate"""
        self.check(ModelSpec(input_shape=(3, 4), filters=3, kernel=(3, 2), lstm_units=(1,)))

    def test_stacked_recurrence(self):
        """Test two stacked recurrent layers"""
        self.check(ModelSpec(input_shape=(2, 5), filters=2, kernel=(1, 1), lstm_units=(4, 3)))

    def test_relu_dense(self):
        """Test a hidden ReLU dense layer"""
        self.check(ModelSpec(input_shape=(3, 4), filters=2, kernel=(3, 2), lstm_units=(3,),
                             dense=(DenseSpec(4, "relu"), DenseSpec(2))))

    def test_valid_padding(self):
        """Test the valid-padding convolution"""
        self.check(ModelSpec(input_shape=(4, 5), filters=2, kernel=(3, 2), padding="valid", lstm_units=(3,)))

    def test_dataset1_architecture(self):
        """Test the first full architecture over 200 sampled parameters"""
        self.check(dataset1_spec(3))

    def test_dataset2_architecture(self):
        """Test the second full architecture over 200 sampled parameters"""
        self.check(dataset2_spec(4))

    def test_single_channel(self):
        """Test a minimal one-station input"""
        self.check(ModelSpec(input_shape=(1, 4), filters=2, kernel=(1, 2), lstm_units=(3,)))

    def test_output_layer_closed_form(self):
        """Test the linear output layer against 2 * mean(residual * input)"""
        spec = ModelSpec(input_shape=(1, 4), filters=2, kernel=(1, 2), lstm_units=(3,))
        model = CnnLstm(spec, seed=2)
        x, y = self.batch(spec, size=6)
        grads = backward(model, x, y)

        h = reshape_for_recurrence(model.conv.forward(x))
        for layer in model.recurrent:
            h = layer.forward(h)
        residual = forward(model, x)[:, 0] - y
        np.testing.assert_allclose(grads["output.b"], [2.0 * residual.mean()], rtol=1e-10, atol=1e-14)
        np.testing.assert_allclose(grads["output.W"][:, 0], 2.0 * (residual[:, None] * h).mean(axis=0),
                                   rtol=1e-10, atol=1e-14)


class TestAdadelta:
    """Test cases for the Adadelta update"""

    def test_first_and_second_step(self):
        """Test scalar updates against the recurrence evaluated by hand"""
        params = {"p": np.zeros(1)}
        state = AdadeltaState.for_params(params)
        grads = {"p": np.ones(1)}
        adadelta_step(params, grads, state)
        first = -0.10 * np.sqrt(1e-7) / np.sqrt(0.05 + 1e-7)
        assert params["p"][0] == pytest.approx(first, rel=1e-9)
        assert params["p"][0] == pytest.approx(-1.41421e-4, rel=1e-5)

        ed = 0.05 * (first / 0.10) ** 2
        second = -0.10 * np.sqrt(ed + 1e-7) / np.sqrt(0.95 * 0.05 + 0.05 + 1e-7)
        adadelta_step(params, grads, state)
        assert params["p"][0] == pytest.approx(first + second, rel=1e-9)

    def test_zero_gradient(self):
        """Test a zero gradient leaves parameters unchanged"""
        params = {"p": np.array([0.5, -2.0])}
        adadelta_step(params, {"p": np.zeros(2)}, AdadeltaState())
        np.testing.assert_array_equal(params["p"], [0.5, -2.0])

    def test_moves_against_gradient(self):
        """Test each parameter moves opposite to its gradient sign"""
        params = {"p": np.zeros(3)}
        adadelta_step(params, {"p": np.array([2.0, -0.5, 1e-3])}, AdadeltaState())
        assert np.all(np.sign(params["p"]) == [-1.0, 1.0, -1.0])

    def test_loss_scaling(self):
        """Test scaling gradients by c scales Eg by c^2 and keeps the step sign"""
        small, large = AdadeltaState(), AdadeltaState()
        p_small, p_large = {"p": np.zeros(1)}, {"p": np.zeros(1)}
        adadelta_step(p_small, {"p": np.array([0.3])}, small)
        adadelta_step(p_large, {"p": np.array([3.0])}, large)
        assert large.eg["p"][0] == pytest.approx(100.0 * small.eg["p"][0])
        assert np.sign(p_small["p"][0]) == np.sign(p_large["p"][0])

    def test_shape_mismatch(self):
        """Test a wrong gradient shape names the parameter"""
        with pytest.raises(ShapeError) as info:
            adadelta_step({"dense0.W": np.zeros((2, 2))}, {"dense0.W": np.zeros(3)}, AdadeltaState())
        assert info.value.layer == "dense0.W"


class TestWindowDataset:
    """Test cases for sample containers"""

    def test_chronological_split(self):
        """Test 60/15/25 partitions keep order"""
        data = WindowDataset(np.zeros((20, 2, 3)), np.arange(20.0))
        train_part, val_part, test_part = data.split((0.6, 0.15, 0.25))
        assert (len(train_part), len(val_part), len(test_part)) == (12, 3, 5)
        np.testing.assert_array_equal(test_part.targets, np.arange(15.0, 20.0))

    def test_empty_partition(self):
        """Test too few samples for a validation partition"""
        with pytest.raises(InsufficientDataError):
            WindowDataset(np.zeros((3, 2, 3)), np.zeros(3)).split((0.6, 0.15, 0.25))

    def test_mismatched_targets(self):
        """Test one target per window is required"""
        with pytest.raises(ValidationError):
            WindowDataset(np.zeros((3, 2, 3)), np.zeros(4))


class TestStandardizer:
    """Test cases for feature scaling"""

    def test_per_channel_statistics(self):
        """Test channel means and a constant channel's unit std"""
        x = np.stack([np.stack([np.full(4, 1.0), np.arange(4.0)]), np.stack([np.full(4, 1.0), np.arange(4.0) + 4])])
        scaler = Standardizer.fit(x, np.array([2.0, 4.0]))
        np.testing.assert_allclose(scaler.feature_mean, [1.0, 3.5])
        assert scaler.feature_std[0] == 1.0
        assert scaler.target_mean == pytest.approx(3.0)
        assert scaler.inverse_target(scaler.transform_target(np.array([7.0])))[0] == pytest.approx(7.0)


class TestTraining:
    """Test cases for fitting and inference"""

    def setup_method(self):
        """Setup a small learnable dataset"""
        rng = np.random.default_rng(11)
        windows = rng.normal(size=(60, 2, 4))
        self.dataset = WindowDataset(windows, 3.0 * windows[:, 0, -1] - windows[:, 1, -2] + 20.0)
        self.spec = ModelSpec(input_shape=(2, 4), filters=2, kernel=(1, 2), lstm_units=(4,))
        self.config = TrainConfig(batch_size=5, epochs=40, lr=1.0, seed=2)

    def test_history(self):
        """Test epoch 0 is recorded and the best epoch has the lowest validation loss"""
        _, history = train(self.spec, self.dataset, self.config)
        assert len(history.records) == self.config.epochs + 1
        assert history.records[0].epoch == 0
        assert history.val_losses[history.best_epoch] == min(history.val_losses)
        assert min(history.train_losses[1:]) < history.train_losses[0]

    def test_scaler_fitted_on_training_part(self):
        """Test target statistics come from the first 60% only"""
        trained, _ = train(self.spec, self.dataset, TrainConfig(epochs=0))
        assert trained.scaler.target_mean == pytest.approx(self.dataset.targets[:36].mean())

    def test_deterministic(self):
        """Test identical seeds give identical parameters"""
        first, _ = train(self.spec, self.dataset, TrainConfig(batch_size=5, epochs=3, seed=4))
        again, _ = train(self.spec, self.dataset, TrainConfig(batch_size=5, epochs=3, seed=4))
        for key, value in first.params.items():
            np.testing.assert_array_equal(value, again.params[key])

    def test_memorises_constant_target(self):
        """Test identical samples are predicted at their constant target"""
        data = WindowDataset(np.ones((20, 2, 4)), np.full(20, 50.0))
        trained, history = train(self.spec, data, TrainConfig(batch_size=1, epochs=30, lr=1.0))
        assert history.val_losses[history.best_epoch] < 1e-3
        assert predict(trained, data.windows[0]) == pytest.approx(50.0, abs=0.5)

    def test_predict_does_not_mutate(self):
        """Test inference leaves the fitted parameters untouched"""
        trained, _ = train(self.spec, self.dataset, TrainConfig(epochs=1))
        before = {k: v.copy() for k, v in trained.params.items()}
        batch = predict(trained, self.dataset.windows[:7])
        assert batch.shape == (7,)
        assert predict(trained, self.dataset.windows[3]) == pytest.approx(batch[3])
        for key, value in before.items():
            np.testing.assert_array_equal(value, trained.params[key])


class TestSerialization:
    """Test cases for the model file"""

    def setup_method(self):
        """Setup an untrained model"""
        rng = np.random.default_rng(0)
        self.windows = rng.normal(size=(12, 3, 10))
        self.trained, _ = train(dataset1_spec(3), WindowDataset(self.windows, rng.normal(size=12)),
                                TrainConfig(epochs=0))

    def test_round_trip(self, tmp_path):
        """Test a saved model predicts identically after loading"""
        path = save_model(self.trained, tmp_path / "model.nwl", meta={"scenario": "A1"})
        loaded = load_model(path)
        np.testing.assert_array_equal(predict(loaded, self.windows), predict(self.trained, self.windows))
        assert read_header(path)["meta"] == {"scenario": "A1"}
        assert loaded.spec == self.trained.spec

    def test_bad_magic(self, tmp_path):
        """Test foreign files are rejected"""
        path = save_model(self.trained, tmp_path / "model.nwl")
        path.write_bytes(b"XXXX" + path.read_bytes()[4:])
        with pytest.raises(ValidationError):
            load_model(path)

    def test_truncated(self, tmp_path):
        """Test a cut payload is rejected"""
        path = save_model(self.trained, tmp_path / "model.nwl")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValidationError):
            load_model(path)
