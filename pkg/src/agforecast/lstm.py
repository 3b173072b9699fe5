"""Single-layer LSTM regressor trained with full-batch gradient descent.

Deliberately minimal: tanh activations, squared-error loss, deterministic
seeded initialization, no shuffling, no adaptive optimizer. Everything a
result depends on is in the config, so repeated runs are bitwise identical.

The public ``forward``/``backward`` operate on one window; training uses
batched equivalents internally (same arithmetic, vectorized over windows).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from .errors import DivergenceError, ZeroVarianceError
from .series import asarray_1d

__all__ = [
    "LstmConfig",
    "LstmParams",
    "Normalizer",
    "SupervisedWindows",
    "TrainResult",
    "init",
    "forward",
    "backward",
    "make_windows",
    "train",
    "predict_one",
]

_GATE_NAMES = ("i", "f", "o", "c")


@dataclass(frozen=True)
class LstmConfig:
    input_dim: int = 1
    hidden_size: int = 32
    lookback_k: int = 10
    epochs: int = 300
    learning_rate: float = 0.01
    seed: int = 0
    grad_clip: float = 5.0

    def __post_init__(self):
        if self.input_dim < 1 or self.hidden_size < 1 or self.lookback_k < 1:
            raise ValueError("input_dim, hidden_size, and lookback_k must be positive")
        # epochs = 0 is allowed: it returns the seeded initial parameters.
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.learning_rate <= 0.0 or self.grad_clip <= 0.0:
            raise ValueError("learning_rate and grad_clip must be positive")


@dataclass(frozen=True)
class LstmParams:
    """Gate weights over (input, previous hidden), biases, and the linear
    readout. Shapes: W_x* (hidden, input_dim), W_h* (hidden, hidden),
    b_* (hidden,), w_out (hidden,), b_out scalar."""

    W_xi: np.ndarray
    W_hi: np.ndarray
    b_i: np.ndarray
    W_xf: np.ndarray
    W_hf: np.ndarray
    b_f: np.ndarray
    W_xo: np.ndarray
    W_ho: np.ndarray
    b_o: np.ndarray
    W_xc: np.ndarray
    W_hc: np.ndarray
    b_c: np.ndarray
    w_out: np.ndarray
    b_out: float

    def __post_init__(self):
        hidden, input_dim = self.W_xi.shape
        for name in _GATE_NAMES:
            if getattr(self, f"W_x{name}").shape != (hidden, input_dim):
                raise ValueError(f"W_x{name} shape mismatch")
            if getattr(self, f"W_h{name}").shape != (hidden, hidden):
                raise ValueError(f"W_h{name} shape mismatch")
            if getattr(self, f"b_{name}").shape != (hidden,):
                raise ValueError(f"b_{name} shape mismatch")
        if self.w_out.shape != (hidden,):
            raise ValueError("w_out shape mismatch")
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.all(np.isfinite(v)):
                raise ValueError(f"parameter {f.name} contains non-finite entries")

    @property
    def hidden_size(self) -> int:
        return self.W_xi.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W_xi.shape[1]

    def as_dict(self) -> dict[str, np.ndarray]:
        return {f.name: np.asarray(getattr(self, f.name), dtype=np.float64)
                for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "LstmParams":
        kwargs = {k: np.asarray(v, dtype=np.float64) for k, v in d.items()}
        kwargs["b_out"] = float(np.asarray(d["b_out"]))
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps({k: v.tolist() for k, v in self.as_dict().items()},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LstmParams":
        return cls.from_dict(json.loads(text))


def init(config: LstmConfig) -> LstmParams:
    """Seeded uniform initialization in [-1/sqrt(hidden), 1/sqrt(hidden)];
    the forget-gate bias starts at 1 so early gradients can flow."""
    rng = np.random.default_rng(config.seed)
    h, d = config.hidden_size, config.input_dim
    s = 1.0 / np.sqrt(h)

    def u(*shape):
        return rng.uniform(-s, s, size=shape)

    kwargs = {}
    for name in _GATE_NAMES:
        kwargs[f"W_x{name}"] = u(h, d)
        kwargs[f"W_h{name}"] = u(h, h)
        kwargs[f"b_{name}"] = np.ones(h) if name == "f" else u(h)
    kwargs["w_out"] = u(h)
    kwargs["b_out"] = float(u(1)[0])
    return LstmParams(**kwargs)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _forward_batch(params: LstmParams, X: np.ndarray):
    """Run the recurrence over a (N, k, input_dim) window stack.

    Returns (predictions (N,), cache) where the cache holds the per-step
    activations needed for backpropagation through time.
    """
    N, k, _ = X.shape
    hsz = params.hidden_size
    h = np.zeros((N, hsz))
    c = np.zeros((N, hsz))
    steps = []
    for t in range(k):
        x = X[:, t, :]
        i = _sigmoid(x @ params.W_xi.T + h @ params.W_hi.T + params.b_i)
        f = _sigmoid(x @ params.W_xf.T + h @ params.W_hf.T + params.b_f)
        o = _sigmoid(x @ params.W_xo.T + h @ params.W_ho.T + params.b_o)
        g = np.tanh(x @ params.W_xc.T + h @ params.W_hc.T + params.b_c)
        c_new = f * c + i * g
        tanh_c = np.tanh(c_new)
        h_new = o * tanh_c
        steps.append({"x": x, "h_prev": h, "c_prev": c, "i": i, "f": f,
                      "o": o, "g": g, "tanh_c": tanh_c})
        h, c = h_new, c_new
    preds = h @ params.w_out + params.b_out
    return preds, {"steps": steps, "h_final": h}


def _backward_batch(params: LstmParams, cache, preds, targets):
    """Gradients of mean(0.5 * (pred - target)^2) over the batch."""
    N = preds.shape[0]
    steps = cache["steps"]
    grads = {name: np.zeros_like(arr) for name, arr in params.as_dict().items()}

    dpred = (preds - targets) / N                        # (N,)
    grads["w_out"] = cache["h_final"].T @ dpred
    grads["b_out"] = np.float64(np.sum(dpred))
    dh = np.outer(dpred, params.w_out)                   # (N, hidden)
    dc = np.zeros_like(dh)

    for step in reversed(steps):
        i, f, o, g = step["i"], step["f"], step["o"], step["g"]
        tanh_c = step["tanh_c"]
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c * tanh_c)
        di = dc * g
        df = dc * step["c_prev"]
        dg = dc * i
        dz = {
            "i": di * i * (1.0 - i),
            "f": df * f * (1.0 - f),
            "o": do * o * (1.0 - o),
            "c": dg * (1.0 - g * g),
        }
        x, h_prev = step["x"], step["h_prev"]
        dh_prev = np.zeros_like(dh)
        for name in _GATE_NAMES:
            grads[f"W_x{name}"] += dz[name].T @ x
            grads[f"W_h{name}"] += dz[name].T @ h_prev
            grads[f"b_{name}"] += dz[name].sum(axis=0)
            dh_prev += dz[name] @ getattr(params, f"W_h{name}")
        dh = dh_prev
        dc = dc * f
    return grads


def forward(params: LstmParams, window) -> tuple[float, dict]:
    """One prediction from a (k, input_dim) window of already-normalized
    inputs. Also returns the cached activations."""
    W = _check_window(params, window)
    preds, cache = _forward_batch(params, W[None, :, :])
    return float(preds[0]), cache


def backward(params: LstmParams, window, target: float) -> dict[str, np.ndarray]:
    """Exact gradients of 0.5 * (prediction - target)^2 for one window,
    truncated at the window start. Clipping is the trainer's job."""
    W = _check_window(params, window)
    preds, cache = _forward_batch(params, W[None, :, :])
    return _backward_batch(params, cache, preds, np.array([float(target)]))


def _check_window(params: LstmParams, window) -> np.ndarray:
    W = np.asarray(window, dtype=np.float64)
    if W.ndim == 1:
        W = W[:, None]
    if W.ndim != 2 or W.shape[1] != params.input_dim:
        raise ValueError(
            f"window shape {np.shape(window)} incompatible with input_dim {params.input_dim}"
        )
    return W


@dataclass(frozen=True)
class Normalizer:
    """Per-feature min-max map to [0, 1], fitted on training data only.
    Out-of-range test values are allowed to leave [0, 1]."""

    shift: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        shift = np.asarray(self.shift, dtype=np.float64).reshape(-1)
        scale = np.asarray(self.scale, dtype=np.float64).reshape(-1)
        if len(shift) != len(scale):
            raise ValueError("shift and scale must have equal length")
        if np.any(scale <= 0.0):
            raise ValueError("every scale must be positive")
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "scale", scale)

    @classmethod
    def fit(cls, columns: Sequence, on_degenerate: str = "error") -> "Normalizer":
        """Fit from one 1-D array per feature. A zero-range feature raises by
        default; ``on_degenerate="unit"`` substitutes scale 1 instead."""
        shift = []
        scale = []
        for idx, col in enumerate(columns):
            arr = asarray_1d(col)
            lo, hi = float(arr.min()), float(arr.max())
            rng = hi - lo
            if rng <= 0.0:
                if on_degenerate == "unit":
                    rng = 1.0
                else:
                    raise ZeroVarianceError(
                        f"feature {idx} is constant; min-max scale undefined"
                    )
            shift.append(lo)
            scale.append(rng)
        return cls(shift=np.array(shift), scale=np.array(scale))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.shift) / self.scale

    def inverse(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) * self.scale + self.shift

    def transform_target(self, t):
        return (np.asarray(t, dtype=np.float64) - self.shift[0]) / self.scale[0]

    def inverse_target(self, t):
        return np.asarray(t, dtype=np.float64) * self.scale[0] + self.shift[0]


@dataclass(frozen=True)
class SupervisedWindows:
    """Lagged windows and next-step targets: inputs (N, k, F), targets (N,).
    Targets are the first feature one step after each window."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        if self.inputs.ndim != 3 or self.targets.ndim != 1:
            raise ValueError("inputs must be (N, k, F) and targets (N,)")
        if len(self.inputs) != len(self.targets):
            raise ValueError("inputs and targets must align")
        if len(self.inputs) < 1:
            raise ValueError("at least one training window is required")

    def __len__(self):
        return len(self.targets)


def make_windows(features, k: int) -> SupervisedWindows:
    """Build the supervised set from one series or several aligned series.

    Example with one feature and k=2: [1,2,3,4,5] yields windows
    ([1,2]->3, [2,3]->4, [3,4]->5). With several features, input vectors
    stack the features and the target is always the first feature.
    """
    if isinstance(features, (list, tuple)) and not np.isscalar(features[0]):
        cols = [asarray_1d(f) for f in features]
    else:
        cols = [asarray_1d(features)]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("all feature series must have equal length")
    if k < 1:
        raise ValueError("lookback k must be positive")
    if n <= k:
        raise ValueError(f"need more than k={k} points, got {n}")
    mat = np.column_stack(cols)                  # (n, F)
    num = n - k
    inputs = np.empty((num, k, mat.shape[1]))
    for t in range(num):
        inputs[t] = mat[t:t + k]
    targets = mat[k:, 0].copy()
    return SupervisedWindows(inputs=inputs, targets=targets)


@dataclass(frozen=True)
class TrainResult:
    params: LstmParams
    normalizer: Normalizer
    loss_curve: tuple[float, ...]


def _clip_by_global_norm(grads: dict, clip: float) -> dict:
    total = 0.0
    for g in grads.values():
        total += float(np.sum(np.square(g)))
    norm = np.sqrt(total)
    if norm <= clip or norm == 0.0:
        return grads
    factor = clip / norm
    return {k: g * factor for k, g in grads.items()}


# Heavy-ball factor for the full-batch updates. Plain fixed-step descent is
# far too slow on these ill-conditioned recurrences; momentum with a monotone
# safeguard (below) keeps training deterministic and loss non-increasing.
_MOMENTUM = 0.95


def _apply_update(params: LstmParams, update: dict, lr: float) -> LstmParams:
    d = params.as_dict()
    for name, u in update.items():
        d[name] = d[name] - lr * u
    return LstmParams.from_dict(d)


def train(config: LstmConfig, data: SupervisedWindows,
          normalizer: Normalizer | None = None) -> TrainResult:
    """Full-batch gradient descent with classical momentum on mean squared
    error, in normalized units, for exactly ``config.epochs`` epochs.

    Deterministic: fixed seeded initialization, no shuffling, no adaptive
    per-parameter rates. Each momentum step is accepted only if it does not
    increase the training loss; otherwise the velocity restarts at the bare
    gradient and a plain gradient step is taken instead. The loss curve
    holds the pre-update MSE of each epoch.
    """
    if data.inputs.shape[1] != config.lookback_k or data.inputs.shape[2] != config.input_dim:
        raise ValueError(
            f"window shape {data.inputs.shape[1:]} does not match config "
            f"(k={config.lookback_k}, input_dim={config.input_dim})"
        )
    if normalizer is None:
        columns = []
        for j in range(config.input_dim):
            col = data.inputs[:, :, j].ravel()
            if j == 0:
                col = np.concatenate((col, data.targets))
            columns.append(col)
        normalizer = Normalizer.fit(columns, on_degenerate="error")
    X = normalizer.transform(data.inputs)
    y = normalizer.transform_target(data.targets)

    def mse_of(p: LstmParams) -> float:
        preds, _ = _forward_batch(p, X)
        return float(np.mean((preds - y) ** 2))

    params = init(config)
    velocity = None
    losses = []
    for epoch in range(config.epochs):
        preds, cache = _forward_batch(params, X)
        loss = float(np.mean((preds - y) ** 2))
        if not np.isfinite(loss):
            raise DivergenceError(f"training loss became non-finite at epoch {epoch}",
                                  epoch=epoch)
        losses.append(loss)
        grads = _backward_batch(params, cache, preds, y)
        grads = _clip_by_global_norm(grads, config.grad_clip)
        if velocity is None:
            velocity = {k: np.zeros_like(np.asarray(g, dtype=np.float64))
                        for k, g in grads.items()}
        trial_velocity = {k: _MOMENTUM * velocity[k] + g for k, g in grads.items()}
        trial = _apply_update(params, trial_velocity, config.learning_rate)
        if mse_of(trial) > loss:
            velocity = dict(grads)
            params = _apply_update(params, grads, config.learning_rate)
        else:
            velocity = trial_velocity
            params = trial
    return TrainResult(params=params, normalizer=normalizer, loss_curve=tuple(losses))


def predict_one(params: LstmParams, normalizer: Normalizer, window) -> float:
    """Normalize a raw-unit (k, input_dim) window, run the network, and map
    the prediction back to raw units."""
    W = _check_window(params, window)
    pred, _ = forward(params, normalizer.transform(W))
    return float(normalizer.inverse_target(pred))
