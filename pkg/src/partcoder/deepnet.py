"""Greedy layer-wise pretraining, the (optionally nonnegativity-constrained)
softmax head, joint supervised fine-tuning, and prediction.

The softmax layer has no bias row: class scores are w_p . x only. During
fine-tuning the asymmetric quadratic penalty applies to the softmax weights
alone; encoder weights and all biases receive no penalty gradient.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .autoencoder import Dataset, encode, train_autoencoder
from .coremath import ParamLayout, flatten, sigmoid, unflatten
from .errors import ShapeError
from .optimizer import OptimizerConfig, minimize


@dataclass(frozen=True)
class EncoderLayer:
    w: np.ndarray  # (s_l, s_{l-1})
    b: np.ndarray  # (s_l,)

    def __post_init__(self):
        object.__setattr__(self, "w", np.ascontiguousarray(self.w, dtype=np.float64))
        object.__setattr__(self, "b", np.ascontiguousarray(self.b, dtype=np.float64))
        if self.b.shape != (self.w.shape[0],):
            raise ShapeError("bias length must equal the layer's output size")


@dataclass(frozen=True)
class DeepNetwork:
    """Stack of encoder halves plus a softmax weight matrix (one column per
    class). softmax_w is None until the head is trained."""

    encoders: tuple
    softmax_w: np.ndarray | None = None
    class_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "encoders", tuple(self.encoders))
        for prev, nxt in zip(self.encoders, self.encoders[1:]):
            if nxt.w.shape[1] != prev.w.shape[0]:
                raise ShapeError("adjacent encoder layer dimensions do not chain")
        if self.softmax_w is not None:
            W = np.ascontiguousarray(self.softmax_w, dtype=np.float64)
            object.__setattr__(self, "softmax_w", W)
            if W.shape != (self.feature_size, self.class_count):
                raise ShapeError(
                    f"softmax weights must be {(self.feature_size, self.class_count)},"
                    f" got {W.shape}"
                )

    @property
    def input_size(self):
        return self.encoders[0].w.shape[1]

    @property
    def feature_size(self):
        return self.encoders[-1].w.shape[0]

    @property
    def layer_sizes(self):
        return [self.input_size] + [e.w.shape[0] for e in self.encoders]


def deep_features(net, X):
    """Top-layer hidden activations: X folded through every encoder."""
    A = np.asarray(X, dtype=np.float64)
    if A.shape[1] != net.input_size:
        raise ShapeError(
            f"input has {A.shape[1]} features, network expects {net.input_size}"
        )
    for layer in net.encoders:
        A = sigmoid(A @ layer.w.T + layer.b)
    return A


def _check_labels(y, k, m):
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (m,):
        raise ShapeError("labels must be one integer per sample")
    if y.size and (y.min() < 0 or y.max() >= k):
        raise ValueError(f"labels must lie in [0, {k})")
    return y


def softmax_probabilities(W, X):
    """Row-stochastic class probabilities, log-sum-exp stabilized."""
    logits = X @ W
    logits = logits - logits.max(axis=1, keepdims=True)
    P = np.exp(logits)
    P /= P.sum(axis=1, keepdims=True)
    return P


def softmax_cost_grad(W, X, y, k):
    """Mean negative log-likelihood of the true classes and its gradient.

    W: (features, k) with one column of input weights per class; no bias row.
    """
    X = np.asarray(X, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    m = X.shape[0]
    if W.shape != (X.shape[1], k):
        raise ShapeError(f"softmax weights must be {(X.shape[1], k)}, got {W.shape}")
    y = _check_labels(y, k, m)

    logits = X @ W
    shift = logits.max(axis=1, keepdims=True)
    lse = shift[:, 0] + np.log(np.exp(logits - shift).sum(axis=1))
    cost = float(np.mean(lse - logits[np.arange(m), y]))

    P = np.exp(logits - shift)
    P /= P.sum(axis=1, keepdims=True)
    P[np.arange(m), y] -= 1.0
    grad = X.T @ P / m
    return cost, grad


def nc_softmax_cost_grad(W, X, y, k, alpha):
    """Softmax cost plus the asymmetric quadratic penalty on negative weights."""
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    cost, grad = softmax_cost_grad(W, X, y, k)
    if alpha > 0.0:
        W = np.asarray(W, dtype=np.float64)
        cost += 0.5 * alpha * kernels.negative_quadratic_penalty(W)
        grad = grad + alpha * kernels.negative_quadratic_grad(W)
    return cost, grad


def greedy_pretrain(data, layer_sizes, cfg, opt=None, layer_cfgs=None):
    """Train one autoencoder per layer on the previous layer's hidden
    activations; keep the encoder halves.

    layer_cfgs, when given, overrides cfg per layer (None entries fall back).
    Each layer's seed is cfg.rng_seed + layer index so stages stay
    independent but reproducible. Returns (DeepNetwork, [OptimizerReport]).
    """
    if not layer_sizes:
        raise ValueError("layer_sizes must be nonempty")
    if layer_cfgs is not None and len(layer_cfgs) != len(layer_sizes):
        raise ValueError("layer_cfgs must match layer_sizes in length")
    X = data.X if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)

    encoders = []
    reports = []
    current = X
    for i, size in enumerate(layer_sizes):
        layer_cfg = layer_cfgs[i] if layer_cfgs is not None and layer_cfgs[i] else cfg
        layer_cfg = replace(layer_cfg, hidden_size=size,
                            rng_seed=layer_cfg.rng_seed + i)
        params, report = train_autoencoder(current, layer_cfg, opt)
        encoders.append(EncoderLayer(params.w1, params.b1))
        reports.append(report)
        current = encode(params, current)
    return DeepNetwork(encoders=tuple(encoders)), reports


def train_softmax_head(net, data, alpha, opt=None, k=None):
    """Fit the softmax weights on top-layer features with encoders frozen.

    Starts from zero weights (cost ln k) for determinism. Returns
    (DeepNetwork with head, OptimizerReport).
    """
    if data.labels is None:
        raise ValueError("softmax training requires labels")
    k = k if k is not None else data.n_classes
    feats = deep_features(net, data.X)
    W0 = np.zeros((net.feature_size, k))

    def objective(wflat):
        W = wflat.reshape(net.feature_size, k)
        cost, grad = nc_softmax_cost_grad(W, feats, data.labels, k, alpha)
        return cost, grad.reshape(-1)

    w_star, report = minimize(objective, W0.reshape(-1), opt or OptimizerConfig())
    trained = DeepNetwork(
        encoders=net.encoders,
        softmax_w=w_star.reshape(net.feature_size, k),
        class_count=k,
    )
    return trained, report


@dataclass(frozen=True)
class FineTuneConfig:
    alpha: float = 0.0
    optimizer: OptimizerConfig = OptimizerConfig()

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError("alpha must be >= 0")


def deepnet_layout(net):
    segments = []
    for i, layer in enumerate(net.encoders):
        segments.append((f"w{i}", layer.w.shape))
        segments.append((f"b{i}", layer.b.shape))
    segments.append(("softmax_w", (net.feature_size, net.class_count)))
    return ParamLayout(tuple(segments))


def deepnet_to_flat(net):
    values = {}
    for i, layer in enumerate(net.encoders):
        values[f"w{i}"] = layer.w
        values[f"b{i}"] = layer.b
    values["softmax_w"] = net.softmax_w
    return flatten(values, deepnet_layout(net))


def deepnet_from_flat(v, template):
    parts = unflatten(v, deepnet_layout(template))
    encoders = tuple(
        EncoderLayer(parts[f"w{i}"], parts[f"b{i}"])
        for i in range(len(template.encoders))
    )
    return DeepNetwork(encoders=encoders, softmax_w=parts["softmax_w"],
                       class_count=template.class_count)


def deep_objective_and_gradient(theta, template, X, y, k, alpha):
    """Joint classification objective over all encoder layers plus the head.

    Only the softmax weights carry the nonnegativity penalty; encoder
    weights and every bias receive none.
    """
    net = deepnet_from_flat(theta, template)
    X = np.asarray(X, dtype=np.float64)
    m = X.shape[0]
    y = _check_labels(y, k, m)

    activations = [X]
    A = X
    for layer in net.encoders:
        A = sigmoid(A @ layer.w.T + layer.b)
        activations.append(A)
    feats = activations[-1]

    W = net.softmax_w
    logits = feats @ W
    shift = logits.max(axis=1, keepdims=True)
    lse = shift[:, 0] + np.log(np.exp(logits - shift).sum(axis=1))
    cost = float(np.mean(lse - logits[np.arange(m), y]))
    cost += 0.5 * alpha * kernels.negative_quadratic_penalty(W)

    P = np.exp(logits - shift)
    P /= P.sum(axis=1, keepdims=True)
    P[np.arange(m), y] -= 1.0
    P /= m
    grads = {"softmax_w": feats.T @ P + alpha * kernels.negative_quadratic_grad(W)}

    delta = kernels.sigmoid_chain(P @ W.T, feats)
    for i in range(len(net.encoders) - 1, -1, -1):
        grads[f"w{i}"] = delta.T @ activations[i]
        grads[f"b{i}"] = delta.sum(axis=0)
        if i > 0:
            delta = kernels.sigmoid_chain(delta @ net.encoders[i].w, activations[i])
    return cost, flatten(grads, deepnet_layout(template))


def fine_tune(net, data, cfg):
    """Jointly optimize every encoder layer and the softmax head.

    Returns (DeepNetwork, OptimizerReport)."""
    if net.softmax_w is None:
        raise ValueError("fine_tune requires a trained softmax head")
    if data.labels is None:
        raise ValueError("fine_tune requires labels")
    k = net.class_count

    def objective(theta):
        return deep_objective_and_gradient(theta, net, data.X, data.labels,
                                           k, cfg.alpha)

    x_star, report = minimize(objective, deepnet_to_flat(net), cfg.optimizer)
    return deepnet_from_flat(x_star, net), report


def predict(net, X):
    """Per-sample argmax of the softmax scores; ties go to the lowest index."""
    if net.softmax_w is None:
        raise ValueError("prediction requires a trained softmax head")
    scores = deep_features(net, X) @ net.softmax_w
    return np.argmax(scores, axis=1)


def accuracy(pred, truth):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ShapeError(f"length mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise ValueError("accuracy of zero samples is undefined")
    return float(np.mean(pred == truth))
