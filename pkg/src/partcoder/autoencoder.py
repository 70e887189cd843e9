"""Three-layer autoencoder: forward maps, the sparse and
nonnegativity-constrained objectives, analytic backprop gradients, and a
central-difference gradient oracle.

Conventions: data matrices hold one sample per row (m x n). Encoder weights
w1 are (hidden x n) so hidden unit j's receptive field is row j; decoder
weights w2 are (n x hidden) so unit j's decoding filter is column j. The flat
parameter ordering is [w1; b1; w2; b2], each row-major.
"""

import enum
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .coremath import ParamLayout, flatten, sigmoid, unflatten
from .errors import ConfigError, ShapeError
from .optimizer import OptimizerConfig, Termination, minimize


class Objective(enum.Enum):
    SAE = "sae"
    NCAE = "ncae"


@dataclass(frozen=True)
class TrainConfig:
    """Objective selection and penalty weights for one autoencoder.

    weight_decay is the SAE-only L2 coefficient; nonneg_penalty the NCAE-only
    asymmetric-quadratic coefficient. The objective that does not use a field
    requires it to be zero.
    """

    objective: Objective
    hidden_size: int
    sparsity_weight: float = 3.0
    sparsity_target: float = 0.05
    weight_decay: float = 0.0
    nonneg_penalty: float = 0.0
    input_corruption_rate: float = 0.0
    hidden_dropout_rate: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.hidden_size < 1:
            raise ConfigError("hidden_size must be >= 1")
        if not (0.0 < self.sparsity_target < 1.0):
            raise ConfigError("sparsity_target must lie strictly in (0, 1)")
        if self.sparsity_weight < 0.0:
            raise ConfigError("sparsity_weight must be >= 0")
        if self.weight_decay < 0.0 or self.nonneg_penalty < 0.0:
            raise ConfigError("penalty weights must be >= 0")
        if self.objective is Objective.SAE and self.nonneg_penalty != 0.0:
            raise ConfigError("SAE ignores nonneg_penalty; set it to 0")
        if self.objective is Objective.NCAE and self.weight_decay != 0.0:
            raise ConfigError("NCAE ignores weight_decay; set it to 0")
        for rate in (self.input_corruption_rate, self.hidden_dropout_rate):
            if not (0.0 <= rate < 1.0):
                raise ConfigError("corruption/dropout rates must lie in [0, 1)")


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with entries in [0, 1], plus optional integer labels."""

    X: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        object.__setattr__(self, "X", X)
        if X.ndim != 2:
            raise ShapeError("dataset X must be 2-d (samples x features)")
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise ValueError("dataset entries must lie in [0, 1]")
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            object.__setattr__(self, "labels", labels)
            if labels.shape != (X.shape[0],):
                raise ShapeError("labels must be one integer per sample")
            if labels.size and labels.min() < 0:
                raise ValueError("labels must be nonnegative class indices")

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def n_classes(self):
        if self.labels is None:
            return 0
        return int(self.labels.max()) + 1 if self.labels.size else 0


@dataclass(frozen=True)
class AutoencoderParams:
    """Weights and biases of one encoder/decoder pair."""

    w1: np.ndarray  # (hidden, n)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (n, hidden)
    b2: np.ndarray  # (n,)

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arr)
        hidden, n = self.w1.shape
        if self.w2.shape != (n, hidden):
            raise ShapeError(f"w2 must be {(n, hidden)}, got {self.w2.shape}")
        if self.b1.shape != (hidden,):
            raise ShapeError(f"b1 must be {(hidden,)}, got {self.b1.shape}")
        if self.b2.shape != (n,):
            raise ShapeError(f"b2 must be {(n,)}, got {self.b2.shape}")
        for name in ("w1", "b1", "w2", "b2"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite entries")

    @property
    def n_visible(self):
        return self.w1.shape[1]

    @property
    def n_hidden(self):
        return self.w1.shape[0]

    def layout(self):
        return param_layout(self.n_visible, self.n_hidden)

    def to_flat(self):
        return flatten(
            {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2},
            self.layout(),
        )

    @classmethod
    def from_flat(cls, v, n_visible, n_hidden):
        parts = unflatten(v, param_layout(n_visible, n_hidden))
        return cls(**parts)


def param_layout(n_visible, n_hidden):
    return ParamLayout((
        ("w1", (n_hidden, n_visible)),
        ("b1", (n_hidden,)),
        ("w2", (n_visible, n_hidden)),
        ("b2", (n_visible,)),
    ))


def init_params(n_visible, n_hidden, rng):
    """Symmetric uniform init in [-r, r], r = sqrt(6/(fan_in+fan_out+1));
    biases start at zero."""
    r = np.sqrt(6.0 / (n_visible + n_hidden + 1.0))
    return AutoencoderParams(
        w1=rng.uniform(-r, r, size=(n_hidden, n_visible)),
        b1=np.zeros(n_hidden),
        w2=rng.uniform(-r, r, size=(n_visible, n_hidden)),
        b2=np.zeros(n_visible),
    )


def encode(params, X):
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != params.n_visible:
        raise ShapeError(
            f"input has {X.shape[1]} features, encoder expects {params.n_visible}"
        )
    return sigmoid(X @ params.w1.T + params.b1)


def decode(params, H):
    H = np.asarray(H, dtype=np.float64)
    if H.shape[1] != params.n_hidden:
        raise ShapeError(
            f"hidden matrix has {H.shape[1]} columns, decoder expects {params.n_hidden}"
        )
    return sigmoid(H @ params.w2.T + params.b2)


def reconstruction_cost(X, Xhat):
    """Mean over samples of half the squared reconstruction error."""
    X = np.asarray(X, dtype=np.float64)
    Xhat = np.asarray(Xhat, dtype=np.float64)
    if X.shape != Xhat.shape:
        raise ShapeError(f"shape mismatch {X.shape} vs {Xhat.shape}")
    return kernels.half_squared_difference(Xhat, X) / X.shape[0]


def mean_hidden_activation(H):
    H = np.asarray(H, dtype=np.float64)
    if H.shape[0] == 0:
        raise ValueError("cannot average activations over an empty dataset")
    return H.mean(axis=0)


def kl_sparsity(target, phat):
    """Sum over units of the Bernoulli KL divergence KL(target || phat)."""
    phat = np.asarray(phat, dtype=np.float64)
    if not (0.0 < target < 1.0):
        raise ValueError("target rate must lie strictly in (0, 1)")
    if phat.size and (phat.min() <= 0.0 or phat.max() >= 1.0):
        raise ValueError("mean activations outside (0, 1): degenerate saturation")
    return float(np.sum(
        target * np.log(target / phat)
        + (1.0 - target) * np.log((1.0 - target) / (1.0 - phat))
    ))


def negative_quadratic_penalty(weight_matrices):
    """Sum of w^2 over negative weights across the given matrices."""
    return sum(kernels.negative_quadratic_penalty(w) for w in weight_matrices)


def negative_quadratic_grad(w):
    """Elementwise penalty derivative: w where w < 0, else 0."""
    return kernels.negative_quadratic_grad(np.asarray(w, dtype=np.float64))


def sum_squared_weights(weight_matrices):
    """Sum of squared weights across the given matrices (decay building block)."""
    return sum(kernels.sum_squares(w) for w in weight_matrices)


# phat is clamped away from 0/1 before the logs during optimization; the
# strict-range error is reserved for direct kl_sparsity calls
_KL_CLAMP = 1e-12


def objective_and_gradient(params, X, cfg, corrupted_X=None, dropout_scale=None):
    """Cost and flat gradient of the configured objective on batch X.

    corrupted_X, when given, replaces X at the encoder while X stays the
    reconstruction target (denoising variant). dropout_scale, when given, is
    an (m x hidden) matrix of {0, 1/(1-rate)} factors applied to the hidden
    activations before decoding (inverted dropout). Both default to off; the
    function itself is deterministic so training draws any masks once.

    Returns (cost, grad) with grad in [w1; b1; w2; b2] flat order.
    """
    X = np.asarray(X, dtype=np.float64)
    m = X.shape[0]
    X_in = X if corrupted_X is None else np.asarray(corrupted_X, dtype=np.float64)
    if X_in.shape != X.shape:
        raise ShapeError("corrupted input must match the clean input's shape")

    H = encode(params, X_in)
    H_dec = H if dropout_scale is None else H * dropout_scale
    Xhat = decode(params, H_dec)

    cost_recon = kernels.half_squared_difference(Xhat, X) / m

    beta = cfg.sparsity_weight
    rho = cfg.sparsity_target
    phat = H.mean(axis=0)
    if beta > 0.0:
        phat_c = np.clip(phat, _KL_CLAMP, 1.0 - _KL_CLAMP)
        cost_kl = float(np.sum(
            rho * np.log(rho / phat_c)
            + (1.0 - rho) * np.log((1.0 - rho) / (1.0 - phat_c))
        ))
        kl_delta = beta * (-rho / phat_c + (1.0 - rho) / (1.0 - phat_c))
    else:
        cost_kl = 0.0
        kl_delta = None

    if cfg.objective is Objective.SAE:
        lam = cfg.weight_decay
        cost_pen = 0.5 * lam * (kernels.sum_squares(params.w1)
                                + kernels.sum_squares(params.w2))
        pen_grad_w1 = lam * params.w1
        pen_grad_w2 = lam * params.w2
    else:
        alpha = cfg.nonneg_penalty
        cost_pen = 0.5 * alpha * (kernels.negative_quadratic_penalty(params.w1)
                                  + kernels.negative_quadratic_penalty(params.w2))
        pen_grad_w1 = alpha * kernels.negative_quadratic_grad(params.w1)
        pen_grad_w2 = alpha * kernels.negative_quadratic_grad(params.w2)

    cost = cost_recon + beta * cost_kl + cost_pen

    # backprop; the 1/m of the reconstruction mean rides along in d2
    d2 = kernels.sigmoid_chain((Xhat - X) / m, Xhat)          # (m, n)
    grad_w2 = d2.T @ H_dec + pen_grad_w2
    grad_b2 = d2.sum(axis=0)

    err_h = d2 @ params.w2                                     # dJ_E/dH_dec
    if dropout_scale is not None:
        err_h = err_h * dropout_scale
    if kl_delta is not None:
        err_h = err_h + kl_delta / m
    d1 = kernels.sigmoid_chain(err_h, H)                       # (m, hidden)
    grad_w1 = d1.T @ X_in + pen_grad_w1
    grad_b1 = d1.sum(axis=0)

    grad = flatten(
        {"w1": grad_w1, "b1": grad_b1, "w2": grad_w2, "b2": grad_b2},
        params.layout(),
    )
    return cost, grad


def numerical_gradient(cost_fn, theta, eps=1e-5):
    """Central differences (J(t+eps*e_i) - J(t-eps*e_i)) / (2*eps) per coordinate."""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        step = np.zeros_like(theta)
        step[i] = eps
        grad[i] = (cost_fn(theta + step) - cost_fn(theta - step)) / (2.0 * eps)
    return grad


def max_relative_error(a, b, floor=1e-4):
    """max_i |a_i - b_i| / max(floor, |a_i|, |b_i|), the gradient-check measure.

    The floor reflects what central differences can resolve in float64:
    coordinates below it are compared absolutely (to floor * tolerance)
    because round-off noise of the two cost evaluations, about
    |cost| * 1e-16 / (2 * eps), swamps any relative comparison there.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(floor, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / denom))


def corrupt_input(X, rate, rng):
    """Zero each entry independently with the given probability; the clean X
    stays the reconstruction target."""
    X = np.asarray(X, dtype=np.float64)
    if not (0.0 <= rate < 1.0):
        raise ConfigError("corruption rate must lie in [0, 1)")
    if rate == 0.0:
        return X.copy()
    keep = rng.random(X.shape) >= rate
    return X * keep


def dropout_mask(shape, rate, rng):
    """Inverted-dropout scale matrix: 0 with probability rate, else 1/(1-rate)."""
    if not (0.0 <= rate < 1.0):
        raise ConfigError("dropout rate must lie in [0, 1)")
    if rate == 0.0:
        return np.ones(shape)
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def dropout_hidden(H, rate, rng):
    """Apply inverted dropout to hidden activations (training passes only)."""
    H = np.asarray(H, dtype=np.float64)
    return H * dropout_mask(H.shape, rate, rng)


def train_autoencoder(data, cfg, opt=None):
    """Fit one autoencoder on data.X with L-BFGS (or the configured mode).

    Returns (params, OptimizerReport). A line-search collapse raises no
    error: the best-so-far parameters come back with a warning and the
    report's termination says LINE_SEARCH_FAILURE.
    """
    opt = opt or OptimizerConfig()
    X = data.X if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    m, n = X.shape
    rng = np.random.default_rng(cfg.rng_seed)
    params0 = init_params(n, cfg.hidden_size, rng)
    layout = params0.layout()

    corrupted = None
    if cfg.input_corruption_rate > 0.0:
        corrupted = corrupt_input(X, cfg.input_corruption_rate, rng)
    drop_scale = None
    if cfg.hidden_dropout_rate > 0.0:
        drop_scale = dropout_mask((m, cfg.hidden_size), cfg.hidden_dropout_rate, rng)

    def objective(theta):
        p = AutoencoderParams(**unflatten(theta, layout))
        return objective_and_gradient(p, X, cfg, corrupted_X=corrupted,
                                      dropout_scale=drop_scale)

    x_star, report = minimize(objective, params0.to_flat(), opt)
    if report.termination is Termination.LINE_SEARCH_FAILURE:
        warnings.warn(
            "line search collapsed; returning best parameters found "
            f"(cost {report.final_cost:.6g} after {report.iterations_used} iterations)",
            RuntimeWarning,
        )
    return AutoencoderParams(**unflatten(x_star, layout)), report


def evaluate_reconstruction(params, X):
    """Reconstruction cost of the trained model on X (no corruption/dropout)."""
    return reconstruction_cost(X, decode(params, encode(params, X)))


def with_objective(cfg, objective):
    """Copy of cfg switched to the other objective with its penalty zeroed."""
    if objective is Objective.SAE:
        return replace(cfg, objective=objective, nonneg_penalty=0.0)
    return replace(cfg, objective=objective, weight_decay=0.0)
