"""Nonnegativity-constrained sparse autoencoders, deep stacks, and
part-based representation diagnostics."""

from .autoencoder import (
    AutoencoderParams,
    Dataset,
    Objective,
    TrainConfig,
    decode,
    encode,
    kl_sparsity,
    mean_hidden_activation,
    numerical_gradient,
    objective_and_gradient,
    reconstruction_cost,
    train_autoencoder,
)
from .coremath import ParamLayout, flatten, sigmoid, unflatten
from .deepnet import (
    DeepNetwork,
    FineTuneConfig,
    accuracy,
    fine_tune,
    greedy_pretrain,
    predict,
    train_softmax_head,
)
from .metrics import hoyer_sparseness, negative_weight_fraction, representation_kl
from .nmf import NmfModel, nmf_encode, nmf_factorize, nmf_reconstruction_error
from .optimizer import Mode, OptimizerConfig, OptimizerReport, Termination, minimize

__version__ = "0.1.0"

__all__ = [
    "AutoencoderParams", "Dataset", "Objective", "TrainConfig",
    "decode", "encode", "kl_sparsity", "mean_hidden_activation",
    "numerical_gradient", "objective_and_gradient", "reconstruction_cost",
    "train_autoencoder",
    "ParamLayout", "flatten", "sigmoid", "unflatten",
    "DeepNetwork", "FineTuneConfig", "accuracy", "fine_tune",
    "greedy_pretrain", "predict", "train_softmax_head",
    "hoyer_sparseness", "negative_weight_fraction", "representation_kl",
    "NmfModel", "nmf_encode", "nmf_factorize", "nmf_reconstruction_error",
    "Mode", "OptimizerConfig", "OptimizerReport", "Termination", "minimize",
    "__version__",
]
