"""Diagnostics of part-based representation quality: Hoyer sparseness,
negative-weight statistics, representation-level KL sparsity, and weight
histograms.

Hoyer sparseness follows the canonical l1/l2 form from the sparse-NMF
literature: (sqrt(n) - |v|_1 / |v|_2) / (sqrt(n) - 1), which is 1 for one-hot
vectors and 0 for constant-magnitude vectors.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .autoencoder import encode, kl_sparsity, mean_hidden_activation


def hoyer_sparseness(v):
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    n = v.size
    if n < 2:
        raise ValueError("sparseness needs at least 2 components")
    l2 = float(np.linalg.norm(v))
    if l2 == 0.0:
        raise ValueError("sparseness of the zero vector is undefined")
    l1 = float(np.abs(v).sum())
    sqrt_n = np.sqrt(n)
    value = (sqrt_n - l1 / l2) / (sqrt_n - 1.0)
    # mathematical range is [0, 1]; clip the ~1e-16 rounding spill
    return float(min(1.0, max(0.0, value)))


def per_unit_sparseness(W, unit_axis=0):
    """Hoyer sparseness of each unit's weight vector.

    unit_axis=0 treats rows as units (encoder receptive fields, W1);
    unit_axis=1 treats columns as units (decoder filters, W2)."""
    W = np.asarray(W, dtype=np.float64)
    fields = W if unit_axis == 0 else W.T
    return np.array([hoyer_sparseness(row) for row in fields])


def pooled_sparseness(W):
    """Hoyer sparseness of the whole matrix flattened (non-default variant)."""
    return hoyer_sparseness(np.asarray(W).reshape(-1))


def negative_weight_fraction(W):
    W = np.asarray(W, dtype=np.float64)
    if W.size == 0:
        return 0.0
    return float(np.count_nonzero(W < 0.0) / W.size)


def representation_kl(params, X, target, clamp=False):
    """KL sparsity of the mean hidden activations under the given model.

    With clamp=True the means are clipped into (0, 1) before the logs, the
    same guard the training objective applies; otherwise saturated units
    raise, as kl_sparsity does.
    """
    phat = mean_hidden_activation(encode(params, X))
    if clamp:
        phat = np.clip(phat, 1e-12, 1.0 - 1e-12)
    return kl_sparsity(target, phat)


def weight_histogram(W, bins):
    """Uniform binning over [min, max]; the rightmost bin is inclusive."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    W = np.asarray(W, dtype=np.float64).reshape(-1)
    counts, edges = np.histogram(W, bins=bins)
    return edges, counts


@dataclass(frozen=True)
class SparsityReport:
    """Per-unit Hoyer values plus matrix-level statistics for one weight
    family (encoder receptive fields or decoder filters)."""

    per_unit_sparseness: np.ndarray
    negative_fraction: float
    kl_divergence: float
    histogram: tuple  # (bin_edges, counts)

    @property
    def mean_sparseness(self):
        return float(self.per_unit_sparseness.mean())


def sparsity_report(params, X, target, which="encoder", bins=50):
    """Build a SparsityReport for one weight family of an autoencoder."""
    if which == "encoder":
        W, axis = params.w1, 0
    elif which == "decoder":
        W, axis = params.w2, 1
    else:
        raise ValueError("which must be 'encoder' or 'decoder'")
    return SparsityReport(
        per_unit_sparseness=per_unit_sparseness(W, unit_axis=axis),
        negative_fraction=negative_weight_fraction(W),
        kl_divergence=representation_kl(params, X, target, clamp=True),
        histogram=weight_histogram(W, bins),
    )


def write_report_csv(report, path):
    """One row per unit; matrix-level stats repeat in every row for easy
    plotting joins."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["unit", "hoyer_sparseness", "negative_fraction",
                         "kl_divergence"])
        for i, s in enumerate(report.per_unit_sparseness):
            writer.writerow([i, f"{s:.17g}", f"{report.negative_fraction:.17g}",
                             f"{report.kl_divergence:.17g}"])


def write_histogram_csv(histogram, path):
    edges, counts = histogram
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_low", "bin_high", "count"])
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            writer.writerow([f"{lo:.17g}", f"{hi:.17g}", int(c)])
