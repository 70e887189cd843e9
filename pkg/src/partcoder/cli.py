"""Command-line entry points and the config-driven experiment runner.

Config files are INI-style key/value sections (see configs/ for examples).
Exit codes: 0 success, 1 config error, 2 data error, 3 optimization failure.
Every artifact is reproducible bit-for-bit from (config, seed): manifests
carry no timestamps and CSV floats are printed with a fixed format.
"""

import argparse
import configparser
import csv
import hashlib
import json
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import __version__, kernels, metrics, render, serialize, textdata
from .autoencoder import (
    Dataset,
    Objective,
    TrainConfig,
    evaluate_reconstruction,
    train_autoencoder,
)
from .deepnet import (
    FineTuneConfig,
    accuracy,
    fine_tune,
    greedy_pretrain,
    predict,
    train_softmax_head,
)
from .errors import ConfigError, DataError, OptimizationError
from .imagedata import load_csv_matrix, load_idx_dataset, split
from .nmf import nmf_factorize, nmf_reconstruction_error
from .optimizer import OptimizerConfig

METRICS_SCHEMA_VERSION = 1
METRICS_COLUMNS = [
    "schema_version", "run_id", "objective", "model_kind",
    "recon_train", "recon_test", "kl_train",
    "hoyer_mean_encoder", "hoyer_mean_decoder",
    "neg_frac_encoder", "neg_frac_decoder", "neg_frac_total",
    "dead_units", "acc_before_finetune", "acc_after_finetune",
    "optimizer_iterations", "final_cost",
]

DEAD_UNIT_NORM = 1e-8


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def thread_count():
    """PARTCODER_THREADS is reserved for future parallelism; default 1."""
    raw = os.environ.get("PARTCODER_THREADS", "1")
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"PARTCODER_THREADS must be an integer, got {raw!r}")
    if threads < 1:
        raise ConfigError("PARTCODER_THREADS must be >= 1")
    return threads


@dataclass(frozen=True)
class DataSpec:
    kind: str                      # "idx" or "csv"
    images: str | None = None
    labels: str | None = None
    csv: str | None = None
    label_column: bool = False
    train_fraction: float | None = None
    limit: int | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    out_dir: str
    data: DataSpec
    layer_sizes: tuple
    objectives: tuple              # one or two of Objective, run per entry
    sparsity_weight: float
    sparsity_target: float
    weight_decay: float
    nonneg_penalty: float
    input_corruption: float
    hidden_dropout: float
    optimizer: OptimizerConfig
    finetune: FineTuneConfig | None
    tile_h: int | None = None
    tile_w: int | None = None
    config_text: str = ""

    def train_config(self, objective):
        if objective is Objective.SAE:
            lam, alpha = self.weight_decay, 0.0
        else:
            lam, alpha = 0.0, self.nonneg_penalty
        return TrainConfig(
            objective=objective,
            hidden_size=self.layer_sizes[0],
            sparsity_weight=self.sparsity_weight,
            sparsity_target=self.sparsity_target,
            weight_decay=lam,
            nonneg_penalty=alpha,
            input_corruption_rate=self.input_corruption,
            hidden_dropout_rate=self.hidden_dropout,
            rng_seed=self.seed,
        )


def _parse_objectives(text):
    out = []
    for token in text.split(","):
        token = token.strip().lower()
        if not token:
            continue
        try:
            out.append(Objective(token))
        except ValueError:
            raise ConfigError(f"unknown objective {token!r} (use sae or ncae)")
    if not out:
        raise ConfigError("no objective given")
    return tuple(out)


def load_experiment_config(path, overrides=None):
    """Parse and validate an experiment INI file, applying CLI overrides."""
    overrides = overrides or {}
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    with open(path) as fh:
        config_text = fh.read()

    def get(section, key, fallback=None):
        return parser.get(section, key, fallback=fallback)

    def pick(override_key, section, key, fallback=None):
        # explicit CLI values win even when falsy (e.g. --beta 0)
        if overrides.get(override_key) is not None:
            return overrides[override_key]
        return get(section, key, fallback)

    seed = int(pick("seed", "experiment", "seed", "0"))
    out_dir = pick("out", "experiment", "out", "")
    if not out_dir:
        raise ConfigError("output directory missing ([experiment] out or --out)")

    kind = get("data", "kind", "")
    if kind not in ("idx", "csv"):
        raise ConfigError(f"[data] kind must be idx or csv, got {kind!r}")
    data = DataSpec(
        kind=kind,
        images=get("data", "images"),
        labels=get("data", "labels"),
        csv=get("data", "csv"),
        label_column=parser.getboolean("data", "label_column", fallback=False),
        train_fraction=(
            float(get("data", "train_fraction"))
            if get("data", "train_fraction") else None
        ),
        limit=int(get("data", "limit")) if get("data", "limit") else None,
    )
    for p in (data.images, data.labels, data.csv):
        if p and not os.path.exists(p):
            raise ConfigError(f"referenced data path does not exist: {p}")
    if data.kind == "idx" and not data.images:
        raise ConfigError("[data] kind=idx requires images=")
    if data.kind == "csv" and not data.csv:
        raise ConfigError("[data] kind=csv requires csv=")

    layers_text = pick("hidden", "model", "hidden", "")
    if not layers_text:
        raise ConfigError("[model] hidden is required (e.g. 196 or 64,32)")
    try:
        layer_sizes = tuple(int(t) for t in str(layers_text).split(","))
    except ValueError:
        raise ConfigError(f"bad [model] hidden value {layers_text!r}")
    if any(s < 1 for s in layer_sizes):
        raise ConfigError("hidden layer sizes must be positive")

    objectives = _parse_objectives(
        str(pick("objective", "model", "objective", "ncae")))

    corruption = float(get("model", "input_corruption", "0"))
    dropout = float(get("model", "hidden_dropout", "0"))
    beta_raw = pick("beta", "model", "beta")
    if beta_raw is None:
        # corruption variants default to no KL term unless beta is explicit
        beta = 0.0 if (corruption > 0 or dropout > 0) else 3.0
    else:
        beta = float(beta_raw)

    opt = OptimizerConfig(
        memory=int(get("optimizer", "memory", "20")),
        max_iterations=int(pick("max_iter", "optimizer",
                                "max_iterations", "400")),
        tolerance=float(get("optimizer", "tolerance", "1e-9")),
    )

    finetune = None
    if parser.has_section("finetune"):
        finetune = FineTuneConfig(
            alpha=float(pick("alpha", "finetune", "alpha", "0.003")),
            optimizer=replace(
                opt,
                max_iterations=int(pick("max_iter", "finetune",
                                        "max_iterations",
                                        str(opt.max_iterations))),
            ),
        )

    tile_h = get("render", "tile_h")
    tile_w = get("render", "tile_w")

    return ExperimentConfig(
        seed=seed,
        out_dir=out_dir,
        data=data,
        layer_sizes=layer_sizes,
        objectives=objectives,
        sparsity_weight=beta,
        sparsity_target=float(pick("rho", "model", "rho", "0.05")),
        weight_decay=float(pick("lambda", "model", "lambda", "0.003")),
        nonneg_penalty=float(pick("alpha", "model", "alpha", "0.003")),
        input_corruption=corruption,
        hidden_dropout=dropout,
        optimizer=opt,
        finetune=finetune,
        tile_h=int(tile_h) if tile_h else None,
        tile_w=int(tile_w) if tile_w else None,
        config_text=config_text,
    )


def load_dataset_spec(spec, seed):
    """Load per DataSpec; returns (train, test_or_None)."""
    if spec.kind == "idx":
        data = load_idx_dataset(spec.images, spec.labels)
    else:
        data = load_csv_matrix(spec.csv, has_label_column=spec.label_column)
    if spec.limit is not None and spec.limit < data.n_samples:
        keep = np.random.default_rng(seed).permutation(data.n_samples)[:spec.limit]
        labels = data.labels[keep] if data.labels is not None else None
        data = Dataset(X=data.X[keep], labels=labels)
    if spec.train_fraction is not None:
        return split(data, spec.train_fraction, seed)
    return data, None


def _dead_unit_count(w1):
    return int(np.sum(np.abs(w1).max(axis=1) < DEAD_UNIT_NORM))


def _infer_tiles(dim, tile_h, tile_w):
    if tile_h and tile_w:
        if tile_h * tile_w != dim:
            raise ConfigError(f"tile {tile_h}x{tile_w} does not cover {dim} inputs")
        return tile_h, tile_w
    side = int(np.sqrt(dim))
    if side * side == dim:
        return side, side
    return None


def _render_matrix(W, tiles, path):
    grid = render.square_grid(W.shape[0], tiles[0], tiles[1])
    render.write_pgm(render.render_receptive_fields(W, grid), path)


class StageFailure(Exception):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


def _stage(stage_name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ConfigError, DataError, OptimizationError, OSError) as exc:
        raise StageFailure(stage_name, exc)


def run_experiment(cfg):
    """Execute the configured pipeline and write all artifacts.

    Stages: dataset -> per objective (train | pretrain -> softmax ->
    fine-tune) -> evaluate -> report. Returns the list of metric-row dicts.
    """
    os.makedirs(cfg.out_dir, exist_ok=True)
    train, test = _stage("dataset", load_dataset_spec, cfg.data, cfg.seed)

    rows = []
    for objective in cfg.objectives:
        tcfg = cfg.train_config(objective)
        run_id = f"{objective.value}-" + "-".join(
            str(s) for s in (train.n_features, *cfg.layer_sizes))
        row = {c: None for c in METRICS_COLUMNS}
        row.update({
            "schema_version": METRICS_SCHEMA_VERSION,
            "run_id": run_id,
            "objective": objective.value,
        })

        deep = len(cfg.layer_sizes) > 1 or cfg.finetune is not None
        if not deep:
            params, report = _stage("train", train_autoencoder,
                                    train, tcfg, cfg.optimizer)
            row["model_kind"] = "ae"
            row["optimizer_iterations"] = report.iterations_used
            row["final_cost"] = report.final_cost
            row["recon_train"] = evaluate_reconstruction(params, train.X)
            if test is not None:
                row["recon_test"] = evaluate_reconstruction(params, test.X)
            row["kl_train"] = metrics.representation_kl(
                params, train.X, tcfg.sparsity_target, clamp=True)
            enc = metrics.per_unit_sparseness(params.w1, unit_axis=0)
            dec = metrics.per_unit_sparseness(params.w2, unit_axis=1)
            row["hoyer_mean_encoder"] = float(enc.mean())
            row["hoyer_mean_decoder"] = float(dec.mean())
            row["neg_frac_encoder"] = metrics.negative_weight_fraction(params.w1)
            row["neg_frac_decoder"] = metrics.negative_weight_fraction(params.w2)
            row["neg_frac_total"] = metrics.negative_weight_fraction(
                np.concatenate([params.w1.ravel(), params.w2.ravel()]))
            row["dead_units"] = _dead_unit_count(params.w1)

            model_path = os.path.join(cfg.out_dir, f"model_{objective.value}.pcae")
            serialize.save_autoencoder(params, model_path)
            for which, W, axis in (("encoder", params.w1, 0),
                                   ("decoder", params.w2, 1)):
                rep = metrics.sparsity_report(params, train.X,
                                              tcfg.sparsity_target, which=which)
                metrics.write_report_csv(rep, os.path.join(
                    cfg.out_dir, f"sparsity_{which}_{objective.value}.csv"))
            tiles = _infer_tiles(train.n_features, cfg.tile_h, cfg.tile_w)
            if tiles:
                _stage("render", _render_matrix, params.w1, tiles,
                       os.path.join(cfg.out_dir,
                                    f"fields_{objective.value}.pgm"))
        else:
            if train.labels is None:
                raise StageFailure("dataset",
                                   DataError("deep pipeline requires labels"))
            net, reports = _stage("pretrain", greedy_pretrain,
                                  train, list(cfg.layer_sizes), tcfg,
                                  cfg.optimizer)
            head_alpha = (cfg.nonneg_penalty
                          if objective is Objective.NCAE else 0.0)
            net, _ = _stage("softmax", train_softmax_head,
                            net, train, head_alpha, cfg.optimizer)
            eval_data = test if test is not None else train
            acc_before = accuracy(predict(net, eval_data.X), eval_data.labels)
            row["acc_before_finetune"] = acc_before
            if cfg.finetune is not None:
                ft = replace(cfg.finetune, alpha=head_alpha)
                net, ft_report = _stage("fine-tune", fine_tune, net, train, ft)
                row["acc_after_finetune"] = accuracy(
                    predict(net, eval_data.X), eval_data.labels)
                row["optimizer_iterations"] = ft_report.iterations_used
                row["final_cost"] = ft_report.final_cost
            row["model_kind"] = "deep"
            w1 = net.encoders[0].w
            enc = metrics.per_unit_sparseness(w1, unit_axis=0)
            row["hoyer_mean_encoder"] = float(enc.mean())
            row["neg_frac_encoder"] = metrics.negative_weight_fraction(w1)
            all_w = np.concatenate([l.w.ravel() for l in net.encoders]
                                   + [net.softmax_w.ravel()])
            row["neg_frac_total"] = metrics.negative_weight_fraction(all_w)
            row["dead_units"] = _dead_unit_count(w1)

            model_path = os.path.join(cfg.out_dir, f"model_{objective.value}.pcdn")
            serialize.save_deepnet(net, model_path)
            tiles = _infer_tiles(train.n_features, cfg.tile_h, cfg.tile_w)
            if tiles:
                _stage("render", _render_matrix, w1, tiles,
                       os.path.join(cfg.out_dir,
                                    f"fields_{objective.value}_layer1.pgm"))
            for i in range(1, len(net.encoders)):
                deeper = _infer_tiles(net.encoders[i].w.shape[1], None, None)
                if deeper:
                    _stage("render", _render_matrix, net.encoders[i].w, deeper,
                           os.path.join(
                               cfg.out_dir,
                               f"fields_{objective.value}_layer{i + 1}.pgm"))
        rows.append(row)

    _stage("report", write_metrics_csv, rows,
           os.path.join(cfg.out_dir, "metrics.csv"))
    _stage("report", write_manifest, cfg,
           os.path.join(cfg.out_dir, "manifest.json"))
    return rows


def write_metrics_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in METRICS_COLUMNS])


def write_manifest(cfg, path):
    manifest = {
        "seed": cfg.seed,
        "config_sha256": hashlib.sha256(cfg.config_text.encode()).hexdigest(),
        "partcoder_version": __version__,
        "numpy_version": np.__version__,
        "python_version": sys.version.split()[0],
        "kernel_backend": kernels.BACKEND,
        "threads": thread_count(),
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------- CLI verbs


def _add_data_args(p, labeled_default=False):
    p.add_argument("--images", help="IDX image file")
    p.add_argument("--labels", help="IDX label file")
    p.add_argument("--csv", help="numeric CSV file")
    p.add_argument("--labeled", action="store_true", default=labeled_default,
                   help="CSV last column holds integer labels")
    p.add_argument("--train-fraction", type=float, default=None)
    p.add_argument("--limit", type=int, default=None)


def _data_spec_from_args(args):
    if args.csv:
        kind = "csv"
    elif args.images:
        kind = "idx"
    else:
        raise ConfigError("give either --csv or --images")
    for p in (args.images, args.labels, args.csv):
        if p and not os.path.exists(p):
            raise DataError(f"data path does not exist: {p}")
    return DataSpec(kind=kind, images=args.images, labels=args.labels,
                    csv=args.csv, label_column=args.labeled,
                    train_fraction=args.train_fraction, limit=args.limit)


def _add_hyper_args(p):
    p.add_argument("--objective", choices=["sae", "ncae"], default="ncae")
    p.add_argument("--beta", type=float, default=None,
                   help="sparsity penalty weight (default 3, or 0 with corruption)")
    p.add_argument("--rho", type=float, default=0.05,
                   help="target mean hidden activation")
    p.add_argument("--lambda", dest="lambda_", type=float, default=0.003,
                   help="weight decay (SAE)")
    p.add_argument("--alpha", type=float, default=0.003,
                   help="nonnegativity penalty (NCAE / softmax / fine-tune)")
    p.add_argument("--input-corruption", type=float, default=0.0)
    p.add_argument("--hidden-dropout", type=float, default=0.0)
    p.add_argument("--max-iter", type=int, default=400)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)


def _train_config_from_args(args, hidden):
    objective = Objective(args.objective)
    corrupted = args.input_corruption > 0 or args.hidden_dropout > 0
    beta = args.beta if args.beta is not None else (0.0 if corrupted else 3.0)
    return TrainConfig(
        objective=objective,
        hidden_size=hidden,
        sparsity_weight=beta,
        sparsity_target=args.rho,
        weight_decay=args.lambda_ if objective is Objective.SAE else 0.0,
        nonneg_penalty=args.alpha if objective is Objective.NCAE else 0.0,
        input_corruption_rate=args.input_corruption,
        hidden_dropout_rate=args.hidden_dropout,
        rng_seed=args.seed,
    )


def _optimizer_from_args(args):
    return OptimizerConfig(max_iterations=args.max_iter,
                           tolerance=args.tolerance)


def _experiment_from_args(args, layer_sizes, finetune=None):
    return ExperimentConfig(
        seed=args.seed,
        out_dir=args.out,
        data=_data_spec_from_args(args),
        layer_sizes=tuple(layer_sizes),
        objectives=_parse_objectives(args.objective),
        sparsity_weight=(args.beta if args.beta is not None
                         else (0.0 if (args.input_corruption > 0
                                       or args.hidden_dropout > 0) else 3.0)),
        sparsity_target=args.rho,
        weight_decay=args.lambda_,
        nonneg_penalty=args.alpha,
        input_corruption=args.input_corruption,
        hidden_dropout=args.hidden_dropout,
        optimizer=_optimizer_from_args(args),
        finetune=finetune,
        tile_h=getattr(args, "tile_h", None),
        tile_w=getattr(args, "tile_w", None),
        config_text=f"cli:{sorted(vars(args).items())!r}",
    )


def _cmd_run(args):
    overrides = {k: getattr(args, a) for k, a in [
        ("seed", "seed"), ("out", "out"), ("max_iter", "max_iter"),
        ("alpha", "alpha"), ("beta", "beta"), ("lambda", "lambda_"),
        ("rho", "rho"), ("objective", "objective"),
    ] if getattr(args, a) is not None}
    cfg = load_experiment_config(args.config, overrides)
    rows = run_experiment(cfg)
    for row in rows:
        print(f"{row['run_id']}: done (see {cfg.out_dir})")
    return 0


def _cmd_train_ae(args):
    cfg = _experiment_from_args(args, [args.hidden])
    rows = run_experiment(cfg)
    for row in rows:
        print(f"{row['run_id']}: recon_train={_fmt(row['recon_train'])} "
              f"kl={_fmt(row['kl_train'])}")
    return 0


def _cmd_pretrain_deep(args):
    layers = [int(t) for t in args.layers.split(",")]
    spec = _data_spec_from_args(args)
    train, _ = _stage("dataset", load_dataset_spec, spec, args.seed)
    tcfg = _train_config_from_args(args, layers[0])
    net, reports = _stage("pretrain", greedy_pretrain, train, layers, tcfg,
                          _optimizer_from_args(args))
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    serialize.save_deepnet(net, args.out)
    print(f"pretrained {'-'.join(str(s) for s in net.layer_sizes)} -> {args.out}")
    return 0


def _cmd_fine_tune(args):
    net = _stage("model", serialize.load_deepnet, args.model)
    spec = _data_spec_from_args(args)
    train, test = _stage("dataset", load_dataset_spec, spec, args.seed)
    if train.labels is None:
        raise DataError("fine-tune requires labels")
    opt = _optimizer_from_args(args)
    if net.softmax_w is None:
        net, _ = _stage("softmax", train_softmax_head, net, train,
                        args.alpha, opt)
    eval_data = test if test is not None else train
    before = accuracy(predict(net, eval_data.X), eval_data.labels)
    net, _ = _stage("fine-tune", fine_tune, net, train,
                    FineTuneConfig(alpha=args.alpha, optimizer=opt))
    after = accuracy(predict(net, eval_data.X), eval_data.labels)
    serialize.save_deepnet(net, args.out)
    print(f"accuracy before fine-tune: {before:.4f}, after: {after:.4f}")
    return 0


def _cmd_eval(args):
    spec = _data_spec_from_args(args)
    data, _ = _stage("dataset", load_dataset_spec, spec, args.seed)
    if args.model.endswith(".pcdn"):
        net = _stage("model", serialize.load_deepnet, args.model)
        if data.labels is None:
            raise DataError("deep model evaluation requires labels")
        acc = accuracy(predict(net, data.X), data.labels)
        print(f"accuracy: {acc:.6f}")
    else:
        params = _stage("model", serialize.load_autoencoder, args.model)
        err = evaluate_reconstruction(params, data.X)
        kl = metrics.representation_kl(params, data.X, args.rho, clamp=True)
        print(f"reconstruction_error: {_fmt(err)}")
        print(f"kl_sparsity: {_fmt(kl)}")
    return 0


def _cmd_nmf(args):
    spec = _data_spec_from_args(args)
    data, _ = _stage("dataset", load_dataset_spec, spec, args.seed)
    V = data.X.T  # samples as columns
    model, trace = _stage("train", nmf_factorize, V, args.rank,
                          args.iterations, args.seed)
    err = nmf_reconstruction_error(model, V)
    os.makedirs(args.out, exist_ok=True)
    serialize.save_nmf(model, os.path.join(args.out, "model.pcnm"))
    tiles = _infer_tiles(V.shape[0], args.tile_h, args.tile_w)
    if tiles:
        _render_matrix(model.W.T, tiles, os.path.join(args.out, "nmf_basis.pgm"))
    with open(os.path.join(args.out, "nmf_metrics.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "iterations", "reconstruction_error",
                         "final_objective"])
        writer.writerow([args.rank, args.iterations, _fmt(err),
                         _fmt(trace[-1])])
    print(f"nmf rank {args.rank}: reconstruction_error={_fmt(err)}")
    return 0


def _cmd_render_fields(args):
    if args.model.endswith(".pcdn"):
        net = _stage("model", serialize.load_deepnet, args.model)
        if not (1 <= args.layer <= len(net.encoders)):
            raise ConfigError(f"model has {len(net.encoders)} layers")
        W = net.encoders[args.layer - 1].w
    else:
        params = _stage("model", serialize.load_autoencoder, args.model)
        W = params.w1 if args.layer == 1 else params.w2.T
    tiles = _infer_tiles(W.shape[1], args.tile_h, args.tile_w)
    if tiles is None:
        raise ConfigError(
            f"field length {W.shape[1]} is not square; give --tile-h/--tile-w")
    scaling = (render.Scaling.MIN_MAX if args.scaling == "minmax"
               else render.Scaling.SYMMETRIC_UNIT)
    grid = render.square_grid(W.shape[0], tiles[0], tiles[1], scaling=scaling)
    render.write_pgm(render.render_receptive_fields(W, grid), args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_text_prep(args):
    corpus = _stage("dataset", textdata.parse_corpus_file, args.corpus)
    corpus = textdata.frequency_filter(corpus, low=args.min_df, high=args.max_df)
    if not corpus.vocab:
        raise DataError("no terms survive the document-frequency filter")
    dims = min(args.dims, len(corpus.vocab))
    selection = textdata.information_gain_select(corpus, dims)
    corpus = textdata.apply_selection(corpus, selection)
    X = textdata.tfidf(corpus)

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "tfidf.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        for row, label in zip(X, corpus.labels):
            writer.writerow([f"{v:.17g}" for v in row] + [int(label)])
    with open(os.path.join(args.out, "vocab.json"), "w") as fh:
        json.dump({"vocab": list(corpus.vocab),
                   "information_gain": list(selection.scores)}, fh, indent=2)
        fh.write("\n")
    print(f"text-prep: {X.shape[0]} docs x {X.shape[1]} terms -> {args.out}")
    return 0


def _cmd_report(args):
    spec = _data_spec_from_args(args)
    data, _ = _stage("dataset", load_dataset_spec, spec, args.seed)
    params = _stage("model", serialize.load_autoencoder, args.model)
    os.makedirs(args.out, exist_ok=True)
    for which in ("encoder", "decoder"):
        rep = metrics.sparsity_report(params, data.X, args.rho, which=which)
        metrics.write_report_csv(
            rep, os.path.join(args.out, f"sparsity_{which}.csv"))
        metrics.write_histogram_csv(
            rep.histogram, os.path.join(args.out, f"histogram_{which}.csv"))
    if args.vocab:
        with open(args.vocab) as fh:
            vocab = json.load(fh)["vocab"]
        reports = textdata.top_k_words(params.w1, vocab, k=args.top_k)
        with open(os.path.join(args.out, "top_words.json"), "w") as fh:
            json.dump([[{"word": w, "weight": wt} for w, wt in unit]
                       for unit in reports], fh, indent=2)
            fh.write("\n")
        with open(os.path.join(args.out, "top_words.txt"), "w") as fh:
            for i, unit in enumerate(reports):
                words = " ".join(w for w, _ in unit)
                fh.write(f"unit {i}: {words}\n")
    print(f"report written to {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="partcoder",
        description="Nonnegativity-constrained sparse autoencoders and "
                    "part-based representation benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a full experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--lambda", dest="lambda_", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--objective", default=None)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("train-ae", help="train a single autoencoder")
    _add_data_args(p)
    _add_hyper_args(p)
    p.add_argument("--hidden", type=int, required=True)
    p.add_argument("--tile-h", type=int, default=None)
    p.add_argument("--tile-w", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_train_ae)

    p = sub.add_parser("pretrain-deep",
                       help="greedy layer-wise pretraining, encoders only")
    _add_data_args(p)
    _add_hyper_args(p)
    p.add_argument("--layers", required=True, help="comma list, e.g. 64,32")
    p.add_argument("--out", required=True, help="output .pcdn model path")
    p.set_defaults(fn=_cmd_pretrain_deep)

    p = sub.add_parser("fine-tune",
                       help="train the softmax head (if absent) and fine-tune")
    _add_data_args(p)
    _add_hyper_args(p)
    p.add_argument("--model", required=True, help="input .pcdn model")
    p.add_argument("--out", required=True, help="output .pcdn model path")
    p.set_defaults(fn=_cmd_fine_tune)

    p = sub.add_parser("eval", help="evaluate a saved model on a dataset")
    _add_data_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("nmf", help="nonnegative matrix factorization baseline")
    _add_data_args(p)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tile-h", type=int, default=None)
    p.add_argument("--tile-w", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_nmf)

    p = sub.add_parser("render-fields",
                       help="render model weights as a PGM tile image")
    p.add_argument("--model", required=True)
    p.add_argument("--layer", type=int, default=1,
                   help="1-based layer (2 = decoder for .pcae models)")
    p.add_argument("--tile-h", type=int, default=None)
    p.add_argument("--tile-w", type=int, default=None)
    p.add_argument("--scaling", choices=["symmetric", "minmax"],
                   default="symmetric")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_render_fields)

    p = sub.add_parser("text-prep",
                       help="bag-of-words corpus -> filtered TF-IDF CSV")
    p.add_argument("--corpus", required=True,
                   help="label<TAB>term:count ... file")
    p.add_argument("--min-df", type=int, default=4)
    p.add_argument("--max-df", type=int, default=70)
    p.add_argument("--dims", type=int, default=200,
                   help="vocabulary size kept by information gain")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_text_prep)

    p = sub.add_parser("report",
                       help="sparsity/histogram/top-word reports for a model")
    _add_data_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vocab", default=None, help="vocab.json from text-prep")
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        thread_count()  # validate the reserved env var early
        return args.fn(args)
    except StageFailure as exc:
        print(f"error in stage {exc.stage}: {exc.cause}", file=sys.stderr)
        if isinstance(exc.cause, ConfigError):
            return 1
        if isinstance(exc.cause, OptimizationError):
            return 3
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OptimizationError as exc:
        print(f"optimization failure: {exc}", file=sys.stderr)
        return 3
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
