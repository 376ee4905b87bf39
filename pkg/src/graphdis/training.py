"""Training loop for the graph VAE.

Loss per sample: masked Bernoulli reconstruction (summed over real-node pairs
and all mask slots, plus squared attribute error on real nodes when attributes
are on), beta-weighted KL against the unit Gaussian prior, and a
lambda-weighted MSE between the linear readout h(z) and the min-max-normalized
generative parameters. Per-sample sums, batch means.

Checkpoints are a small binary container: magic, header length, canonical JSON
header (configs, parameter names and shapes), then the raw little-endian
float64 parameter arrays in header order. Identical config and seed give a
byte-identical file.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .autodiff import ParamStore, Tensor, adam_step
from .canonical import to_padded
from .errors import (CheckpointError, NonFiniteError, TrainingDiverged,
                     ValidationError)
from .graphs import Dataset
from .model import (GraphVae, ModelConfig, build_gcn_inputs, kl_terms,
                    stack_samples, triu_pairs)

PROB_EPS = 1e-7
CHECKPOINT_MAGIC = b"GDISCKPT"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    beta: float = 5.0
    lambda_param: float = 1.0
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 0
    n_max: int = 24
    model: ModelConfig = field(default_factory=ModelConfig)

    def validate(self) -> None:
        if self.beta < 0.0:
            raise ValidationError(f"beta must be >= 0, got {self.beta}")
        if self.lambda_param < 0.0:
            raise ValidationError(f"lambda_param must be >= 0, got {self.lambda_param}")
        if self.epochs < 0:
            raise ValidationError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0.0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.n_max < 2:
            raise ValidationError(f"n_max must be >= 2, got {self.n_max}")

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "lambda_param": self.lambda_param,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "n_max": self.n_max,
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(beta=float(d["beta"]), lambda_param=float(d["lambda_param"]),
                   epochs=int(d["epochs"]), batch_size=int(d["batch_size"]),
                   learning_rate=float(d["learning_rate"]), seed=int(d["seed"]),
                   n_max=int(d["n_max"]), model=ModelConfig.from_dict(d["model"]))


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    recon: float
    kl: float
    kl_dims: tuple
    param_loss: float
    total: float


class TrainHistory:
    """Per-epoch loss components with CSV round-trip."""

    def __init__(self, records=None):
        self.records: list[EpochStats] = list(records) if records else []

    def append(self, stats: EpochStats) -> None:
        self.records.append(stats)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i) -> EpochStats:
        return self.records[i]

    @property
    def last(self) -> EpochStats:
        if not self.records:
            raise ValidationError("history is empty")
        return self.records[-1]

    def save_csv(self, path) -> None:
        if not self.records:
            raise ValidationError("refusing to write an empty history")
        j = len(self.records[0].kl_dims)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "recon", "kl"]
                            + [f"kl_dim_{d}" for d in range(j)]
                            + ["param_loss", "total"])
            for r in self.records:
                writer.writerow([r.epoch, repr(r.recon), repr(r.kl)]
                                + [repr(v) for v in r.kl_dims]
                                + [repr(r.param_loss), repr(r.total)])

    @classmethod
    def load_csv(cls, path) -> "TrainHistory":
        hist = cls()
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[:3] != ["epoch", "recon", "kl"]:
                raise ValidationError(f"unrecognized history header in {path}")
            j = sum(1 for c in header if c.startswith("kl_dim_"))
            for row in reader:
                hist.append(EpochStats(
                    epoch=int(row[0]), recon=float(row[1]), kl=float(row[2]),
                    kl_dims=tuple(float(v) for v in row[3:3 + j]),
                    param_loss=float(row[3 + j]), total=float(row[4 + j])))
        return hist


@dataclass
class StackedData:
    """Dataset tensors precomputed once before the epoch loop."""

    a_hat: np.ndarray
    feats: np.ndarray
    mask: np.ndarray
    triu: np.ndarray
    pair_weight: np.ndarray
    attrs: np.ndarray
    v_norm: np.ndarray
    bounds: np.ndarray
    factor_names: tuple

    @property
    def count(self) -> int:
        return self.a_hat.shape[0]


def normalize_factors(v: np.ndarray) -> tuple:
    """Min-max normalize each factor column; constant columns map to 0.5."""
    v = np.asarray(v, dtype=np.float64)
    lo = v.min(axis=0)
    hi = v.max(axis=0)
    span = hi - lo
    out = np.empty_like(v)
    for k in range(v.shape[1]):
        if span[k] == 0.0:
            out[:, k] = 0.5
        else:
            out[:, k] = (v[:, k] - lo[k]) / span[k]
    return out, np.stack([lo, hi], axis=1)


def stack_dataset(dataset: Dataset, model_cfg: ModelConfig) -> StackedData:
    if model_cfg.use_attributes and any(g.attributes is None for g in dataset.graphs()):
        raise ValidationError("use_attributes=True but some graphs have no attributes")
    samples = [to_padded(g, model_cfg.n_max) for g in dataset.graphs()]
    adj, mask, attrs = stack_samples(samples)
    a_hat, feats = build_gcn_inputs(
        adj, mask, attrs if model_cfg.use_attributes else None)
    iu, ju = triu_pairs(model_cfg.n_max)
    triu = adj[:, iu, ju]
    pair_weight = mask[:, iu] * mask[:, ju]
    v = dataset.factor_matrix()
    v_norm, bounds = normalize_factors(v)
    return StackedData(a_hat=a_hat, feats=feats, mask=mask, triu=triu,
                       pair_weight=pair_weight, attrs=attrs, v_norm=v_norm,
                       bounds=bounds, factor_names=dataset.factor_names())


def _bernoulli_ll(p: Tensor, y: np.ndarray, w: np.ndarray) -> Tensor:
    """Per-sample weighted Bernoulli log-likelihood, shape (B,)."""
    p = ad.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    ll = ad.mul(ad.log(p), y) + ad.mul(ad.log(1.0 - p), 1.0 - y)
    return ad.reduce_sum(ad.mul(ll, w), axis=1)


def batch_loss(model: GraphVae, data: StackedData, idx: np.ndarray,
               eps: np.ndarray, beta: float, lambda_param: float) -> tuple:
    """Tape up the loss for one minibatch; returns (total tensor, float parts)."""
    mask = data.mask[idx]
    mu, log_var = model.encode_tensors(data.a_hat[idx], data.feats[idx], mask)
    z = mu + ad.mul(ad.exp(ad.mul(log_var, 0.5)), eps)
    p_triu, p_mask, p_attr = model.decode_tensors(z)

    ll = _bernoulli_ll(p_triu, data.triu[idx], data.pair_weight[idx])
    ll = ll + _bernoulli_ll(p_mask, mask, np.ones_like(mask))
    recon_per = -ll
    if model.config.use_attributes:
        d = p_attr - Tensor(data.attrs[idx])
        recon_per = recon_per + ad.reduce_sum(ad.mul(ad.square(d), mask), axis=1)
    recon = ad.reduce_mean(recon_per)

    kl_dim = ad.reduce_mean(
        ad.mul(ad.square(mu) + ad.exp(log_var) - (1.0 + log_var), 0.5), axis=0)
    kl = ad.reduce_sum(kl_dim)

    total = recon + ad.mul(kl, beta)
    if lambda_param > 0.0 and model.config.param_dim > 0:
        v_hat = model.param_decode_tensors(z)
        param = ad.reduce_mean(ad.reduce_mean(ad.square(v_hat - Tensor(data.v_norm[idx])), axis=1))
        total = total + ad.mul(param, lambda_param)
        param_val = float(param.data)
    else:
        param_val = 0.0

    parts = {"recon": float(recon.data), "kl_dims": kl_dim.data.copy(),
             "param_loss": param_val}
    return total, parts


def train(dataset: Dataset, cfg: TrainConfig, progress=None) -> tuple:
    """Fit a GraphVae to the dataset; returns (model, history).

    The parameter head is sized to the dataset's factor count, and n_max is
    taken from the training config. `progress(epoch_stats, model)` is called
    after each epoch when given, so callers can monitor or snapshot mid-run.
    """
    cfg.validate()
    if len(dataset.records) < 1:
        raise ValidationError("cannot train on an empty dataset")
    k_dim = len(dataset.factor_names())
    model_cfg = replace(cfg.model, n_max=cfg.n_max, param_dim=k_dim)
    model_cfg.validate()
    data = stack_dataset(dataset, model_cfg)

    seeds = np.random.SeedSequence(cfg.seed).spawn(3)
    init_seed = int(seeds[0].generate_state(1)[0])
    shuffle_rng = np.random.default_rng(seeds[1])
    eps_rng = np.random.default_rng(seeds[2])

    model = GraphVae.initialize(model_cfg, seed=init_seed)
    model.meta = {"factor_names": list(data.factor_names),
                  "factor_bounds": [[float(lo), float(hi)] for lo, hi in data.bounds]}

    n = data.count
    j = model_cfg.j_latent
    history = TrainHistory()
    for epoch in range(cfg.epochs):
        perm = shuffle_rng.permutation(n)
        acc = {"recon": 0.0, "param_loss": 0.0}
        acc_kl = np.zeros(j)
        for batch_no, start in enumerate(range(0, n, cfg.batch_size)):
            idx = perm[start:start + cfg.batch_size]
            eps = eps_rng.standard_normal((idx.size, j))
            try:
                total, parts = batch_loss(model, data, idx, eps,
                                          cfg.beta, cfg.lambda_param)
            except NonFiniteError as err:
                raise TrainingDiverged(epoch, batch_no, str(err)) from err
            if not np.isfinite(total.data):
                raise TrainingDiverged(epoch, batch_no, "non-finite total loss")
            model.params.zero_grads()
            total.backward()
            adam_step(model.params, lr=cfg.learning_rate)
            w = idx.size / n
            acc["recon"] += w * parts["recon"]
            acc["param_loss"] += w * parts["param_loss"]
            acc_kl += w * parts["kl_dims"]
        kl_total = float(np.sum(acc_kl))
        stats = EpochStats(
            epoch=epoch, recon=acc["recon"], kl=kl_total,
            kl_dims=tuple(float(v) for v in acc_kl),
            param_loss=acc["param_loss"],
            total=acc["recon"] + cfg.beta * kl_total + cfg.lambda_param * acc["param_loss"])
        history.append(stats)
        if progress is not None:
            progress(stats, model)
    return model, history


def eval_kl_per_dim(model: GraphVae, dataset: Dataset, chunk: int = 256) -> np.ndarray:
    """Mean per-dimension KL of the posterior over a dataset, shape (J,)."""
    samples = [to_padded(g, model.config.n_max) for g in dataset.graphs()]
    out = np.zeros(model.config.j_latent)
    total = 0
    for start in range(0, len(samples), chunk):
        part = samples[start:start + chunk]
        mu, log_var = model.encode_batch(part)
        out += kl_terms(mu, log_var).sum(axis=0)
        total += len(part)
    return out / total


# -- checkpoints ----------------------------------------------------------------


def save_checkpoint(model: GraphVae, cfg: TrainConfig, path) -> None:
    names = model.params.names()
    header = {
        "format_version": CHECKPOINT_VERSION,
        "train_config": cfg.to_dict(),
        "meta": model.meta,
        "params": [{"name": n, "shape": list(model.params[n].shape)} for n in names],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for n in names:
            arr = np.ascontiguousarray(model.params[n].data, dtype="<f8")
            fh.write(arr.tobytes())


def load_checkpoint(path) -> tuple:
    """Read a checkpoint back; returns (model, train_config)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(CHECKPOINT_MAGIC) + 4 or not raw.startswith(CHECKPOINT_MAGIC):
        raise CheckpointError(f"{path}: not a checkpoint file")
    off = len(CHECKPOINT_MAGIC)
    (hlen,) = struct.unpack_from("<I", raw, off)
    off += 4
    if off + hlen > len(raw):
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(raw[off:off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise CheckpointError(f"{path}: unreadable header: {err}") from err
    off += hlen
    if header.get("format_version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format version {header.get('format_version')}")
    try:
        cfg = TrainConfig.from_dict(header["train_config"])
        entries = header["params"]
    except (KeyError, TypeError, ValueError) as err:
        raise CheckpointError(f"{path}: malformed header: {err}") from err

    params = ParamStore()
    for entry in entries:
        shape = tuple(int(s) for s in entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if off + nbytes > len(raw):
            raise CheckpointError(f"{path}: truncated data for {entry['name']}")
        arr = np.frombuffer(raw[off:off + nbytes], dtype="<f8").reshape(shape)
        params.add(entry["name"], arr.astype(np.float64))
        off += nbytes
    if off != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - off} trailing bytes")
    model = GraphVae(cfg.model, params, meta=header.get("meta") or {})
    return model, cfg
