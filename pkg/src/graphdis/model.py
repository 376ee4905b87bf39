"""Graph VAE: GCN encoder, dense adjacency/mask/attribute decoder, linear
parameter readout.

The encoder propagates node features through symmetric-normalized adjacency
layers, masks away padding slots, flattens the node embeddings in canonical
slot order and maps them to a diagonal Gaussian over the latent space. The
decoder maps a latent vector to sigmoid probabilities for the upper-triangle
adjacency, the node mask and per-node attributes. A separate affine head
predicts the (normalized) generative parameters from z.

All forward passes run on the autodiff tape; numpy-facing wrappers just pull
out `.data`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import ParamStore, Tensor
from .canonical import DEFAULT_N_MAX, EncodedSample
from .errors import ShapeError, ValidationError


@dataclass(frozen=True)
class ModelConfig:
    j_latent: int = 4
    n_max: int = DEFAULT_N_MAX
    gcn_layers: tuple = (16, 16)
    encoder_dense_layers: tuple = (64,)
    decoder_dense_layers: tuple = (64, 256)
    param_dim: int = 2
    use_attributes: bool = False

    def validate(self) -> None:
        if self.j_latent < 1:
            raise ValidationError(f"j_latent must be >= 1, got {self.j_latent}")
        if self.n_max < 2:
            raise ValidationError(f"n_max must be >= 2, got {self.n_max}")
        if self.param_dim < 0:
            raise ValidationError(f"param_dim must be >= 0, got {self.param_dim}")
        if len(self.gcn_layers) < 1:
            raise ValidationError("at least one GCN layer is required")
        for w in (*self.gcn_layers, *self.encoder_dense_layers, *self.decoder_dense_layers):
            if int(w) < 1:
                raise ValidationError(f"layer widths must be positive, got {w}")

    def to_dict(self) -> dict:
        return {
            "j_latent": self.j_latent,
            "n_max": self.n_max,
            "gcn_layers": list(self.gcn_layers),
            "encoder_dense_layers": list(self.encoder_dense_layers),
            "decoder_dense_layers": list(self.decoder_dense_layers),
            "param_dim": self.param_dim,
            "use_attributes": self.use_attributes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(j_latent=int(d["j_latent"]), n_max=int(d["n_max"]),
                   gcn_layers=tuple(int(w) for w in d["gcn_layers"]),
                   encoder_dense_layers=tuple(int(w) for w in d["encoder_dense_layers"]),
                   decoder_dense_layers=tuple(int(w) for w in d["decoder_dense_layers"]),
                   param_dim=int(d["param_dim"]),
                   use_attributes=bool(d["use_attributes"]))


N_NODE_FEATURES = 3  # normalized degree, attribute, real-node flag


def triu_pairs(n_max: int):
    """Row/column indices of the strict upper triangle, the decoder's edge order."""
    return np.triu_indices(n_max, k=1)


def triu_to_sym(vec: np.ndarray, n_max: int) -> np.ndarray:
    """Expand upper-triangle values into a symmetric zero-diagonal matrix."""
    iu, ju = triu_pairs(n_max)
    if vec.shape[-1] != iu.size:
        raise ShapeError(f"expected {iu.size} upper-triangle entries, got {vec.shape[-1]}")
    out = np.zeros(vec.shape[:-1] + (n_max, n_max), dtype=np.float64)
    out[..., iu, ju] = vec
    out[..., ju, iu] = vec
    return out


def stack_samples(samples) -> tuple:
    """Stack EncodedSamples into (adj, mask, attrs) batch arrays."""
    if not samples:
        raise ValidationError("cannot stack an empty sample list")
    n_max = samples[0].n_max
    adj = np.stack([s.adj for s in samples]).astype(np.float64)
    mask = np.stack([s.mask for s in samples]).astype(np.float64)
    attrs = np.stack([np.zeros(n_max) if s.attrs is None else s.attrs
                      for s in samples]).astype(np.float64)
    return adj, mask, attrs


def build_gcn_inputs(adj: np.ndarray, mask: np.ndarray, attrs=None) -> tuple:
    """Propagation matrix and node features for a padded batch.

    A_hat = D^{-1/2} (A + I) D^{-1/2} with self-loops on every slot so padded
    degrees stay >= 1; padded rows are isolated from real rows, so they carry
    no signal once the post-GCN mask is applied. Features per node:
    [degree / (n_real - 1), attribute, mask flag].
    """
    adj = np.asarray(adj, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if adj.ndim != 3 or mask.ndim != 2 or adj.shape[:2] != mask.shape:
        raise ShapeError(f"bad batch shapes adj={adj.shape} mask={mask.shape}")
    b, n, _ = adj.shape
    a_tilde = adj + np.eye(n)[None, :, :]
    d_inv_sqrt = 1.0 / np.sqrt(a_tilde.sum(axis=-1))
    a_hat = a_tilde * d_inv_sqrt[:, :, None] * d_inv_sqrt[:, None, :]

    deg = adj.sum(axis=-1)
    denom = np.maximum(mask.sum(axis=-1, keepdims=True) - 1.0, 1.0)
    feat_deg = deg / denom
    feat_attr = np.zeros_like(mask) if attrs is None else np.asarray(attrs, dtype=np.float64)
    feats = np.stack([feat_deg, feat_attr, mask], axis=-1)
    return a_hat, feats


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def kl_terms(mu: np.ndarray, log_var: np.ndarray) -> np.ndarray:
    """Per-dimension KL(q || N(0, 1)) = 0.5 (mu^2 + e^lv - 1 - lv), elementwise."""
    mu = np.asarray(mu, dtype=np.float64)
    log_var = np.asarray(log_var, dtype=np.float64)
    return 0.5 * (mu ** 2 + np.exp(log_var) - 1.0 - log_var)


def reparameterize(mu: np.ndarray, log_var: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    eps = rng.standard_normal(np.asarray(mu).shape)
    return np.asarray(mu) + np.exp(0.5 * np.asarray(log_var)) * eps


class GraphVae:
    """Encoder/decoder pair over padded canonical graph encodings."""

    def __init__(self, config: ModelConfig, params: ParamStore, meta: dict | None = None):
        config.validate()
        self.config = config
        self.params = params
        self.meta = dict(meta) if meta else {}
        self._iu, self._ju = triu_pairs(config.n_max)

    # -- construction --------------------------------------------------------

    @classmethod
    def initialize(cls, config: ModelConfig, seed: int = 0) -> "GraphVae":
        config.validate()
        rng = np.random.default_rng(seed)
        params = ParamStore()
        n, j = config.n_max, config.j_latent

        width = N_NODE_FEATURES
        for i, out_w in enumerate(config.gcn_layers):
            params.add(f"enc_gcn{i}_W", _glorot(rng, width, out_w))
            params.add(f"enc_gcn{i}_b", np.zeros(out_w))
            width = out_w
        flat = n * width
        for i, out_w in enumerate(config.encoder_dense_layers):
            params.add(f"enc_dense{i}_W", _glorot(rng, flat, out_w))
            params.add(f"enc_dense{i}_b", np.zeros(out_w))
            flat = out_w
        params.add("enc_mu_W", _glorot(rng, flat, j))
        params.add("enc_mu_b", np.zeros(j))
        params.add("enc_logvar_W", _glorot(rng, flat, j))
        params.add("enc_logvar_b", np.zeros(j))

        width = j
        for i, out_w in enumerate(config.decoder_dense_layers):
            params.add(f"dec_dense{i}_W", _glorot(rng, width, out_w))
            params.add(f"dec_dense{i}_b", np.zeros(out_w))
            width = out_w
        out_dim = n * (n - 1) // 2 + 2 * n
        params.add("dec_out_W", _glorot(rng, width, out_dim))
        params.add("dec_out_b", np.zeros(out_dim))

        if config.param_dim > 0:
            params.add("h_W", _glorot(rng, j, config.param_dim))
            params.add("h_b", np.zeros(config.param_dim))
        return cls(config, params)

    # -- tape-mode forward ---------------------------------------------------

    def encode_tensors(self, a_hat: np.ndarray, feats: np.ndarray,
                       mask: np.ndarray) -> tuple:
        """Posterior (mu, log_var) tensors for a prepared batch."""
        p = self.params
        b = a_hat.shape[0]
        h = Tensor(feats)
        a_hat_t = Tensor(a_hat)
        for i in range(len(self.config.gcn_layers)):
            h = ad.tanh(ad.matmul(ad.matmul(a_hat_t, h), p[f"enc_gcn{i}_W"]) + p[f"enc_gcn{i}_b"])
        h = h * Tensor(mask[:, :, None])
        flat = h.reshape((b, self.config.n_max * self.config.gcn_layers[-1]))
        for i in range(len(self.config.encoder_dense_layers)):
            flat = ad.tanh(ad.matmul(flat, p[f"enc_dense{i}_W"]) + p[f"enc_dense{i}_b"])
        mu = ad.matmul(flat, p["enc_mu_W"]) + p["enc_mu_b"]
        log_var = ad.matmul(flat, p["enc_logvar_W"]) + p["enc_logvar_b"]
        return mu, log_var

    def decode_tensors(self, z: Tensor) -> tuple:
        """Sigmoid probability tensors (triu_adj, mask, attrs) from latent z (B, J)."""
        if z.ndim != 2 or z.shape[1] != self.config.j_latent:
            raise ShapeError(f"latent batch must be (B, {self.config.j_latent}), got {z.shape}")
        p = self.params
        n = self.config.n_max
        n_pairs = n * (n - 1) // 2
        h = z
        for i in range(len(self.config.decoder_dense_layers)):
            h = ad.tanh(ad.matmul(h, p[f"dec_dense{i}_W"]) + p[f"dec_dense{i}_b"])
        out = ad.matmul(h, p["dec_out_W"]) + p["dec_out_b"]
        p_triu = ad.sigmoid(out[:, :n_pairs])
        p_mask = ad.sigmoid(out[:, n_pairs:n_pairs + n])
        p_attr = ad.sigmoid(out[:, n_pairs + n:])
        return p_triu, p_mask, p_attr

    def param_decode_tensors(self, z: Tensor) -> Tensor:
        if self.config.param_dim < 1:
            raise ValidationError("model has no parameter head (param_dim=0)")
        return ad.matmul(z, self.params["h_W"]) + self.params["h_b"]

    # -- numpy-facing wrappers -------------------------------------------------

    def encode_batch(self, samples) -> tuple:
        """Posterior means and log-variances, (B, J) each, for EncodedSamples."""
        adj, mask, attrs = stack_samples(samples)
        a_hat, feats = build_gcn_inputs(
            adj, mask, attrs if self.config.use_attributes else None)
        mu, log_var = self.encode_tensors(a_hat, feats, mask)
        return mu.data, log_var.data

    def encode(self, sample: EncodedSample) -> tuple:
        """Posterior (mu, log_var) vectors, (J,) each, for one sample."""
        mu, log_var = self.encode_batch([sample])
        return mu[0], log_var[0]

    def decode_batch(self, z: np.ndarray) -> tuple:
        z = np.asarray(z, dtype=np.float64)
        p_triu, p_mask, p_attr = self.decode_tensors(Tensor(z))
        return p_triu.data, p_mask.data, p_attr.data

    def decode(self, z: np.ndarray) -> EncodedSample:
        """Probability-valued EncodedSample for one latent vector (J,)."""
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.config.j_latent,):
            raise ShapeError(f"latent vector must be ({self.config.j_latent},), got {z.shape}")
        p_triu, p_mask, p_attr = self.decode_batch(z[None, :])
        adj = triu_to_sym(p_triu[0], self.config.n_max)
        return EncodedSample(adj=adj, mask=p_mask[0], attrs=p_attr[0],
                             n_max=self.config.n_max)

    def param_decode(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        single = z.ndim == 1
        out = self.param_decode_tensors(Tensor(z[None, :] if single else z)).data
        return out[0] if single else out
