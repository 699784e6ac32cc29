"""Desk-scale siamese embedding network.

Fully-connected layers (ReLU hidden, sigmoid-squashed output) trained with a
double-margin contrastive pair loss plus a triangular activation regularizer
that pushes last-layer activations toward the saturated ends of the sigmoid,
making the embeddings binarization-friendly. Everything is seeded and runs in
double precision, so training is bit-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embedding import Embedding, euclidean_dist2
from .errors import FormatError

__all__ = [
    "HyperParams",
    "DenseLayer",
    "Model",
    "PairBatch",
    "SyntheticDataset",
    "init_model",
    "forward",
    "contrastive_loss",
    "triangular_reg",
    "batch_objective",
    "gradients",
    "train",
    "gen_synthetic_dataset",
    "sample_pairs",
    "split_dataset",
    "save_model",
    "load_model",
]

# keeps sigmoid outputs strictly inside (0,1) in float64 even when saturated
_SIG_EPS = 1e-15


def _sigmoid(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return np.clip(out, _SIG_EPS, 1.0 - _SIG_EPS)


@dataclass(frozen=True)
class HyperParams:
    """Training knobs. ``lam`` balances the activation regularizer."""

    m1: float = 0.25
    m2: float = 1.5
    lam: float = 0.1
    learning_rate: float = 0.05
    epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.m1 < 0:
            raise ValueError(f"m1 must be nonnegative, got {self.m1}")
        if self.m2 <= 0:
            raise ValueError(f"m2 must be positive, got {self.m2}")
        if not self.m1 < self.m2:
            raise ValueError(f"margins must satisfy m1 < m2, got m1={self.m1}, m2={self.m2}")
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass
class DenseLayer:
    weights: np.ndarray  # (fan_in, fan_out)
    bias: np.ndarray  # (fan_out,)


@dataclass
class Model:
    input_dim: int
    hidden_dims: tuple[int, ...]
    embed_dim: int
    seed: int
    layers: list[DenseLayer] = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return (
            (self.input_dim, self.hidden_dims, self.embed_dim, self.seed)
            == (other.input_dim, other.hidden_dims, other.embed_dim, other.seed)
            and len(self.layers) == len(other.layers)
            and all(
                np.array_equal(a.weights, b.weights) and np.array_equal(a.bias, b.bias)
                for a, b in zip(self.layers, other.layers)
            )
        )


@dataclass
class PairBatch:
    """Struct-of-arrays pair batch: label 1 = genuine pair, 0 = impostor."""

    input_a: np.ndarray  # (n, dim)
    input_b: np.ndarray  # (n, dim)
    labels: np.ndarray  # (n,) in {0, 1}

    def __post_init__(self):
        self.input_a = np.asarray(self.input_a, dtype=np.float64)
        self.input_b = np.asarray(self.input_b, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.input_a.shape != self.input_b.shape or self.input_a.ndim != 2:
            raise ValueError("input_a and input_b must be (n, dim) arrays of equal shape")
        if self.labels.shape != (self.input_a.shape[0],):
            raise ValueError("labels must be one per pair")
        if not np.all((self.labels == 0.0) | (self.labels == 1.0)):
            raise ValueError("labels must be 0 or 1")

    def __len__(self) -> int:
        return self.input_a.shape[0]


@dataclass
class SyntheticDataset:
    """Gaussian blobs around per-class centers; stands in for image pairs."""

    vectors: np.ndarray  # (n, dim)
    class_ids: np.ndarray  # (n,)
    classes: int
    dim: int

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        self.class_ids = np.asarray(self.class_ids, dtype=np.int64)
        if self.vectors.ndim != 2 or self.vectors.shape[1] != self.dim:
            raise ValueError("vectors must be an (n, dim) array")
        if self.class_ids.shape != (self.vectors.shape[0],):
            raise ValueError("class_ids must be one per sample")
        if self.vectors.shape[0] and (
            self.class_ids.min() < 0 or self.class_ids.max() >= self.classes
        ):
            raise ValueError(f"class ids must lie in [0, {self.classes})")
        counts = np.bincount(self.class_ids, minlength=self.classes)
        if np.any(counts < 2):
            raise ValueError("every class needs at least 2 samples so genuine pairs exist")

    def __len__(self) -> int:
        return self.vectors.shape[0]


def init_model(
    seed: int, input_dim: int, hidden_dims: list[int], embed_dim: int = 256
) -> Model:
    """Seeded scaled-uniform init: W ~ U[-s, s] with s = sqrt(6/(fan_in+fan_out))."""
    dims = [input_dim, *hidden_dims, embed_dim]
    if any(int(d) < 1 for d in dims):
        raise ValueError(f"all layer dimensions must be >= 1, got {dims}")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        s = np.sqrt(6.0 / (fan_in + fan_out))
        layers.append(
            DenseLayer(
                weights=rng.uniform(-s, s, size=(fan_in, fan_out)),
                bias=np.zeros(fan_out, dtype=np.float64),
            )
        )
    return Model(
        input_dim=int(input_dim),
        hidden_dims=tuple(int(d) for d in hidden_dims),
        embed_dim=int(embed_dim),
        seed=int(seed),
        layers=layers,
    )


def _forward_batch(model: Model, x: np.ndarray):
    """Returns (activations per layer input, hidden scores, preacts, embeddings)."""
    acts = [x]
    scores = []
    h = x
    for layer in model.layers[:-1]:
        s = h @ layer.weights + layer.bias
        scores.append(s)
        h = np.maximum(s, 0.0)
        acts.append(h)
    last = model.layers[-1]
    preact = h @ last.weights + last.bias
    return acts, scores, preact, _sigmoid(preact)


def forward(model: Model, input_vec) -> tuple[np.ndarray, Embedding]:
    """Single-vector forward pass: (last-layer preactivation, embedding)."""
    x = np.asarray(input_vec, dtype=np.float64)
    if x.shape != (model.input_dim,):
        raise ValueError(f"input must have length {model.input_dim}, got shape {x.shape}")
    _, _, preact, z = _forward_batch(model, x[None, :])
    return preact[0], Embedding(z[0])


def contrastive_loss(z_a: Embedding, z_b: Embedding, y: int, m1: float, m2: float) -> float:
    """Double-margin pair loss on squared L2 embedding distance.

    Genuine pairs (y=1) pay for distance beyond m1; impostor pairs (y=0) pay
    for distance short of m2.
    """
    if y not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {y}")
    if not m1 < m2:
        raise ValueError(f"margins must satisfy m1 < m2, got m1={m1}, m2={m2}")
    d2 = euclidean_dist2(z_a, z_b)
    return y * max(d2 - m1, 0.0) + (1 - y) * max(m2 - d2, 0.0)


def triangular_reg(preact, lam: float) -> float:
    """Sum of lam * (1 - |2*sigmoid(x) - 1|) over the preactivation elements.

    Peaks at x = 0 and vanishes as activations saturate, so minimizing it
    drives activations toward 0 or 1.
    """
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    z = _sigmoid(np.asarray(preact, dtype=np.float64))
    return float(lam * np.sum(1.0 - np.abs(2.0 * z - 1.0)))


def _pair_terms(model: Model, batch: PairBatch, hp: HyperParams):
    fa = _forward_batch(model, batch.input_a)
    fb = _forward_batch(model, batch.input_b)
    za, zb = fa[3], fb[3]
    d2 = np.sum((za - zb) ** 2, axis=1)
    y = batch.labels
    losses = y * np.maximum(d2 - hp.m1, 0.0) + (1.0 - y) * np.maximum(hp.m2 - d2, 0.0)
    regs = hp.lam * (
        np.sum(1.0 - np.abs(2.0 * za - 1.0), axis=1)
        + np.sum(1.0 - np.abs(2.0 * zb - 1.0), axis=1)
    )
    return fa, fb, d2, losses, regs


def batch_objective(model: Model, batch: PairBatch, hp: HyperParams) -> float:
    """Mean over pairs of contrastive loss plus both branches' regularizers."""
    if len(batch) == 0:
        raise ValueError("batch must contain at least one pair")
    _, _, _, losses, regs = _pair_terms(model, batch, hp)
    return float(np.mean(losses + regs))


def _backprop(model: Model, acts, scores, delta_preact):
    grads = [None] * len(model.layers)
    g = delta_preact
    last = len(model.layers) - 1
    grads[last] = (acts[last].T @ g, g.sum(axis=0))
    for i in range(last - 1, -1, -1):
        g = g @ model.layers[i + 1].weights.T
        g = g * (scores[i] > 0.0)  # ReLU subgradient, 0 at the kink
        grads[i] = (acts[i].T @ g, g.sum(axis=0))
    return grads


def gradients(model: Model, batch: PairBatch, hp: HyperParams) -> list[tuple[np.ndarray, np.ndarray]]:
    """Analytic gradients of batch_objective w.r.t. every weight and bias.

    Hinge and |.| kinks use subgradient 0. Returns one (dW, db) pair per layer,
    branch contributions summed (the siamese branches share weights).
    """
    n = len(batch)
    if n == 0:
        raise ValueError("batch must contain at least one pair")
    fa, fb, d2, _, _ = _pair_terms(model, batch, hp)
    acts_a, scores_a, _, za = fa
    acts_b, scores_b, _, zb = fb
    y = batch.labels
    # d(loss)/d(d2): genuine hinge active beyond m1, impostor hinge inside m2
    dldd2 = y * (d2 > hp.m1) - (1.0 - y) * (d2 < hp.m2)
    diff = za - zb
    sp_a = za * (1.0 - za)
    sp_b = zb * (1.0 - zb)
    reg_a = -hp.lam * 2.0 * sp_a * np.sign(2.0 * za - 1.0)
    reg_b = -hp.lam * 2.0 * sp_b * np.sign(2.0 * zb - 1.0)
    delta_a = (dldd2[:, None] * 2.0 * diff * sp_a + reg_a) / n
    delta_b = (dldd2[:, None] * -2.0 * diff * sp_b + reg_b) / n
    ga = _backprop(model, acts_a, scores_a, delta_a)
    gb = _backprop(model, acts_b, scores_b, delta_b)
    return [(wa + wb, ba + bb) for (wa, ba), (wb, bb) in zip(ga, gb)]


def _copy_model(model: Model) -> Model:
    return Model(
        input_dim=model.input_dim,
        hidden_dims=model.hidden_dims,
        embed_dim=model.embed_dim,
        seed=model.seed,
        layers=[DenseLayer(l.weights.copy(), l.bias.copy()) for l in model.layers],
    )


def train(
    model: Model,
    data: SyntheticDataset,
    hp: HyperParams,
    *,
    pairs_per_epoch: int = 128,
    genuine_fraction: float = 0.5,
) -> tuple[Model, list[float]]:
    """Plain full-batch gradient descent on freshly sampled pairs each epoch.

    Pair sampling is driven entirely by hp.seed, so identical arguments give a
    bit-identical trained model. History holds the objective of each epoch's
    batch at the weights it was sampled under (one entry per epoch).
    """
    trained = _copy_model(model)
    history: list[float] = []
    if hp.epochs == 0:
        return trained, history
    epoch_seeds = np.random.SeedSequence(hp.seed).generate_state(hp.epochs, dtype=np.uint64)
    for e in range(hp.epochs):
        batch = sample_pairs(data, int(epoch_seeds[e]), pairs_per_epoch, genuine_fraction)
        history.append(batch_objective(trained, batch, hp))
        for layer, (dw, db) in zip(trained.layers, gradients(trained, batch, hp)):
            layer.weights -= hp.learning_rate * dw
            layer.bias -= hp.learning_rate * db
    return trained, history


def gen_synthetic_dataset(
    seed: int, classes: int, per_class: int, dim: int, noise_sigma: float
) -> SyntheticDataset:
    """Class centers uniform in [-1,1]^dim; samples are center + N(0, sigma^2)."""
    if classes < 1:
        raise ValueError(f"classes must be >= 1, got {classes}")
    if per_class < 2:
        raise ValueError(f"per_class must be >= 2, got {per_class}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if noise_sigma <= 0:
        raise ValueError(f"noise_sigma must be positive, got {noise_sigma}")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-1.0, 1.0, size=(classes, dim))
    vectors = np.repeat(centers, per_class, axis=0) + rng.normal(
        0.0, noise_sigma, size=(classes * per_class, dim)
    )
    class_ids = np.repeat(np.arange(classes), per_class)
    return SyntheticDataset(vectors=vectors, class_ids=class_ids, classes=classes, dim=dim)


def sample_pairs(
    data: SyntheticDataset, seed: int, n_pairs: int, genuine_fraction: float
) -> PairBatch:
    """Exactly round(n_pairs * genuine_fraction) genuine pairs, the rest impostors."""
    if n_pairs < 1:
        raise ValueError(f"n_pairs must be >= 1, got {n_pairs}")
    if not 0.0 <= genuine_fraction <= 1.0:
        raise ValueError(f"genuine_fraction must lie in [0,1], got {genuine_fraction}")
    n_genuine = round(n_pairs * genuine_fraction)
    n_impostor = n_pairs - n_genuine
    if n_impostor > 0 and data.classes < 2:
        raise ValueError("impostor pairs need at least 2 classes")
    rng = np.random.default_rng(seed)
    by_class = [np.flatnonzero(data.class_ids == c) for c in range(data.classes)]
    idx_a = np.empty(n_pairs, dtype=np.int64)
    idx_b = np.empty(n_pairs, dtype=np.int64)
    labels = np.zeros(n_pairs)
    labels[:n_genuine] = 1.0
    for i in range(n_genuine):
        members = by_class[rng.integers(data.classes)]
        idx_a[i], idx_b[i] = rng.choice(members, size=2, replace=False)
    for i in range(n_genuine, n_pairs):
        ca, cb = rng.choice(data.classes, size=2, replace=False)
        idx_a[i] = rng.choice(by_class[ca])
        idx_b[i] = rng.choice(by_class[cb])
    return PairBatch(
        input_a=data.vectors[idx_a], input_b=data.vectors[idx_b], labels=labels
    )


def split_dataset(
    data: SyntheticDataset, holdout_per_class: int
) -> tuple[SyntheticDataset, SyntheticDataset]:
    """Deterministic split: the last ``holdout_per_class`` samples of each class
    become the held-out set."""
    counts = np.bincount(data.class_ids, minlength=data.classes)
    if holdout_per_class < 2 or np.any(counts - holdout_per_class < 2):
        raise ValueError("both splits need at least 2 samples per class")
    train_idx, held_idx = [], []
    for c in range(data.classes):
        members = np.flatnonzero(data.class_ids == c)
        train_idx.extend(members[:-holdout_per_class])
        held_idx.extend(members[-holdout_per_class:])
    def subset(idx):
        idx = np.array(idx)
        return SyntheticDataset(
            vectors=data.vectors[idx],
            class_ids=data.class_ids[idx],
            classes=data.classes,
            dim=data.dim,
        )
    return subset(train_idx), subset(held_idx)


def save_model(model: Model, path) -> None:
    doc = {
        "input_dim": model.input_dim,
        "hidden_dims": list(model.hidden_dims),
        "embed_dim": model.embed_dim,
        "seed": model.seed,
        "layers": [
            {"weights": layer.weights.tolist(), "bias": layer.bias.tolist()}
            for layer in model.layers
        ],
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def load_model(path) -> Model:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"document: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise FormatError("document: expected a JSON object")
    for field_name in ("input_dim", "embed_dim", "seed"):
        if not isinstance(doc.get(field_name), int):
            raise FormatError(f"{field_name}: expected an integer, found {doc.get(field_name)!r}")
    hidden = doc.get("hidden_dims")
    if not isinstance(hidden, list) or not all(isinstance(d, int) for d in hidden):
        raise FormatError("hidden_dims: expected a list of integers")
    raw_layers = doc.get("layers")
    if not isinstance(raw_layers, list):
        raise FormatError("layers: expected a list")
    dims = [doc["input_dim"], *hidden, doc["embed_dim"]]
    if len(raw_layers) != len(dims) - 1:
        raise FormatError(f"layers: expected {len(dims) - 1} layers, found {len(raw_layers)}")
    layers = []
    for i, raw in enumerate(raw_layers):
        if not isinstance(raw, dict):
            raise FormatError(f"layers[{i}]: expected an object")
        weights = np.asarray(raw.get("weights"), dtype=np.float64)
        bias = np.asarray(raw.get("bias"), dtype=np.float64)
        if weights.shape != (dims[i], dims[i + 1]):
            raise FormatError(
                f"layers[{i}].weights: expected shape {(dims[i], dims[i + 1])}, found {weights.shape}"
            )
        if bias.shape != (dims[i + 1],):
            raise FormatError(
                f"layers[{i}].bias: expected length {dims[i + 1]}, found {bias.shape}"
            )
        layers.append(DenseLayer(weights=weights, bias=bias))
    return Model(
        input_dim=doc["input_dim"],
        hidden_dims=tuple(hidden),
        embed_dim=doc["embed_dim"],
        seed=doc["seed"],
        layers=layers,
    )
