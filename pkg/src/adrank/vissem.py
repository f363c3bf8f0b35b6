"""Visual semantic embeddings: patch aggregation, linear projection heads,
triplet loss, analytic gradients and the mini-batch gradient-descent trainer.

Modes:
  plain              z = normalize(W_v v)
  fused              z = normalize(W_c [W_v v || t])
  partitioned        z_a = normalize(W_a v), z_r = normalize(W_r v)
  partitioned_fused  z_h = normalize(W_h [W_v v || t]) per head h in {a, r}
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .embeddings import EmbeddingTable, mean_embed, unit
from .errors import ConfigError, DimensionError, DivergenceError
from .textsem import attended_text_embedding

MODES = ("plain", "fused", "partitioned", "partitioned_fused")
FUSED_MODES = ("fused", "partitioned_fused")
PARTITIONED_MODES = ("partitioned", "partitioned_fused")


@dataclass
class VisualFeatures:
    """Per-image patch features, one list per channel; either may be empty."""

    object_patches: list[np.ndarray] = field(default_factory=list)
    symbol_patches: list[np.ndarray] = field(default_factory=list)
    object_dim: int | None = None
    symbol_dim: int | None = None

    def __post_init__(self):
        self.object_patches = [np.asarray(p, dtype=np.float64) for p in self.object_patches]
        self.symbol_patches = [np.asarray(p, dtype=np.float64) for p in self.symbol_patches]
        self.object_dim = _channel_dim("object", self.object_patches, self.object_dim)
        self.symbol_dim = _channel_dim("symbol", self.symbol_patches, self.symbol_dim)


def _channel_dim(name, patches, declared):
    dims = {p.shape[0] for p in patches}
    if len(dims) > 1:
        a, b = sorted(dims)[:2]
        raise DimensionError(f"{name} patches mix dims {a} and {b}")
    if dims:
        found = dims.pop()
        if declared is not None and declared != found:
            raise DimensionError(f"{name} patches have dim {found}, expected {declared}")
        return found
    return declared if declared is not None else 0


def aggregate_patches(features: VisualFeatures) -> np.ndarray:
    """Mean-pool each channel (zero block when empty) and concatenate."""
    if features.object_patches:
        obj = np.mean(np.stack(features.object_patches), axis=0)
    else:
        obj = np.zeros(features.object_dim)
    if features.symbol_patches:
        sym = np.mean(np.stack(features.symbol_patches), axis=0)
    else:
        sym = np.zeros(features.symbol_dim)
    return np.concatenate([obj, sym])


@dataclass
class TrainConfig:
    mode: str = "plain"
    # statement targets are word-embedding means, so the projection output
    # dimension must equal the word-embedding dimension; None means "infer"
    d_emb: int | None = None
    beta: float = 0.2
    lr: float = 0.01
    epochs: int = 50
    batch_size: int = 16
    seed: int = 0


@dataclass
class Dims:
    d_obj: int
    d_sym: int
    d_w: int
    d_emb: int

    @property
    def d_vis(self) -> int:
        return self.d_obj + self.d_sym


@dataclass
class ProjectionModel:
    mode: str
    dims: Dims
    beta: float
    config: TrainConfig
    W_v: np.ndarray | None = None
    W_c: np.ndarray | None = None
    W_a: np.ndarray | None = None
    W_r: np.ndarray | None = None

    def matrices(self) -> dict[str, np.ndarray]:
        """Trainable matrices in a fixed order."""
        names = {
            "plain": ("W_v",),
            "fused": ("W_v", "W_c"),
            "partitioned": ("W_a", "W_r"),
            "partitioned_fused": ("W_v", "W_a", "W_r"),
        }[self.mode]
        return {n: getattr(self, n) for n in names}


def _glorot(rng, rows, cols):
    limit = math.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def init_model(dims: Dims, config: TrainConfig) -> ProjectionModel:
    """Seeded uniform Glorot initialization; matrix creation order is fixed."""
    if config.mode not in MODES:
        raise ConfigError(f"unknown mode {config.mode!r}")
    rng = np.random.default_rng(config.seed)
    model = ProjectionModel(mode=config.mode, dims=dims, beta=config.beta, config=config)
    d_emb, d_vis = dims.d_emb, dims.d_vis
    d_fuse = d_emb + dims.d_w
    if config.mode == "plain":
        model.W_v = _glorot(rng, d_emb, d_vis)
    elif config.mode == "fused":
        model.W_v = _glorot(rng, d_emb, d_vis)
        model.W_c = _glorot(rng, d_emb, d_fuse)
    elif config.mode == "partitioned":
        model.W_a = _glorot(rng, d_emb, d_vis)
        model.W_r = _glorot(rng, d_emb, d_vis)
    else:
        model.W_v = _glorot(rng, d_emb, d_vis)
        model.W_a = _glorot(rng, d_emb, d_fuse)
        model.W_r = _glorot(rng, d_emb, d_fuse)
    return model


def _project(W, x):
    u = W @ x
    n = np.linalg.norm(u)
    return u / n if n > 0.0 else np.zeros_like(u)


def _fuse_input(model: ProjectionModel, v, t):
    if t is None:
        t = np.zeros(model.dims.d_w)
    t = np.asarray(t, dtype=np.float64)
    if t.shape[0] != model.dims.d_w:
        raise DimensionError(f"text vector dim {t.shape[0]}, expected {model.dims.d_w}")
    return np.concatenate([model.W_v @ v, t])


def embed_image(model: ProjectionModel, v: np.ndarray, t: np.ndarray | None = None):
    """Unit-norm image embedding; a (z_a, z_r) pair in partitioned modes."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != model.dims.d_vis:
        raise DimensionError(
            f"visual vector dim {v.shape[0]}, expected {model.dims.d_vis}"
        )
    if model.mode == "plain":
        return _project(model.W_v, v)
    if model.mode == "fused":
        return _project(model.W_c, _fuse_input(model, v, t))
    if model.mode == "partitioned":
        return _project(model.W_a, v), _project(model.W_r, v)
    c = _fuse_input(model, v, t)
    return _project(model.W_a, c), _project(model.W_r, c)


def triplet_loss(z, s_pos, s_negs, beta: float) -> float:
    """Mean over negatives of max(0, ||z - s_pos|| - ||z - s_neg|| + beta)."""
    if not len(s_negs):
        raise ValueError("triplet loss needs at least one negative")
    z = np.asarray(z, dtype=np.float64)
    dpos = np.linalg.norm(z - s_pos)
    total = 0.0
    for s_neg in s_negs:
        total += max(0.0, dpos - np.linalg.norm(z - np.asarray(s_neg)) + beta)
    return total / len(s_negs)


@dataclass
class TripletSample:
    """One training sample: visual vector, optional text vector, unit targets.

    pos/negs drive plain and fused modes; the _action/_reason variants drive
    the partitioned heads.
    """

    v: np.ndarray
    t: np.ndarray | None = None
    pos: np.ndarray | None = None
    negs: list[np.ndarray] = field(default_factory=list)
    pos_action: np.ndarray | None = None
    negs_action: list[np.ndarray] = field(default_factory=list)
    pos_reason: np.ndarray | None = None
    negs_reason: list[np.ndarray] = field(default_factory=list)


def _stack_targets(samples, pos_attr, negs_attr, d_emb):
    P = np.stack([getattr(s, pos_attr) for s in samples])
    neg_lists = [getattr(s, negs_attr) for s in samples]
    offsets = np.zeros(len(samples) + 1, dtype=np.int64)
    for i, negs in enumerate(neg_lists):
        if not negs:
            raise ValueError("every sample needs at least one negative")
        offsets[i + 1] = offsets[i] + len(negs)
    flat = [q for negs in neg_lists for q in negs]
    negs = np.stack(flat) if flat else np.zeros((0, d_emb))
    return P, negs, offsets


def loss_gradient(model: ProjectionModel, batch: list[TripletSample]):
    """Loss and exact analytic gradients of the batch-mean triplet loss.

    Returns (loss, grads) with grads keyed like model.matrices(). In
    partitioned modes the loss is the sum of the two head losses.
    """
    if not batch:
        raise ValueError("empty batch")
    d_emb = model.dims.d_emb
    V = np.stack([np.asarray(s.v, dtype=np.float64) for s in batch])
    if V.shape[1] != model.dims.d_vis:
        raise DimensionError(
            f"batch visual dim {V.shape[1]}, expected {model.dims.d_vis}"
        )

    if model.mode in FUSED_MODES:
        T = np.stack(
            [
                np.zeros(model.dims.d_w) if s.t is None else np.asarray(s.t, dtype=np.float64)
                for s in batch
            ]
        )
        C = np.hstack([V @ model.W_v.T, T])
    else:
        C = V

    if model.mode in PARTITIONED_MODES:
        heads = [("W_a", "pos_action", "negs_action"), ("W_r", "pos_reason", "negs_reason")]
    else:
        W_name = "W_c" if model.mode == "fused" else "W_v"
        heads = [(W_name, "pos", "negs")]

    loss = 0.0
    grads = {}
    dC_total = np.zeros_like(C)
    for W_name, pos_attr, negs_attr in heads:
        P, negs, offsets = _stack_targets(batch, pos_attr, negs_attr, d_emb)
        head_loss, dW, dC = kernels.triplet_linear_grad(
            getattr(model, W_name), C, P, negs, offsets, model.beta
        )
        loss += head_loss
        grads[W_name] = dW
        dC_total += dC

    if model.mode in FUSED_MODES:
        dP = dC_total[:, :d_emb]
        grads["W_v"] = dP.T @ V
    return loss, grads


def _positive_targets(record, table: EmbeddingTable):
    """Per positive statement: (whole, action, reason) unit mean embeddings.

    A part falls back to the whole statement when unembeddable; statements
    whose whole text is unembeddable are dropped.
    """
    targets = []
    for stmt in record.statements:
        if stmt.label != "positive":
            continue
        whole = mean_embed(table, stmt.tokens)
        whole = unit(whole) if whole is not None else None
        if whole is None:
            continue
        act = mean_embed(table, stmt.action_tokens)
        act = unit(act) if act is not None else None
        rea = mean_embed(table, stmt.reason_tokens)
        rea = unit(rea) if rea is not None else None
        act = act if act is not None else whole
        rea = rea if rea is not None else whole
        targets.append((stmt, whole, act, rea))
    return targets


def train(dataset, table: EmbeddingTable, config: TrainConfig):
    """Mini-batch gradient descent on the triplet loss; deterministic per seed.

    Returns (model, loss_trace) with one mean-batch-loss entry per epoch.
    Positives cycle across epochs; negatives are the positives of the other
    batch members.
    """
    trainable = []
    for record in dataset:
        targets = _positive_targets(record, table)
        if targets:
            trainable.append((record, targets))
    if not trainable:
        raise ConfigError("no trainable samples (no embeddable positive statements)")

    if config.d_emb is not None and config.d_emb != table.dim:
        raise ConfigError(
            f"d_emb {config.d_emb} must equal the word-embedding dimension {table.dim}"
        )
    config = replace(config, d_emb=table.dim)

    first = trainable[0][0]
    dims = Dims(
        d_obj=first.features.object_dim,
        d_sym=first.features.symbol_dim,
        d_w=table.dim,
        d_emb=config.d_emb,
    )
    model = init_model(dims, config)

    vs = [aggregate_patches(rec.features) for rec, _ in trainable]
    rng = np.random.default_rng(config.seed)
    trace: list[float] = []

    for epoch in range(config.epochs):
        order = rng.permutation(len(trainable))
        epoch_losses = []
        for start in range(0, len(order), config.batch_size):
            idx = order[start : start + config.batch_size]
            if len(idx) < 2:
                continue  # no in-batch negatives available
            samples = []
            chosen = []
            for i in idx:
                record, targets = trainable[i]
                stmt, whole, act, rea = targets[epoch % len(targets)]
                t = None
                if config.mode in FUSED_MODES:
                    t = attended_text_embedding(record.scene, stmt.tokens, table)
                chosen.append((i, t, whole, act, rea))
            for pos_i, (i, t, whole, act, rea) in enumerate(chosen):
                others = [c for j, c in enumerate(chosen) if j != pos_i]
                samples.append(
                    TripletSample(
                        v=vs[i],
                        t=t,
                        pos=whole,
                        negs=[o[2] for o in others],
                        pos_action=act,
                        negs_action=[o[3] for o in others],
                        pos_reason=rea,
                        negs_reason=[o[4] for o in others],
                    )
                )
            loss, grads = loss_gradient(model, samples)
            if not math.isfinite(loss):
                raise DivergenceError(epoch + 1)
            epoch_losses.append(loss)
            for name, g in grads.items():
                setattr(model, name, getattr(model, name) - config.lr * g)
        trace.append(float(np.mean(epoch_losses)) if epoch_losses else 0.0)

    return model, trace
