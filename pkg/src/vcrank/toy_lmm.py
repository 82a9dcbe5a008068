"""A small differentiable multimodal classifier with hookable activations.

Pipeline: 224x224 image -> 16x16x3 block average (768 inputs in [0, 1]) ->
frozen random projection to 64 dims -> two trainable tanh layers -> one affine
head per target-token position over a two-symbol alphabet.

Gradients of the task score with respect to the hook-layer activations are
computed analytically through the layers above the hook only.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from vcrank.rng import PCG32, derive_seed
from vcrank.synthgen.datasets import NEGATIVE, POSITIVE, LabeledDataset
from vcrank.synthgen.images import Image

GRID = 16
BLOCK = 14
IN_DIM = GRID * GRID * 3
WIDTH = 64
N_SYMBOLS = 2

CHECKPOINT_MAGIC = b"VCRTOYM1"
CHECKPOINT_VERSION = 1


def downsample(img: Image) -> np.ndarray:
    """14x14 block average to 16x16x3, scaled to [0, 1], flattened row-major."""
    # exact integer block sums: rows within a block first, then columns
    rows = img.pixels.reshape(GRID, BLOCK, -1).sum(axis=1, dtype=np.int64)
    sums = rows.reshape(GRID, GRID, BLOCK, 3).sum(axis=2)
    return sums.ravel() / float(BLOCK * BLOCK * 255)


def downsample_batch(images) -> np.ndarray:
    return np.stack([downsample(img) for img in images])


def _target_sequences(length: int) -> dict[str, tuple[int, ...]]:
    if length not in (1, 2):
        raise ValueError("target sequence length must be 1 or 2")
    return {POSITIVE: (0,) * length, NEGATIVE: (1,) * length}


@dataclass
class ToyModel:
    encoder: np.ndarray  # (64, 768), frozen
    w1: np.ndarray  # (64, 64)
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    head_w: np.ndarray  # (L, 2, 64)
    head_b: np.ndarray  # (L, 2)
    hook_layer: int = 1
    seed: int = 0
    train_log: list = field(default_factory=list)

    def __post_init__(self):
        if self.hook_layer not in (1, 2):
            raise ValueError("hook_layer must be 1 or 2")
        self.encoder.setflags(write=False)

    @property
    def seq_len(self) -> int:
        return self.head_w.shape[0]

    @property
    def target_sequences(self) -> dict[str, tuple[int, ...]]:
        return _target_sequences(self.seq_len)

    @property
    def trainable(self) -> dict[str, np.ndarray]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2, "head_w": self.head_w, "head_b": self.head_b}

    @property
    def n_trainable(self) -> int:
        return sum(p.size for p in self.trainable.values())

    @property
    def n_params(self) -> int:
        return self.n_trainable + self.encoder.size

    def encoder_checksum(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.encoder, dtype="<f8").tobytes()).hexdigest()

    def checksum(self) -> str:
        h = hashlib.sha256()
        for p in (self.encoder, *self.trainable.values()):
            h.update(np.ascontiguousarray(p, dtype="<f8").tobytes())
        return h.hexdigest()

    def copy(self) -> "ToyModel":
        return copy.deepcopy(self)


# Encoder outputs differ between images by only ~0.05, so the first block
# needs a large gain for its pre-activations to spread over the tanh range.
FIRST_BLOCK_SCALE = 2.0
BLOCK_SCALE = 1.0 / math.sqrt(WIDTH)
HEAD_SCALE = 1.0 / math.sqrt(WIDTH)
# first-block bias cancels the response to a plain mid-gray background
REFERENCE_GRAY = 217.5


def init_model(seed: int, hook_layer: int = 1, seq_len: int = 1) -> ToyModel:
    """Deterministic initialisation from a single 64-bit seed."""
    s_enc = 1.0 / math.sqrt(IN_DIM)
    rng = PCG32(seed)
    encoder = rng.uniform_array(-s_enc, s_enc, WIDTH * IN_DIM).reshape(WIDTH, IN_DIM)
    w1 = rng.uniform_array(-FIRST_BLOCK_SCALE, FIRST_BLOCK_SCALE, WIDTH * WIDTH).reshape(WIDTH, WIDTH)
    w2 = rng.uniform_array(-BLOCK_SCALE, BLOCK_SCALE, WIDTH * WIDTH).reshape(WIDTH, WIDTH)
    head_w = rng.uniform_array(-HEAD_SCALE, HEAD_SCALE, seq_len * N_SYMBOLS * WIDTH).reshape(seq_len, N_SYMBOLS, WIDTH)
    gray = np.full(IN_DIM, REFERENCE_GRAY / 255.0)
    return ToyModel(
        encoder=encoder,
        w1=w1,
        b1=-(w1 @ (encoder @ gray)),
        w2=w2,
        b2=np.zeros(WIDTH),
        head_w=head_w,
        head_b=np.zeros((seq_len, N_SYMBOLS)),
        hook_layer=hook_layer,
        seed=seed,
    )


# -- forward / scores --------------------------------------------------------


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=-1, keepdims=True)
    z = logits - m
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def forward_inputs(model: ToyModel, x: np.ndarray):
    """Forward pass from the 768-dim input; returns ([h1, h2], logits (L, 2))."""
    z = model.encoder @ x
    h1 = np.tanh(model.w1 @ z + model.b1)
    h2 = np.tanh(model.w2 @ h1 + model.b2)
    logits = model.head_w @ h2 + model.head_b
    return [h1, h2], logits


def forward(model: ToyModel, img: Image):
    return forward_inputs(model, downsample(img))


def logits_from_hook(model: ToyModel, a: np.ndarray) -> np.ndarray:
    """Recompute logits from hook-layer activations only."""
    h2 = np.tanh(model.w2 @ a + model.b2) if model.hook_layer == 1 else a
    return model.head_w @ h2 + model.head_b


def _check_label(label: str) -> None:
    if label not in (POSITIVE, NEGATIVE):
        raise ValueError(f"unknown target label {label!r}")


def score_from_logits(model: ToyModel, logits: np.ndarray, label: str) -> float:
    _check_label(label)
    targets = model.target_sequences[label]
    lp = _log_softmax(logits)
    return float(np.mean([lp[t, s] for t, s in enumerate(targets)]))


@dataclass(frozen=True)
class TaskScore:
    value: float
    target_label: str


def task_score(model: ToyModel, img: Image, target_label: str) -> TaskScore:
    """Mean log-probability of the target tokens (length-normalised)."""
    _, logits = forward(model, img)
    return TaskScore(score_from_logits(model, logits, target_label), target_label)


def score_from_hook(model: ToyModel, a: np.ndarray, target_label: str) -> float:
    return score_from_logits(model, logits_from_hook(model, a), target_label)


def probability_from_logits(logits: np.ndarray) -> float:
    """P(positive) from first-position logits: exp(l_pos) / (exp(l_pos) + exp(l_neg))."""
    l_pos, l_neg = logits[0, 0], logits[0, 1]
    return float(1.0 / (1.0 + math.exp(l_neg - l_pos)))


def class_probability(model: ToyModel, img: Image) -> float:
    return probability_from_logits(forward(model, img)[1])


def class_probabilities(model: ToyModel, images, inputs: np.ndarray | None = None) -> np.ndarray:
    x = downsample_batch(images) if inputs is None else inputs
    return np.array([probability_from_logits(forward_inputs(model, row)[1]) for row in x])


# -- activations and gradients -----------------------------------------------


@dataclass
class ActivationMatrix:
    values: np.ndarray  # (N, 64)
    layer: int
    image_ids: list


def hook_activations(model: ToyModel, images) -> ActivationMatrix:
    """Hook-layer activations, one image per forward pass."""
    if not len(images):
        raise ValueError("need at least one image")
    rows = [forward(model, img)[0][model.hook_layer - 1] for img in images]
    return ActivationMatrix(np.stack(rows), model.hook_layer, [img.seed for img in images])


def grad_from_hook(model: ToyModel, a: np.ndarray, target_label: str) -> np.ndarray:
    """Analytic dS/da for hook activations ``a`` through the layers above the hook."""
    _check_label(target_label)
    targets = model.target_sequences[target_label]
    if model.hook_layer == 1:
        h2 = np.tanh(model.w2 @ a + model.b2)
    else:
        h2 = a
    logits = model.head_w @ h2 + model.head_b
    probs = np.exp(_log_softmax(logits))
    onehot = np.zeros_like(probs)
    for t, s in enumerate(targets):
        onehot[t, s] = 1.0
    dlogits = (onehot - probs) / len(targets)
    dh2 = np.einsum("ts,tsd->d", dlogits, model.head_w)
    if model.hook_layer == 2:
        return dh2
    return model.w2.T @ ((1.0 - h2 * h2) * dh2)


def grad_task_score(model: ToyModel, img: Image, target_label: str) -> np.ndarray:
    acts, _ = forward(model, img)
    return grad_from_hook(model, acts[model.hook_layer - 1], target_label)


def activations_and_gradients(model: ToyModel, images, target_label: str = POSITIVE, inputs: np.ndarray | None = None):
    """Per-image hook activations and score gradients (batch size 1).

    ``inputs`` may carry precomputed :func:`downsample_batch` rows, in which
    case ``images`` is ignored.
    """
    x = downsample_batch(images) if inputs is None else np.asarray(inputs, dtype=np.float64)
    n = x.shape[0]
    acts = np.empty((n, WIDTH))
    grads = np.empty((n, WIDTH))
    for i in range(n):
        hs, _ = forward_inputs(model, x[i])
        a = hs[model.hook_layer - 1]
        acts[i] = a
        grads[i] = grad_from_hook(model, a, target_label)
    return acts, grads


def finite_difference_gradient(model: ToyModel, img: Image, target_label: str, h: float = 1e-5) -> np.ndarray:
    """Central differences of the task score in each hook coordinate."""
    if not h > 0:
        raise ValueError("step h must be > 0")
    acts, _ = forward(model, img)
    a = acts[model.hook_layer - 1]
    g = np.empty_like(a)
    for j in range(a.size):
        e = np.zeros_like(a)
        e[j] = h
        g[j] = (score_from_hook(model, a + e, target_label) - score_from_hook(model, a - e, target_label)) / (2 * h)
    return g


# -- fine-tuning -------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 8
    epochs: int = 5
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0


def _batch_loss_and_grads(model: ToyModel, z: np.ndarray, targets: np.ndarray):
    """Mean cross-entropy over rows and token positions, with parameter grads.

    ``z`` holds encoder outputs (B, 64); ``targets`` symbol ids (B, L).
    """
    bsz = z.shape[0]
    seq = model.seq_len
    h1 = np.tanh(z @ model.w1.T + model.b1)
    h2 = np.tanh(h1 @ model.w2.T + model.b2)
    logits = np.einsum("bd,tsd->bts", h2, model.head_w) + model.head_b
    lp = _log_softmax(logits)
    rows = np.arange(bsz)[:, None]
    pos = np.arange(seq)[None, :]
    loss = -lp[rows, pos, targets].mean()

    dlogits = np.exp(lp)
    dlogits[rows, pos, targets] -= 1.0
    dlogits /= bsz * seq
    g_head_w = np.einsum("bts,bd->tsd", dlogits, h2)
    g_head_b = dlogits.sum(axis=0)
    dh2 = np.einsum("bts,tsd->bd", dlogits, model.head_w)
    da2 = dh2 * (1.0 - h2 * h2)
    g_w2 = da2.T @ h1
    g_b2 = da2.sum(axis=0)
    dh1 = da2 @ model.w2
    da1 = dh1 * (1.0 - h1 * h1)
    g_w1 = da1.T @ z
    g_b1 = da1.sum(axis=0)
    grads = {"w1": g_w1, "b1": g_b1, "w2": g_w2, "b2": g_b2, "head_w": g_head_w, "head_b": g_head_b}
    return float(loss), grads, logits


def _targets_for(model: ToyModel, labels: np.ndarray) -> np.ndarray:
    seqs = model.target_sequences
    pos = np.array(seqs[POSITIVE])
    neg = np.array(seqs[NEGATIVE])
    return np.where(labels[:, None] == 1, pos[None, :], neg[None, :])


def dataset_loss(model: ToyModel, x: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    """(mean cross-entropy, accuracy) over a whole input matrix."""
    z = x @ model.encoder.T
    loss, _, logits = _batch_loss_and_grads(model, z, _targets_for(model, labels))
    pred = logits[:, 0, 0] > logits[:, 0, 1]
    return loss, float(np.mean(pred == (labels == 1)))


def fine_tune(model: ToyModel, data: LabeledDataset, cfg: TrainConfig = TrainConfig(), inputs: np.ndarray | None = None) -> ToyModel:
    """AdamW on the two blocks and the head; the encoder is never touched.

    ``inputs`` may carry precomputed :func:`downsample_batch` rows for ``data``.
    Returns a new model whose ``train_log`` holds (epoch, mean_loss, accuracy)
    rows, epoch 0 being the state before training.
    """
    if len(data) == 0:
        raise ValueError("cannot fine-tune on an empty dataset")
    out = model.copy()
    x = downsample_batch(data.images) if inputs is None else inputs
    labels = data.labels
    z_all = x @ out.encoder.T
    targets = _targets_for(out, labels)
    params = out.trainable
    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(p) for k, p in params.items()}
    loss0, acc0 = dataset_loss(out, x, labels)
    log = [(0, loss0, acc0)]
    rng = PCG32(cfg.seed, stream=derive_seed("fine_tune") >> 1)
    step = 0
    n = len(labels)
    for epoch in range(1, cfg.epochs + 1):
        order = np.array(rng.permutation(n))
        losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads, _ = _batch_loss_and_grads(out, z_all[idx], targets[idx])
            losses.append(loss * len(idx))
            step += 1
            bc1 = 1.0 - cfg.beta1**step
            bc2 = 1.0 - cfg.beta2**step
            for k, p in params.items():
                g = grads[k]
                m[k] = cfg.beta1 * m[k] + (1 - cfg.beta1) * g
                v[k] = cfg.beta2 * v[k] + (1 - cfg.beta2) * g * g
                if cfg.weight_decay:
                    p -= cfg.learning_rate * cfg.weight_decay * p
                p -= cfg.learning_rate * (m[k] / bc1) / (np.sqrt(v[k] / bc2) + cfg.eps)
        _, acc = dataset_loss(out, x, labels)
        log.append((epoch, float(np.sum(losses) / n), acc))
    out.train_log = log
    return out


def write_train_log(model: ToyModel, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "mean_loss", "train_accuracy"])
        for epoch, loss, acc in model.train_log:
            w.writerow([epoch, repr(float(loss)), repr(float(acc))])


# -- checkpoints -------------------------------------------------------------


class CheckpointError(ValueError):
    pass


_HEADER = struct.Struct("<8sIIIIIIQ")


def save_checkpoint(model: ToyModel, path: str | os.PathLike) -> None:
    """Magic, version, dims, row-major little-endian float64 arrays, SHA-256."""
    header = _HEADER.pack(
        CHECKPOINT_MAGIC, CHECKPOINT_VERSION, IN_DIM, WIDTH, model.seq_len, N_SYMBOLS, model.hook_layer, model.seed
    )
    body = b"".join(
        np.ascontiguousarray(p, dtype="<f8").tobytes() for p in (model.encoder, *model.trainable.values())
    )
    payload = header + body
    with open(path, "wb") as fh:
        fh.write(payload + hashlib.sha256(payload).digest())


def load_checkpoint(path: str | os.PathLike) -> ToyModel:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size + 32:
        raise CheckpointError("checkpoint too short")
    payload, digest = data[:-32], data[-32:]
    magic, version, in_dim, width, seq_len, n_sym, hook, seed = _HEADER.unpack_from(payload)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"bad magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if hashlib.sha256(payload).digest() != digest:
        raise CheckpointError("checksum mismatch")
    if (in_dim, width, n_sym) != (IN_DIM, WIDTH, N_SYMBOLS):
        raise CheckpointError(f"unexpected dims {(in_dim, width, n_sym)}")
    shapes = [
        (WIDTH, IN_DIM),
        (WIDTH, WIDTH),
        (WIDTH,),
        (WIDTH, WIDTH),
        (WIDTH,),
        (seq_len, N_SYMBOLS, WIDTH),
        (seq_len, N_SYMBOLS),
    ]
    arrays = []
    off = _HEADER.size
    for shape in shapes:
        count = int(np.prod(shape))
        chunk = payload[off : off + 8 * count]
        if len(chunk) != 8 * count:
            raise CheckpointError("truncated checkpoint")
        arrays.append(np.frombuffer(chunk, dtype="<f8").reshape(shape).astype(np.float64))
        off += 8 * count
    if off != len(payload):
        raise CheckpointError("trailing bytes in checkpoint")
    enc, w1, b1, w2, b2, hw, hb = arrays
    return ToyModel(enc, w1, b1, w2, b2, hw, hb, hook_layer=hook, seed=seed)
