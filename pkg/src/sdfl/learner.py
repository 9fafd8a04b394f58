"""Softmax-regression learner: synthetic data, local SGD, evaluation, corruption.

The model is multinomial logistic regression with the bias folded in as a
constant-1 feature, so the parameter vector has (d+1)*c entries for d input
features and c classes.  Deliberately convex: convergence behaviour of the
surrounding protocol is then attributable to the protocol, not the optimizer.

Reductions over samples (loss mean, gradient mean) use exact summation
(math.fsum), which makes full-batch results independent of dataset row order
and invariant under duplicating every sample.  Aggregation layers above rely
on that bit-reproducibility.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .seeds import substream

WEIGHTS_MAGIC = b"SDFW"
WEIGHTS_VERSION = 1

SIGN_FLIP = "sign_flip"
GAUSSIAN_NOISE = "gaussian_noise"
ZERO = "zero"
CORRUPTION_MODES = (SIGN_FLIP, GAUSSIAN_NOISE, ZERO)


class LearnerError(Exception):
    pass


class InvalidShape(LearnerError):
    pass


class ShapeMismatch(LearnerError):
    pass


class DataRole(str, Enum):
    TRAIN = "train"
    VALIDATION = "validation"


@dataclass
class ModelWeights:
    """Flat float64 parameter vector for a (d features, c classes) model."""

    values: np.ndarray
    d: int
    c: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.d < 1 or self.c < 1:
            raise InvalidShape(f"d={self.d}, c={self.c}")
        if self.values.shape[0] != (self.d + 1) * self.c:
            raise InvalidShape(
                f"expected {(self.d + 1) * self.c} values for d={self.d}, "
                f"c={self.c}, got {self.values.shape[0]}"
            )
        if not np.all(np.isfinite(self.values)):
            raise InvalidShape("weights contain NaN or Inf")

    def matrix(self) -> np.ndarray:
        """View as (d+1, c); row d is the per-class bias."""
        return self.values.reshape(self.d + 1, self.c)

    def copy(self) -> "ModelWeights":
        return ModelWeights(self.values.copy(), self.d, self.c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModelWeights):
            return NotImplemented
        return (
            self.d == other.d
            and self.c == other.c
            and np.array_equal(self.values, other.values)
        )

    def to_bytes(self) -> bytes:
        """Canonical serialization; this exact stream is what gets hashed.

        Layout: magic "SDFW", version u8, d u32, c u32 (little-endian),
        then (d+1)*c IEEE-754 binary64 little-endian values.
        """
        header = struct.pack("<4sBII", WEIGHTS_MAGIC, WEIGHTS_VERSION, self.d, self.c)
        return header + self.values.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ModelWeights":
        head_len = struct.calcsize("<4sBII")
        if len(blob) < head_len:
            raise InvalidShape("blob shorter than weight header")
        magic, version, d, c = struct.unpack("<4sBII", blob[:head_len])
        if magic != WEIGHTS_MAGIC:
            raise InvalidShape(f"bad magic {magic!r}")
        if version != WEIGHTS_VERSION:
            raise InvalidShape(f"unsupported version {version}")
        body = blob[head_len:]
        expected = (d + 1) * c * 8
        if len(body) != expected:
            raise InvalidShape(f"expected {expected} payload bytes, got {len(body)}")
        values = np.frombuffer(body, dtype="<f8").astype(np.float64)
        return cls(values, d, c)


@dataclass
class Dataset:
    features: np.ndarray      # (n, d)
    labels: np.ndarray        # (n,) ints in [0, c)
    role: DataRole = DataRole.TRAIN

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise InvalidShape(f"features must be a non-empty 2-d array, got shape {self.features.shape}")
        if self.labels.shape[0] != self.features.shape[0]:
            raise InvalidShape(
                f"{self.features.shape[0]} samples but {self.labels.shape[0]} labels"
            )
        if np.any(self.labels < 0):
            raise InvalidShape("negative class label")

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class OptimizerConfig:
    """Momentum SGD settings; defaults follow the reference experiments."""

    learning_rate: float = 0.01
    momentum: float = 0.5
    dampening: float = 0.0
    weight_decay: float = 0.0
    nesterov: bool = False
    epochs: int = 1
    batch_size: int = 32

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not (0.0 <= self.momentum < 1.0):
            raise ValueError("momentum must be in [0, 1)")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def generate_data(
    num_workers: int,
    samples_per_worker: int,
    d: int,
    c: int,
    noniid_skew: float,
    seed: int,
    *,
    validation_samples: int = 240,
    center_spread: float = 2.0,
    cluster_std: float = 1.0,
) -> tuple[list[Dataset], Dataset]:
    """Per-worker Gaussian-blob training sets plus one shared validation set.

    Class f gets a blob center drawn once for everyone; worker w's label
    distribution is (1-skew)*uniform + skew*onehot(w mod c), so skew=0 is
    uniform and skew=1 collapses each worker onto a single dominant class.
    """
    if c < 2:
        raise InvalidShape("need at least 2 classes")
    if samples_per_worker < c:
        raise InvalidShape("need at least one sample per class slot")
    if num_workers < 1 or d < 1 or validation_samples < 1:
        raise InvalidShape("num_workers, d and validation_samples must be >= 1")
    if not (0.0 <= noniid_skew <= 1.0):
        raise InvalidShape("noniid_skew must be in [0, 1]")

    centers = substream(seed, "data", "centers").normal(0.0, center_spread, size=(c, d))
    datasets = []
    for w in range(num_workers):
        rng = substream(seed, "data", w)
        probs = np.full(c, (1.0 - noniid_skew) / c)
        probs[w % c] += noniid_skew
        labels = rng.choice(c, size=samples_per_worker, p=probs)
        feats = centers[labels] + rng.normal(0.0, cluster_std, size=(samples_per_worker, d))
        datasets.append(Dataset(feats, labels, DataRole.TRAIN))

    vrng = substream(seed, "data", "validation")
    vlabels = vrng.choice(c, size=validation_samples)
    vfeats = centers[vlabels] + vrng.normal(0.0, cluster_std, size=(validation_samples, d))
    return datasets, Dataset(vfeats, vlabels, DataRole.VALIDATION)


def init_model(d: int, c: int, seed: int) -> ModelWeights:
    """Seeded uniform values in [-0.05, 0.05]."""
    if d < 1 or c < 1:
        raise InvalidShape(f"d={d}, c={c}")
    values = substream(seed, "init_model").uniform(-0.05, 0.05, size=(d + 1) * c)
    return ModelWeights(values, d, c)


def _check_compat(w: ModelWeights, data: Dataset) -> None:
    if data.features.shape[1] != w.d:
        raise ShapeMismatch(f"data has {data.features.shape[1]} features, model expects {w.d}")
    if np.any(data.labels >= w.c):
        raise ShapeMismatch(f"label >= {w.c} present")
    if len(data) < 1:
        raise ShapeMismatch("empty dataset")


def _augment(features: np.ndarray) -> np.ndarray:
    return np.hstack([features, np.ones((features.shape[0], 1))])


def _fsum_rows(per_sample: np.ndarray) -> np.ndarray:
    """Exact column sums of an (n, k) array, independent of row order."""
    return np.array([math.fsum(col) for col in per_sample.T], dtype=np.float64)


def loss_and_gradient(w: ModelWeights, batch: Dataset) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient over the batch.

    Row order of the batch never affects the result: per-sample terms are
    combined with exact summation before the final division.
    """
    _check_compat(w, batch)
    xa = _augment(batch.features)
    n = xa.shape[0]
    m = w.matrix()
    # accumulate logits feature by feature: BLAS matmul picks shape-dependent
    # kernels whose summation order differs, leaking batch size into the bits
    z = np.zeros((n, w.c))
    for j in range(xa.shape[1]):
        z = z + xa[:, j:j + 1] * m[j]
    zmax = z.max(axis=1, keepdims=True)
    ez = np.exp(z - zmax)
    lse = zmax[:, 0] + np.log(ez.sum(axis=1))
    picked = z[np.arange(n), batch.labels]
    loss = math.fsum(lse - picked) / n

    probs = ez / ez.sum(axis=1, keepdims=True)
    probs[np.arange(n), batch.labels] -= 1.0
    contrib = (xa[:, :, None] * probs[:, None, :]).reshape(n, -1)
    grad = _fsum_rows(contrib) / n
    if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
        raise ShapeMismatch("non-finite loss or gradient")
    return loss, grad


def train_local(w: ModelWeights, data: Dataset, opt: OptimizerConfig, seed: int) -> ModelWeights:
    """Momentum SGD over seeded mini-batch shuffles.

    Per step: g = grad + weight_decay*w; v = momentum*v + (1-dampening)*g;
    step direction is g + momentum*v under Nesterov, else v; w -= lr*step.
    """
    _check_compat(w, data)
    rng = substream(seed, "shuffle")
    values = w.values.copy()
    velocity = np.zeros_like(values)
    n = len(data)
    bs = min(opt.batch_size, n)
    for _ in range(opt.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, bs):
            idx = perm[start:start + bs]
            batch = Dataset(data.features[idx], data.labels[idx], data.role)
            _, grad = loss_and_gradient(ModelWeights(values, w.d, w.c), batch)
            if opt.weight_decay:
                grad = grad + opt.weight_decay * values
            velocity = opt.momentum * velocity + (1.0 - opt.dampening) * grad
            step = grad + opt.momentum * velocity if opt.nesterov else velocity
            values = values - opt.learning_rate * step
    return ModelWeights(values, w.d, w.c)


def evaluate(w: ModelWeights, data: Dataset) -> float:
    """Percentage accuracy in [0, 100]; argmax ties go to the lowest class."""
    _check_compat(w, data)
    scores = _augment(data.features) @ w.matrix()
    predicted = np.argmax(scores, axis=1)
    return 100.0 * float(np.mean(predicted == data.labels))


def corrupt(w: ModelWeights, mode: str, seed: int = 0, sigma: float = 1.0) -> ModelWeights:
    """Dishonest-worker transforms applied to an outgoing weight vector."""
    if mode == SIGN_FLIP:
        return ModelWeights(-w.values, w.d, w.c)
    if mode == ZERO:
        return ModelWeights(np.zeros_like(w.values), w.d, w.c)
    if mode == GAUSSIAN_NOISE:
        noise = substream(seed, "corrupt_noise").normal(0.0, sigma, size=w.values.shape)
        return ModelWeights(w.values + noise, w.d, w.c)
    raise ValueError(f"unknown corruption mode {mode!r}")
