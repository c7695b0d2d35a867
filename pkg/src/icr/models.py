"""Classifiers: the neural model (from scratch on numpy) and the logistic baseline.

The neural classifier encodes each enabled input (image 2048-d, message and
context 768-d) with a linear layer to 128 dimensions, concatenates, and runs
LeakyReLU(0.01) -> Dropout(0.1) -> Linear -> BatchNorm -> LeakyReLU -> Linear
to a single sigmoid probability. Training minimizes weighted binary cross
entropy with Adam (0.9/0.999, eps 1e-8), coupled L2 weight decay as a loss
term, gradient accumulation with global-norm clipping, and an exponential
learning-rate schedule; the checkpoint with the highest validation average
precision wins. Everything is seeded and exactly reproducible.

Gradient accumulation averages the window's batch gradients (so a partial
final window steps with the same scale), and batches smaller than 2 are
skipped because batch normalization needs at least two samples.
"""

from __future__ import annotations

import copy
import json
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .datasets import ContextFilter, Datapoint
from .errors import DimMismatch, MissingEmbedding, NonFiniteLoss, SingleClassTraining
from .evaluation import average_precision
from .stores import EmbeddingStore

_INPUT_ORDER = ("img", "msg", "ctx")
_BN_EPS = 1e-5
_BN_MOMENTUM = 0.1
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class ClassifierConfig:
    use_image: bool = True
    use_message: bool = True
    use_context: bool = True
    image_dim: int = 2048
    text_dim: int = 768
    internal_dim: int = 128
    hidden_dim: int = 256
    dropout: float = 0.1
    leaky_slope: float = 0.01
    context_filter: ContextFilter = ContextFilter.NONE

    def __post_init__(self):
        if not (self.use_image or self.use_message or self.use_context):
            raise ValueError("at least one input must be enabled")

    def enabled_inputs(self) -> tuple[str, ...]:
        flags = {"img": self.use_image, "msg": self.use_message, "ctx": self.use_context}
        return tuple(name for name in _INPUT_ORDER if flags[name])

    def input_dim(self, name: str) -> int:
        return self.image_dim if name == "img" else self.text_dim

    def concat_dim(self) -> int:
        return self.internal_dim * len(self.enabled_inputs())

    def as_dict(self) -> dict:
        d = self.__dict__.copy()
        d["context_filter"] = self.context_filter.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierConfig":
        d = dict(d)
        d["context_filter"] = ContextFilter(d.get("context_filter", "none"))
        return cls(**d)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.003
    batch_size: int = 128
    grad_accumulation: int = 25
    grad_clip: float = 1.0
    scheduler_gamma: float = 0.99
    positive_class_weight: float = 2.6125454767515217
    weight_decay: float = 1e-4
    max_epochs: int = 20
    seed: int = 35466
    decision_threshold: float = 0.5
    # Searched but inert under the exponential scheduler; recorded for fidelity.
    lr_step: int = 2

    def __post_init__(self):
        for name in ("learning_rate", "batch_size", "grad_accumulation", "grad_clip",
                     "scheduler_gamma", "positive_class_weight", "weight_decay", "max_epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.decision_threshold < 1.0:
            raise ValueError("decision_threshold must be in (0,1)")

    def as_dict(self) -> dict:
        return self.__dict__.copy()


def param_count(cfg: ClassifierConfig) -> int:
    """Closed-form trainable parameter count."""
    d, h = cfg.internal_dim, cfg.hidden_dim
    encoders = sum(cfg.input_dim(name) * d + d for name in cfg.enabled_inputs())
    classifier = (cfg.concat_dim() * h + h) + 2 * h + (h + 1)
    return encoders + classifier


@dataclass
class Model:
    config: ClassifierConfig
    params: dict[str, np.ndarray]
    running: dict[str, np.ndarray]  # batch-norm running mean/var, not trainable

    def n_parameters(self) -> int:
        return sum(p.size for p in self.params.values())


def _linear_init(rng: np.random.Generator, fan_in: int, fan_out: int) -> tuple[np.ndarray, np.ndarray]:
    bound = 1.0 / np.sqrt(fan_in)
    w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
    b = rng.uniform(-bound, bound, size=fan_out)
    return w, b


def init_model(cfg: ClassifierConfig, seed: int = 0) -> Model:
    """Seeded uniform fan-in initialization; parameter count matches the closed form."""
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    for name in cfg.enabled_inputs():
        w, b = _linear_init(rng, cfg.input_dim(name), cfg.internal_dim)
        params[f"enc_{name}.W"] = w
        params[f"enc_{name}.b"] = b
    h = cfg.hidden_dim
    w1, b1 = _linear_init(rng, cfg.concat_dim(), h)
    params["cls.W1"] = w1
    params["cls.b1"] = b1
    params["cls.bn_gamma"] = np.ones(h)
    params["cls.bn_beta"] = np.zeros(h)
    w2, b2 = _linear_init(rng, h, 1)
    params["cls.W2"] = w2
    params["cls.b2"] = b2
    running = {"cls.bn_mean": np.zeros(h), "cls.bn_var": np.ones(h)}
    model = Model(config=cfg, params=params, running=running)
    assert model.n_parameters() == param_count(cfg)
    return model


def _leaky(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x > 0, x, slope * x)


def _leaky_grad(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x > 0, 1.0, slope)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _check_inputs(cfg: ClassifierConfig, inputs: Mapping[str, np.ndarray]) -> dict[str, np.ndarray]:
    batch: dict[str, np.ndarray] = {}
    size = None
    for name in cfg.enabled_inputs():
        if name not in inputs or inputs[name] is None:
            raise DimMismatch(f"input {name!r} enabled but not provided")
        x = np.atleast_2d(np.asarray(inputs[name], dtype=np.float64))
        if x.shape[1] != cfg.input_dim(name):
            raise DimMismatch(f"input {name!r} has dim {x.shape[1]}, expected {cfg.input_dim(name)}")
        if size is None:
            size = x.shape[0]
        elif x.shape[0] != size:
            raise DimMismatch(f"input {name!r} batch size {x.shape[0]} != {size}")
        batch[name] = x
    return batch


def _forward(model: Model, batch: Mapping[str, np.ndarray], train: bool,
             dropout_mask: np.ndarray | None = None,
             rng: np.random.Generator | None = None) -> tuple[np.ndarray, dict]:
    cfg = model.config
    p = model.params
    encoded = [batch[name] @ p[f"enc_{name}.W"] + p[f"enc_{name}.b"] for name in cfg.enabled_inputs()]
    h0 = np.concatenate(encoded, axis=1)
    a0 = _leaky(h0, cfg.leaky_slope)

    if train and cfg.dropout > 0.0:
        if dropout_mask is None:
            if rng is None:
                raise ValueError("train-mode dropout needs an rng or an explicit mask")
            dropout_mask = (rng.random(a0.shape) >= cfg.dropout) / (1.0 - cfg.dropout)
        u = a0 * dropout_mask
    else:
        dropout_mask = np.ones_like(a0)
        u = a0

    z1 = u @ p["cls.W1"] + p["cls.b1"]
    if train:
        if z1.shape[0] < 2:
            raise ValueError("train-mode batch normalization needs at least 2 samples")
        mu = z1.mean(axis=0)
        var = z1.var(axis=0)
    else:
        mu = model.running["cls.bn_mean"]
        var = model.running["cls.bn_var"]
    inv_std = 1.0 / np.sqrt(var + _BN_EPS)
    xhat = (z1 - mu) * inv_std
    y_bn = p["cls.bn_gamma"] * xhat + p["cls.bn_beta"]
    a1 = _leaky(y_bn, cfg.leaky_slope)
    z2 = (a1 @ p["cls.W2"] + p["cls.b2"]).reshape(-1)
    prob = _sigmoid(z2)
    cache = {"batch": batch, "h0": h0, "a0": a0, "mask": dropout_mask, "u": u,
             "z1": z1, "mu": mu, "var": var, "inv_std": inv_std, "xhat": xhat,
             "y_bn": y_bn, "a1": a1, "z2": z2, "prob": prob, "train": train}
    return prob, cache


def forward(model: Model, image_vec=None, msg_vec=None, ctx_vec=None,
            mode: str = "eval", rng: np.random.Generator | None = None) -> float | np.ndarray:
    """Probability of the positive label for one vector set or a batch.

    Eval mode is deterministic: dropout off, normalization uses running
    statistics, so the result is independent of batching.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    provided = {"img": image_vec, "msg": msg_vec, "ctx": ctx_vec}
    single = all(np.asarray(v).ndim == 1 for name, v in provided.items()
                 if name in model.config.enabled_inputs() and v is not None)
    batch = _check_inputs(model.config, provided)
    prob, _ = _forward(model, batch, train=(mode == "train"), rng=rng)
    return float(prob[0]) if single else prob


def weighted_bce(prob: np.ndarray, z: np.ndarray, labels: np.ndarray, pos_weight: float) -> float:
    """Mean weighted binary cross entropy, computed from logits for stability."""
    log_p = -_softplus(-z)
    log_1p = -_softplus(z)
    per_sample = -(pos_weight * labels * log_p + (1.0 - labels) * log_1p)
    return float(per_sample.mean())


def _backward(model: Model, cache: dict, labels: np.ndarray, pos_weight: float,
              weight_decay: float) -> dict[str, np.ndarray]:
    cfg = model.config
    p = model.params
    B = labels.shape[0]
    prob = cache["prob"]
    # d(mean loss)/dz2 for the weighted BCE.
    dz2 = ((1.0 - labels) * prob - pos_weight * labels * (1.0 - prob)) / B

    grads: dict[str, np.ndarray] = {}
    a1 = cache["a1"]
    grads["cls.W2"] = a1.T @ dz2[:, None]
    grads["cls.b2"] = np.array([dz2.sum()])
    da1 = dz2[:, None] @ p["cls.W2"].T
    dy_bn = da1 * _leaky_grad(cache["y_bn"], cfg.leaky_slope)

    xhat, inv_std = cache["xhat"], cache["inv_std"]
    grads["cls.bn_gamma"] = (dy_bn * xhat).sum(axis=0)
    grads["cls.bn_beta"] = dy_bn.sum(axis=0)
    dxhat = dy_bn * p["cls.bn_gamma"]
    if cache["train"]:
        z1, mu = cache["z1"], cache["mu"]
        centered = z1 - mu
        dvar = (dxhat * centered).sum(axis=0) * (-0.5) * inv_std**3
        dmu = -(dxhat.sum(axis=0)) * inv_std + dvar * (-2.0 / B) * centered.sum(axis=0)
        dz1 = dxhat * inv_std + dvar * (2.0 / B) * centered + dmu / B
    else:
        dz1 = dxhat * inv_std

    u = cache["u"]
    grads["cls.W1"] = u.T @ dz1
    grads["cls.b1"] = dz1.sum(axis=0)
    du = dz1 @ p["cls.W1"].T
    da0 = du * cache["mask"]
    dh0 = da0 * _leaky_grad(cache["h0"], cfg.leaky_slope)

    offset = 0
    for name in cfg.enabled_inputs():
        part = dh0[:, offset:offset + cfg.internal_dim]
        grads[f"enc_{name}.W"] = cache["batch"][name].T @ part
        grads[f"enc_{name}.b"] = part.sum(axis=0)
        offset += cfg.internal_dim

    if weight_decay:
        for name, value in p.items():
            grads[name] = grads[name].reshape(value.shape) + weight_decay * value
    else:
        for name, value in p.items():
            grads[name] = grads[name].reshape(value.shape)
    return grads


def training_loss_and_grads(model: Model, inputs: Mapping[str, np.ndarray], labels,
                            pos_weight: float, weight_decay: float = 0.0,
                            dropout_mask: np.ndarray | None = None,
                            rng: np.random.Generator | None = None) -> tuple[float, dict[str, np.ndarray]]:
    """One train-mode loss/gradient evaluation (no parameter update).

    The returned loss includes the coupled L2 term 0.5 * wd * sum(theta^2),
    so analytic gradients are exactly the derivative of the returned value.
    """
    batch = _check_inputs(model.config, inputs)
    y = np.asarray(labels, dtype=np.float64)
    prob, cache = _forward(model, batch, train=True, dropout_mask=dropout_mask, rng=rng)
    loss = weighted_bce(prob, cache["z2"], y, pos_weight)
    if weight_decay:
        loss += 0.5 * weight_decay * sum(float(np.sum(v * v)) for v in model.params.values())
    grads = _backward(model, cache, y, pos_weight, weight_decay)
    return loss, grads


def _update_running(model: Model, cache: dict) -> None:
    B = cache["z1"].shape[0]
    unbiased = cache["var"] * B / (B - 1)
    model.running["cls.bn_mean"] = ((1 - _BN_MOMENTUM) * model.running["cls.bn_mean"]
                                    + _BN_MOMENTUM * cache["mu"])
    model.running["cls.bn_var"] = ((1 - _BN_MOMENTUM) * model.running["cls.bn_var"]
                                   + _BN_MOMENTUM * unbiased)


def flatten_params(params: Mapping[str, np.ndarray]) -> np.ndarray:
    return np.concatenate([params[k].ravel() for k in sorted(params)])


def set_flat_params(model: Model, flat: np.ndarray) -> None:
    offset = 0
    for k in sorted(model.params):
        size = model.params[k].size
        model.params[k] = flat[offset:offset + size].reshape(model.params[k].shape).copy()
        offset += size


# ---------------------------------------------------------------------------
# Stores and batch gathering
# ---------------------------------------------------------------------------

@dataclass
class StoreBundle:
    ctx: EmbeddingStore | None = None
    msg: EmbeddingStore | None = None
    img: EmbeddingStore | None = None

    def provenance(self) -> dict:
        out = {}
        for name in _INPUT_ORDER:
            store = getattr(self, name)
            out[name] = None if store is None else {"dim": store.dim, "fallback": store.fallback,
                                                    "records": len(store)}
        return out


def _dp_key(dp: Datapoint, name: str) -> str:
    if name == "img":
        return dp.scene_key
    return dp.ctx_key if name == "ctx" else dp.msg_key


def gather_inputs(datapoints: Sequence[Datapoint], stores: StoreBundle,
                  cfg: ClassifierConfig) -> dict[str, np.ndarray]:
    """Dense per-input matrices for the datapoints; reports every missing key."""
    missing: list[str] = []
    out: dict[str, np.ndarray] = {}
    for name in cfg.enabled_inputs():
        store = getattr(stores, name)
        if store is None:
            raise MissingEmbedding([f"<no {name} store>"])
        matrix = np.zeros((len(datapoints), cfg.input_dim(name)), dtype=np.float64)
        if store.dim != cfg.input_dim(name):
            raise DimMismatch(f"{name} store dim {store.dim} != configured {cfg.input_dim(name)}")
        for row, dp in enumerate(datapoints):
            key = _dp_key(dp, name)
            vec = store.records.get(key)
            if vec is None:
                missing.append(key)
            else:
                matrix[row] = vec
        out[name] = matrix
    if missing:
        raise MissingEmbedding(missing)
    return out


def gather_labels(datapoints: Sequence[Datapoint]) -> np.ndarray:
    from .annotation import Label

    return np.array([1.0 if dp.label is Label.ICR else 0.0 for dp in datapoints])


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

@dataclass
class Checkpoint:
    config: ClassifierConfig
    train_config: TrainConfig | None
    params: dict[str, np.ndarray]
    running: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def to_model(self) -> Model:
        return Model(config=self.config,
                     params={k: v.copy() for k, v in self.params.items()},
                     running={k: v.copy() for k, v in self.running.items()})


@dataclass
class EpochMetrics:
    epoch: int
    learning_rate: float
    train_loss: float
    val_ap: float
    n_steps: int

    def as_dict(self) -> dict:
        return self.__dict__.copy()


class _Adam:
    def __init__(self, params: Mapping[str, np.ndarray]):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: Mapping[str, np.ndarray], lr: float) -> None:
        self.t += 1
        bias1 = 1.0 - ADAM_BETA1**self.t
        bias2 = 1.0 - ADAM_BETA2**self.t
        for k, g in grads.items():
            self.m[k] = ADAM_BETA1 * self.m[k] + (1 - ADAM_BETA1) * g
            self.v[k] = ADAM_BETA2 * self.v[k] + (1 - ADAM_BETA2) * g * g
            m_hat = self.m[k] / bias1
            v_hat = self.v[k] / bias2
            params[k] = params[k] - lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def _clip_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> None:
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        for k in grads:
            grads[k] = grads[k] * scale


def train(model: Model, train_dps: Sequence[Datapoint], val_dps: Sequence[Datapoint],
          stores: StoreBundle, tcfg: TrainConfig) -> tuple[Checkpoint, list[EpochMetrics]]:
    """Full training run; returns the best-validation-AP checkpoint and the log."""
    cfg = model.config
    x_train = gather_inputs(train_dps, stores, cfg)
    y_train = gather_labels(train_dps)
    x_val = gather_inputs(val_dps, stores, cfg)
    y_val = gather_labels(val_dps)

    rng = np.random.default_rng(tcfg.seed)
    adam = _Adam(model.params)
    best: Checkpoint | None = None
    history: list[EpochMetrics] = []
    n = len(train_dps)

    for epoch in range(tcfg.max_epochs):
        lr = tcfg.learning_rate * tcfg.scheduler_gamma**epoch
        order = rng.permutation(n)
        window: list[dict[str, np.ndarray]] = []
        losses: list[float] = []
        n_steps = 0

        def apply_step():
            nonlocal n_steps
            if not window:
                return
            mean_grads = {k: sum(g[k] for g in window) / len(window) for k in window[0]}
            _clip_global_norm(mean_grads, tcfg.grad_clip)
            adam.step(model.params, mean_grads, lr)
            window.clear()
            n_steps += 1

        for batch_index, start in enumerate(range(0, n, tcfg.batch_size)):
            idx = order[start:start + tcfg.batch_size]
            if idx.size < 2:
                continue  # batch normalization needs at least 2 samples
            batch = {name: x_train[name][idx] for name in cfg.enabled_inputs()}
            y = y_train[idx]
            prob, cache = _forward(model, batch, train=True, rng=rng)
            loss = weighted_bce(prob, cache["z2"], y, tcfg.positive_class_weight)
            if tcfg.weight_decay:
                loss += 0.5 * tcfg.weight_decay * sum(float(np.sum(v * v))
                                                      for v in model.params.values())
            if not np.isfinite(loss):
                raise NonFiniteLoss(epoch=epoch, batch=batch_index)
            losses.append(loss)
            _update_running(model, cache)
            window.append(_backward(model, cache, y, tcfg.positive_class_weight, tcfg.weight_decay))
            if len(window) == tcfg.grad_accumulation:
                apply_step()
        apply_step()  # partial final window still steps

        val_scores, _ = _forward(model, x_val, train=False)
        val_ap = average_precision(val_scores, y_val.astype(np.int64))
        history.append(EpochMetrics(epoch=epoch, learning_rate=lr,
                                    train_loss=float(np.mean(losses)) if losses else float("nan"),
                                    val_ap=val_ap, n_steps=n_steps))
        if best is None or val_ap > best.metadata["val_ap"]:
            best = Checkpoint(
                config=cfg,
                train_config=tcfg,
                params={k: v.copy() for k, v in model.params.items()},
                running={k: v.copy() for k, v in model.running.items()},
                metadata={"epoch": epoch, "val_ap": val_ap, "stores": stores.provenance()},
            )
    assert best is not None
    return best, history


def predict(checkpoint: Checkpoint, datapoints: Sequence[Datapoint], stores: StoreBundle,
            batch_size: int = 1024) -> np.ndarray:
    """Eval-mode scores, deterministic and independent of batch size."""
    if not datapoints:
        return np.zeros(0)
    model = checkpoint.to_model()
    inputs = gather_inputs(datapoints, stores, model.config)
    scores = np.empty(len(datapoints))
    for start in range(0, len(datapoints), batch_size):
        chunk = {k: v[start:start + batch_size] for k, v in inputs.items()}
        prob, _ = _forward(model, chunk, train=False)
        scores[start:start + batch_size] = prob
    return scores


# ---------------------------------------------------------------------------
# Checkpoint container: config JSON header plus named raw float64 tensors
# ---------------------------------------------------------------------------

_CKPT_MAGIC = b"ICKP"
_CKPT_VERSION = 1


def save_checkpoint(checkpoint: Checkpoint, path: str | Path) -> None:
    tensors = {f"params.{k}": v for k, v in checkpoint.params.items()}
    tensors.update({f"running.{k}": v for k, v in checkpoint.running.items()})
    manifest = []
    offset = 0
    blobs = []
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype="<f8")
        blob = arr.tobytes()
        manifest.append({"name": name, "shape": list(arr.shape), "dtype": "<f8",
                         "offset": offset, "nbytes": len(blob)})
        blobs.append(blob)
        offset += len(blob)
    header = json.dumps({
        "config": checkpoint.config.as_dict(),
        "train_config": None if checkpoint.train_config is None else checkpoint.train_config.as_dict(),
        "metadata": checkpoint.metadata,
        "tensors": manifest,
    }).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_CKPT_MAGIC)
        fh.write(struct.pack("<IQ", _CKPT_VERSION, len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path: str | Path) -> Checkpoint:
    data = Path(path).read_bytes()
    if data[:4] != _CKPT_MAGIC:
        raise ValueError(f"{path}: not a checkpoint file")
    version, header_len = struct.unpack_from("<IQ", data, 4)
    if version != _CKPT_VERSION:
        raise ValueError(f"{path}: checkpoint version {version}, expected {_CKPT_VERSION}")
    header = json.loads(data[16:16 + header_len].decode("utf-8"))
    body = data[16 + header_len:]
    params: dict[str, np.ndarray] = {}
    running: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        raw = body[entry["offset"]:entry["offset"] + entry["nbytes"]]
        arr = np.frombuffer(raw, dtype=entry["dtype"]).reshape(entry["shape"]).copy()
        group, key = entry["name"].split(".", 1)
        (params if group == "params" else running)[key] = arr
    tcfg = header["train_config"]
    return Checkpoint(
        config=ClassifierConfig.from_dict(header["config"]),
        train_config=None if tcfg is None else TrainConfig(**tcfg),
        params=params,
        running=running,
        metadata=header["metadata"],
    )


# ---------------------------------------------------------------------------
# Logistic-regression baseline (scikit-learn, balanced class weights)
# ---------------------------------------------------------------------------

@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float

    def scores(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return _sigmoid(X @ self.weights + self.bias)


def fit_logistic(X, y, class_weight: str = "balanced", max_iter: int = 1000,
                 seed: int = 0) -> LogisticModel:
    """Weighted maximum-likelihood logistic regression (per-class weight
    n / (2 * n_class), the balanced convention)."""
    from sklearn.linear_model import LogisticRegression

    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise SingleClassTraining("training labels contain a single class")
    clf = LogisticRegression(class_weight=class_weight, max_iter=max_iter, random_state=seed)
    clf.fit(X, y)
    return LogisticModel(weights=clf.coef_.ravel().copy(), bias=float(clf.intercept_[0]))


# ---------------------------------------------------------------------------
# Ablations
# ---------------------------------------------------------------------------

def ablate(base: ClassifierConfig) -> dict[str, ClassifierConfig]:
    """The five input-ablation variants. The context-filtered pair keeps the
    full architecture but rebuilds context text from one speaker only."""
    return {
        "no_image": replace(base, use_image=False),
        "no_message": replace(base, use_message=False),
        "no_context": replace(base, use_context=False),
        "context_wo_teller": replace(base, context_filter=ContextFilter.DROP_TELLER),
        "context_wo_drawer": replace(base, context_filter=ContextFilter.DROP_DRAWER),
    }
