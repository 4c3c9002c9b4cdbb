"""Cross-entropy training with Adadelta, global-norm clipping and He initialization."""

from __future__ import annotations

import dataclasses
import io
import json
import logging
import math
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import numerics as nx
from .augment import RandAugmentPolicy, rand_augment
from .datagen import WordImage, preprocess_array, sample_rng
from .evalbench import word_accuracy
from .model import ModelParams, ViTSTRConfig, forward, param_shapes
from .numerics import ContractError, NumericError, Tensor
from .tokenizer import Vocabulary

log = logging.getLogger(__name__)

EMBED_STD = 0.02

# stream ids for counter-based rng splitting
STREAM_INIT = 0
STREAM_BATCH = 1
STREAM_AUGMENT = 2


class TrainingError(RuntimeError):
    pass


class CheckpointError(ValueError):
    pass


def cross_entropy(logits: Tensor, targets) -> Tensor:
    """Mean over all B*S positions of -log softmax(logits)[target]."""
    targets = np.asarray(targets, dtype=np.int64)
    k = logits.shape[-1]
    if targets.shape != logits.shape[:-1]:
        raise ContractError(f"targets shape {targets.shape} does not match logits {logits.shape}")
    if targets.size and (targets.min() < 0 or targets.max() >= k):
        raise ContractError(f"target ids must lie in [0, {k}), got range [{targets.min()}, {targets.max()}]")
    x = logits.data.reshape(-1, k)
    t = targets.reshape(-1)
    shifted = x - x.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - log_z
    n = t.size
    loss = -logp[np.arange(n), t].mean()

    def backward(g):
        grad = np.exp(logp)
        grad[np.arange(n), t] -= 1.0
        return ((g / n) * grad.reshape(logits.shape),)

    return nx.make_result(np.asarray(loss, dtype=logits.dtype), (logits,), backward, "cross_entropy")


def is_embedding(name: str) -> bool:
    return name in ("cls_token", "pos_embed")


def he_init(params: ModelParams, rng: np.random.Generator, head_std: float = EMBED_STD) -> ModelParams:
    """He-normal linear weights, zero biases and betas, unit gammas.

    Class token and position embedding draw from N(0, 0.02^2). The output head
    uses the same small scale so initial logits are close to uniform.
    """
    arrays = OrderedDict()
    dtype = params["head.weight"].dtype
    for name, t in params.items():
        shape = t.shape
        if name.endswith(".gamma"):
            arr = np.ones(shape)
        elif name.endswith(".beta") or name.endswith(".bias"):
            arr = np.zeros(shape)
        elif is_embedding(name):
            arr = rng.normal(0.0, EMBED_STD, size=shape)
        elif name == "head.weight":
            arr = rng.normal(0.0, head_std, size=shape)
        else:
            fan_in = shape[0]
            arr = rng.normal(0.0, math.sqrt(2.0 / fan_in), size=shape)
        arrays[name] = arr.astype(dtype)
    return ModelParams.from_arrays(params.config, arrays, dtype)


def init_model(config: ViTSTRConfig, seed: int, dtype=None) -> ModelParams:
    return he_init(ModelParams.allocate(config, dtype), sample_rng(seed, STREAM_INIT))


def global_norm(grads: Mapping[str, np.ndarray]) -> float:
    return math.sqrt(sum(float(np.sum(np.square(g, dtype=np.float64))) for g in grads.values()))


def clip_global_norm(grads: Mapping[str, np.ndarray], max_norm: float):
    """Scale every gradient by ``max_norm / norm`` when the global L2 norm exceeds it."""
    if max_norm <= 0:
        raise ContractError(f"max_norm must be positive, got {max_norm}")
    norm = global_norm(grads)
    if norm <= max_norm:
        return OrderedDict(grads), norm
    factor = max_norm / norm
    return OrderedDict((k, (g * factor).astype(g.dtype)) for k, g in grads.items()), norm


@dataclasses.dataclass
class AdadeltaState:
    sq_grad: dict[str, np.ndarray]
    sq_delta: dict[str, np.ndarray]

    @classmethod
    def zeros(cls, params: ModelParams) -> "AdadeltaState":
        return cls(
            OrderedDict((k, np.zeros_like(t.data)) for k, t in params.items()),
            OrderedDict((k, np.zeros_like(t.data)) for k, t in params.items()),
        )


def adadelta_step(
    params: ModelParams,
    grads: Mapping[str, np.ndarray],
    state: AdadeltaState,
    lr: float = 1.0,
    rho: float = 0.95,
    eps: float = 1e-8,
) -> None:
    """One in-place Adadelta update of ``params`` and ``state``."""
    for name, t in params.items():
        g = grads[name]
        if g.shape != t.shape:
            raise ContractError(f"gradient for {name} has shape {g.shape}, parameter {t.shape}")
        eg2 = state.sq_grad[name]
        edx2 = state.sq_delta[name]
        eg2 *= rho
        eg2 += (1.0 - rho) * g * g
        delta = -np.sqrt((edx2 + eps) / (eg2 + eps)) * g
        edx2 *= rho
        edx2 += (1.0 - rho) * delta * delta
        t.data += lr * delta


@dataclasses.dataclass
class TrainConfig:
    batch_size: int = 32
    steps: int = 1000
    lr: float = 1.0
    rho: float = 0.95
    eps: float = 1e-8
    clip_norm: float = 5.0
    seed: int = 0
    augment: RandAugmentPolicy | None = None
    checkpoint_every: int = 0
    stop_at_accuracy: float | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ContractError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.clip_norm <= 0:
            raise ContractError(f"clip_norm must be positive, got {self.clip_norm}")
        if self.steps < 0:
            raise ContractError(f"steps must be >= 0, got {self.steps}")


@dataclasses.dataclass
class StepRecord:
    step: int
    loss: float
    train_acc: float


@dataclasses.dataclass
class TrainResult:
    params: ModelParams
    state: AdadeltaState
    records: list[StepRecord]
    step: int


def batch_indices(n: int, batch_size: int, seed: int, step: int) -> np.ndarray:
    rng = sample_rng(seed, STREAM_BATCH, step)
    if batch_size >= n:
        return rng.permutation(n)
    return rng.choice(n, size=batch_size, replace=False)


def evaluate(params: ModelParams, config: ViTSTRConfig, vocab: Vocabulary, samples: Sequence[WordImage],
             batch_size: int = 64) -> tuple[float, list[str]]:
    """Case-insensitive word accuracy (%) and predictions over ``samples``."""
    preds: list[str] = []
    with nx.no_grad():
        for start in range(0, len(samples), batch_size):
            chunk = samples[start : start + batch_size]
            images = np.stack([preprocess_array(s, config) for s in chunk])
            preds.extend(vocab.decode_batch(forward(images, params, config)))
    acc = word_accuracy(preds, [s.label for s in samples]) if samples else 0.0
    return acc, preds


def train_loop(
    params: ModelParams,
    vocab: Vocabulary,
    samples: Sequence[WordImage],
    cfg: TrainConfig,
    state: AdadeltaState | None = None,
    start_step: int = 0,
    out_dir: str | Path | None = None,
    on_record: Callable[[StepRecord], None] | None = None,
) -> TrainResult:
    """Run ``cfg.steps`` optimizer steps starting at ``start_step``.

    Each record holds the loss and batch word accuracy measured before that
    step's update. A closing record at the final step evaluates the updated
    weights on every training sample.
    """
    config = params.config
    if len(vocab) != config.num_classes:
        raise ContractError(f"vocabulary size {len(vocab)} != num_classes {config.num_classes}")
    if not samples:
        raise ContractError("cannot train on an empty dataset")
    for s in samples:
        vocab.validate(s.label, config.max_text_len)
    state = state or AdadeltaState.zeros(params)
    targets = vocab.encode_batch([s.label for s in samples], config.seq_len)
    cached = None if cfg.augment else np.stack([preprocess_array(s, config) for s in samples])
    dtype = params["head.weight"].dtype
    out_dir = Path(out_dir) if out_dir is not None else None
    records: list[StepRecord] = []
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        metrics_path = out_dir / "metrics.tsv"
        if start_step == 0 or not metrics_path.exists():
            metrics_path.write_text("step\tloss\ttrain_acc\n", encoding="utf-8")

    def emit(rec: StepRecord):
        records.append(rec)
        if out_dir is not None:
            with open(out_dir / "metrics.tsv", "a", encoding="utf-8") as fh:
                fh.write(f"{rec.step}\t{rec.loss:.6f}\t{rec.train_acc:.2f}\n")
        if on_record:
            on_record(rec)

    step = start_step
    end = start_step + cfg.steps
    while step < end:
        idx = batch_indices(len(samples), cfg.batch_size, cfg.seed, step)
        if cached is not None:
            images = cached[idx]
        else:
            images = np.stack([
                preprocess_array(rand_augment(cfg.augment, samples[i], sample_rng(cfg.seed, STREAM_AUGMENT, step, j)),
                                 config)
                for j, i in enumerate(idx)
            ])
        images = images.astype(dtype, copy=False)
        params.zero_grad()
        try:
            logits = forward(images, params, config)
            loss = cross_entropy(logits, targets[idx])
            nx.backward(loss)
        except NumericError as exc:
            nx.get_tape().clear()
            raise TrainingError(f"non-finite values at step {step}: {exc}") from exc
        loss_value = loss.item()
        if not math.isfinite(loss_value):
            raise TrainingError(f"non-finite loss at step {step}")
        preds = vocab.decode_batch(logits)
        acc = word_accuracy(preds, [samples[i].label for i in idx])
        emit(StepRecord(step, loss_value, acc))
        grads, _ = clip_global_norm(params.grads(), cfg.clip_norm)
        adadelta_step(params, grads, state, cfg.lr, cfg.rho, cfg.eps)
        step += 1
        if out_dir is not None and cfg.checkpoint_every and step % cfg.checkpoint_every == 0:
            save_checkpoint(out_dir / f"step_{step:06d}.ckpt", params, state, vocab, step)
        if cfg.stop_at_accuracy is not None and acc >= cfg.stop_at_accuracy:
            # confirm on the updated weights before stopping
            confirmed, _ = evaluate(params, config, vocab, samples)
            if confirmed >= cfg.stop_at_accuracy:
                log.info("stopping at step %d: accuracy %.2f", step, confirmed)
                break

    final_acc, _ = evaluate(params, config, vocab, samples)
    with nx.no_grad():
        idx = np.arange(len(samples))
        full = cached if cached is not None else np.stack([preprocess_array(s, config) for s in samples])
        final_loss = cross_entropy(forward(full.astype(dtype, copy=False), params, config), targets[idx]).item()
    emit(StepRecord(step, final_loss, final_acc))
    if out_dir is not None:
        save_checkpoint(out_dir / "final.ckpt", params, state, vocab, step)
    return TrainResult(params, state, records, step)


CKPT_MAGIC = b"VTCK"


@dataclasses.dataclass
class Checkpoint:
    params: ModelParams
    state: AdadeltaState
    vocab: Vocabulary
    config: ViTSTRConfig
    step: int


def save_checkpoint(path: str | Path, params: ModelParams, state: AdadeltaState | None,
                    vocab: Vocabulary, step: int) -> None:
    """UTF-8 JSON metadata header followed by a named-tensor container."""
    meta = {
        "format": "vitstr-checkpoint",
        "version": 1,
        "config": params.config.to_dict(),
        "vocab": list(vocab.chars),
        "step": int(step),
    }
    tensors = OrderedDict((f"param/{k}", v) for k, v in params.arrays().items())
    if state is not None:
        tensors.update((f"adadelta.sq_grad/{k}", v) for k, v in state.sq_grad.items())
        tensors.update((f"adadelta.sq_delta/{k}", v) for k, v in state.sq_delta.items())
    header = json.dumps(meta, sort_keys=True).encode("utf-8")
    buf = io.BytesIO()
    buf.write(CKPT_MAGIC)
    buf.write(struct.pack("<I", len(header)))
    buf.write(header)
    nx.write_tensors(buf, tensors)
    Path(path).write_bytes(buf.getvalue())


def load_checkpoint(path: str | Path, expected: ViTSTRConfig | None = None,
                    expected_vocab: Vocabulary | None = None) -> Checkpoint:
    try:
        raw = Path(path).read_bytes()
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint not found: {path}") from None
    if raw[:4] != CKPT_MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    (hlen,) = struct.unpack("<I", raw[4:8])
    meta = json.loads(raw[8 : 8 + hlen].decode("utf-8"))
    try:
        tensors = nx.read_tensors(io.BytesIO(raw[8 + hlen :]))
    except nx.SerializationError as exc:
        raise CheckpointError(f"{path}: {exc}") from None
    config = ViTSTRConfig.from_dict(meta["config"])
    vocab = Vocabulary(meta["vocab"])
    if expected_vocab is not None and vocab != expected_vocab:
        raise CheckpointError(f"{path}: vocabulary differs from the expected one")
    reference = expected or config
    for name, shape in param_shapes(reference).items():
        arr = tensors.get(f"param/{name}")
        if arr is None:
            raise CheckpointError(f"{path}: missing tensor {name}")
        if arr.shape != shape:
            raise CheckpointError(f"{path}: tensor {name} has shape {arr.shape}, expected {shape}")
    extra = [k[6:] for k in tensors if k.startswith("param/") and k[6:] not in param_shapes(reference)]
    if extra:
        raise CheckpointError(f"{path}: unexpected tensor {extra[0]}")
    if expected is not None and expected != config:
        diff = [f for f in expected.to_dict() if expected.to_dict()[f] != config.to_dict()[f]]
        raise CheckpointError(f"{path}: config field {diff[0]} differs from the expected config")
    if len(vocab) != reference.num_classes:
        raise CheckpointError(f"{path}: vocabulary size {len(vocab)} != num_classes {reference.num_classes}")
    params_dtype = tensors[f"param/{next(iter(param_shapes(reference)))}"].dtype
    params = ModelParams.from_arrays(
        reference, {k: tensors[f"param/{k}"] for k in param_shapes(reference)}, params_dtype
    )
    if any(k.startswith("adadelta.") for k in tensors):
        state = AdadeltaState(
            OrderedDict((k, tensors[f"adadelta.sq_grad/{k}"].copy()) for k in params),
            OrderedDict((k, tensors[f"adadelta.sq_delta/{k}"].copy()) for k in params),
        )
    else:
        state = AdadeltaState.zeros(params)
    return Checkpoint(params, state, vocab, reference, int(meta["step"]))


def read_metrics(path: str | Path) -> list[StepRecord]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()[1:]
    out = []
    for line in lines:
        step, loss, acc = line.split("\t")
        out.append(StepRecord(int(step), float(loss), float(acc)))
    return out
