"""ViTSTR: patch embedding, pre-norm transformer encoder and a parallel S-way head."""

from __future__ import annotations

import dataclasses
import math
from collections import OrderedDict
from typing import Iterator

import numpy as np
from PIL import Image

from . import numerics as nx
from .numerics import DimensionError, Tensor


class ConfigError(ValueError):
    """An architecture configuration violates its invariants."""


@dataclasses.dataclass(frozen=True)
class ViTSTRConfig:
    patch_size: int = 16
    depth: int = 12
    embed_dim: int = 192
    num_heads: int = 3
    seq_len: int = 27
    image_size: tuple[int, int] = (224, 224)
    in_channels: int = 1
    num_classes: int = 96
    mlp_ratio: int = 4
    ln_eps: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "image_size", tuple(int(v) for v in self.image_size))
        h, w = self.image_size
        p = self.patch_size
        if min(p, self.depth, self.embed_dim, self.num_heads, self.in_channels,
               self.num_classes, self.mlp_ratio, h, w) < 1:
            raise ConfigError(f"all extents must be positive: {self}")
        if self.embed_dim % self.num_heads:
            raise ConfigError(
                f"embed_dim {self.embed_dim} is not divisible by num_heads {self.num_heads}"
            )
        if h % p or w % p:
            raise ConfigError(f"image size {h}x{w} is not divisible by patch size {p}")
        if self.seq_len < 2:
            raise ConfigError(f"seq_len must be at least 2, got {self.seq_len}")
        if self.seq_len > self.num_patches + 1:
            raise ConfigError(
                f"seq_len {self.seq_len} exceeds encoder length {self.num_patches + 1}"
            )

    @property
    def grid(self) -> tuple[int, int]:
        return self.image_size[0] // self.patch_size, self.image_size[1] // self.patch_size

    @property
    def num_patches(self) -> int:
        gh, gw = self.grid
        return gh * gw

    @property
    def num_tokens(self) -> int:
        return self.num_patches + 1

    @property
    def head_dim(self) -> int:
        return self.embed_dim // self.num_heads

    @property
    def patch_dim(self) -> int:
        return self.patch_size * self.patch_size * self.in_channels

    @property
    def mlp_hidden(self) -> int:
        return self.mlp_ratio * self.embed_dim

    @property
    def max_text_len(self) -> int:
        return self.seq_len - 2

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["image_size"] = list(self.image_size)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ViTSTRConfig":
        return cls(**{**d, "image_size": tuple(d["image_size"])})


VARIANTS = {
    "tiny": dict(embed_dim=192, num_heads=3),
    "small": dict(embed_dim=384, num_heads=6),
    "base": dict(embed_dim=768, num_heads=12),
}


def variant_config(name: str, **overrides) -> ViTSTRConfig:
    """Table-sized configurations (P=16, L=12, S=27, 224x224, grayscale)."""
    if name not in VARIANTS:
        raise ConfigError(f"unknown variant {name!r}; expected one of {sorted(VARIANTS)}")
    return ViTSTRConfig(**{**VARIANTS[name], **overrides})


def param_shapes(config: ViTSTRConfig) -> "OrderedDict[str, tuple[int, ...]]":
    """Inventory of every learnable tensor, in canonical order."""
    d, k = config.embed_dim, config.num_classes
    shapes: OrderedDict[str, tuple[int, ...]] = OrderedDict()
    shapes["patch_embed.weight"] = (config.patch_dim, d)
    shapes["patch_embed.bias"] = (d,)
    shapes["cls_token"] = (d,)
    shapes["pos_embed"] = (config.num_tokens, d)
    for i in range(config.depth):
        b = f"blocks.{i}."
        shapes[b + "ln1.gamma"] = (d,)
        shapes[b + "ln1.beta"] = (d,)
        shapes[b + "attn.qkv.weight"] = (d, 3 * d)
        shapes[b + "attn.qkv.bias"] = (3 * d,)
        shapes[b + "attn.proj.weight"] = (d, d)
        shapes[b + "attn.proj.bias"] = (d,)
        shapes[b + "ln2.gamma"] = (d,)
        shapes[b + "ln2.beta"] = (d,)
        shapes[b + "mlp.fc1.weight"] = (d, config.mlp_hidden)
        shapes[b + "mlp.fc1.bias"] = (config.mlp_hidden,)
        shapes[b + "mlp.fc2.weight"] = (config.mlp_hidden, d)
        shapes[b + "mlp.fc2.bias"] = (d,)
    shapes["norm.gamma"] = (d,)
    shapes["norm.beta"] = (d,)
    shapes["head.weight"] = (d, k)
    shapes["head.bias"] = (k,)
    return shapes


class ModelParams:
    """Named learnable tensors of one ViTSTR model."""

    def __init__(self, config: ViTSTRConfig, tensors: "OrderedDict[str, Tensor]"):
        self.config = config
        self.tensors = tensors

    @classmethod
    def allocate(cls, config: ViTSTRConfig, dtype=None) -> "ModelParams":
        """Zero weights, unit LayerNorm gains."""
        tensors = OrderedDict()
        for name, shape in param_shapes(config).items():
            fill = np.ones if name.endswith(".gamma") else np.zeros
            tensors[name] = Tensor(fill(shape), requires_grad=True, dtype=dtype)
        return cls(config, tensors)

    @classmethod
    def from_arrays(cls, config: ViTSTRConfig, arrays: dict, dtype=None) -> "ModelParams":
        tensors = OrderedDict(
            (name, Tensor(arrays[name], requires_grad=True, dtype=dtype)) for name in param_shapes(config)
        )
        return cls(config, tensors)

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def items(self):
        return self.tensors.items()

    def block(self, i: int) -> dict[str, Tensor]:
        prefix = f"blocks.{i}."
        return {k[len(prefix):]: v for k, v in self.tensors.items() if k.startswith(prefix)}

    def numel(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    def zero_grad(self) -> None:
        for t in self.tensors.values():
            t.grad = None

    def grads(self) -> "OrderedDict[str, np.ndarray]":
        return OrderedDict(
            (k, t.grad if t.grad is not None else np.zeros_like(t.data)) for k, t in self.tensors.items()
        )

    def arrays(self) -> "OrderedDict[str, np.ndarray]":
        return OrderedDict((k, t.data) for k, t in self.tensors.items())

    def copy(self, dtype=None) -> "ModelParams":
        return ModelParams.from_arrays(self.config, {k: v.copy() for k, v in self.arrays().items()}, dtype)


def _check_image_dims(h: int, w: int, p: int) -> None:
    if h % p or w % p:
        raise DimensionError(f"image {h}x{w} is not divisible by patch size {p}")


def patchify(image, patch_size: int) -> np.ndarray:
    """[C, H, W] (or [B, C, H, W]) -> [N, P*P*C] (or [B, N, P*P*C]), patches row-major."""
    arr = image.data if isinstance(image, Tensor) else np.asarray(image)
    batched = arr.ndim == 4
    if not batched:
        arr = arr[None]
    if arr.ndim != 4:
        raise DimensionError(f"patchify expects [C,H,W] or [B,C,H,W], got {arr.shape}")
    b, c, h, w = arr.shape
    p = patch_size
    _check_image_dims(h, w, p)
    gh, gw = h // p, w // p
    out = arr.reshape(b, c, gh, p, gw, p).transpose(0, 2, 4, 1, 3, 5).reshape(b, gh * gw, c * p * p)
    out = np.ascontiguousarray(out)
    return out if batched else out[0]


def unpatchify(patches: np.ndarray, patch_size: int, channels: int, height: int, width: int) -> np.ndarray:
    p = patch_size
    gh, gw = height // p, width // p
    arr = np.asarray(patches).reshape(gh, gw, channels, p, p).transpose(2, 0, 3, 1, 4)
    return arr.reshape(channels, height, width)


def embed_input(images, params: ModelParams, config: ViTSTRConfig) -> Tensor:
    """z0 = [cls; patches @ E + b] + pos, shape [B, N+1, D] (or [N+1, D] unbatched)."""
    arr = images.data if isinstance(images, Tensor) else np.asarray(images)
    batched = arr.ndim == 4
    if not batched:
        arr = arr[None]
    expected = (config.in_channels,) + config.image_size
    if arr.shape[1:] != expected:
        raise DimensionError(f"image shape {arr.shape[1:]} does not match config {expected}")
    b = arr.shape[0]
    patches = Tensor(patchify(arr, config.patch_size), dtype=params["patch_embed.weight"].dtype)
    x = nx.linear(patches, params["patch_embed.weight"], params["patch_embed.bias"])
    cls = nx.reshape(nx.repeat_leading(params["cls_token"], b), (b, 1, config.embed_dim))
    z = nx.add(nx.concat([cls, x], axis=1), params["pos_embed"])
    return z if batched else nx.reshape(z, z.shape[1:])


def _ensure_batch(z: Tensor) -> tuple[Tensor, bool]:
    if z.ndim == 2:
        return nx.reshape(z, (1,) + z.shape), True
    return z, False


def msa_forward(z: Tensor, block: dict[str, Tensor], num_heads: int, eps: float = 1e-6,
                attn_out: list | None = None) -> Tensor:
    """z + proj(MultiHeadAttention(LN(z))). Accepts [T, D] or [B, T, D]."""
    z, squeeze = _ensure_batch(z)
    b, t, d = z.shape
    if d % num_heads:
        raise ConfigError(f"embed_dim {d} is not divisible by num_heads {num_heads}")
    hd = d // num_heads
    h = nx.layer_norm(z, block["ln1.gamma"], block["ln1.beta"], eps)
    qkv = nx.linear(h, block["attn.qkv.weight"], block["attn.qkv.bias"])
    qkv = nx.transpose(nx.reshape(qkv, (b, t, 3, num_heads, hd)), (2, 0, 3, 1, 4))
    q, k, v = qkv[0], qkv[1], qkv[2]
    scores = nx.scale(nx.matmul(q, nx.transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(hd))
    weights = nx.softmax(scores, axis=-1)
    if attn_out is not None:
        attn_out.append(weights.data)
    ctx = nx.matmul(weights, v)
    ctx = nx.reshape(nx.transpose(ctx, (0, 2, 1, 3)), (b, t, d))
    out = nx.add(nx.linear(ctx, block["attn.proj.weight"], block["attn.proj.bias"]), z)
    return nx.reshape(out, (t, d)) if squeeze else out


def mlp_forward(z: Tensor, block: dict[str, Tensor], eps: float = 1e-6) -> Tensor:
    h = nx.layer_norm(z, block["ln2.gamma"], block["ln2.beta"], eps)
    h = nx.gelu(nx.linear(h, block["mlp.fc1.weight"], block["mlp.fc1.bias"]))
    h = nx.linear(h, block["mlp.fc2.weight"], block["mlp.fc2.bias"])
    return nx.add(h, z)


def block_forward(z: Tensor, block: dict[str, Tensor], num_heads: int, eps: float = 1e-6,
                  attn_out: list | None = None) -> Tensor:
    return mlp_forward(msa_forward(z, block, num_heads, eps, attn_out), block, eps)


def encode(images, params: ModelParams, config: ViTSTRConfig, attn_out: list | None = None) -> Tensor:
    """Encoder output after the final LayerNorm, [B, N+1, D]."""
    z = embed_input(images, params, config)
    z, _ = _ensure_batch(z)
    for i in range(config.depth):
        z = block_forward(z, params.block(i), config.num_heads, config.ln_eps, attn_out)
    return nx.layer_norm(z, params["norm.gamma"], params["norm.beta"], config.ln_eps)


def forward(images, params: ModelParams, config: ViTSTRConfig, attn_out: list | None = None) -> Tensor:
    """Logits [B, S, K]; output position 0 is the class-token ([GO]) position."""
    z = encode(images, params, config, attn_out)
    z = z[:, : config.seq_len, :]
    return nx.linear(z, params["head.weight"], params["head.bias"])


def _resize(arr: np.ndarray, height: int, width: int) -> np.ndarray:
    im = Image.fromarray(np.asarray(arr, dtype=np.float32))
    return np.asarray(im.resize((width, height), Image.BILINEAR), dtype=np.float64)


def attention_maps(image, params: ModelParams, config: ViTSTRConfig):
    """Raw attention [L, H, N+1, N+1] and per-output-position heatmaps [S, H_img, W_img].

    A heatmap is the head-averaged last-layer attention row of that output
    position over the patch tokens, upsampled bilinearly to the image and
    min-max scaled to [0, 1].
    """
    arr = image.data if isinstance(image, Tensor) else np.asarray(image)
    if arr.ndim == 3:
        arr = arr[None]
    if arr.shape[0] != 1:
        raise DimensionError(f"attention_maps takes a single image, got batch of {arr.shape[0]}")
    collected: list[np.ndarray] = []
    with nx.no_grad():
        logits = forward(arr, params, config, attn_out=collected)
    attn = np.stack([a[0] for a in collected])
    gh, gw = config.grid
    last = attn[-1].mean(axis=0)
    heatmaps = []
    for i in range(config.seq_len):
        grid = last[i, 1:].reshape(gh, gw)
        up = _resize(grid, *config.image_size)
        lo, hi = up.min(), up.max()
        heatmaps.append((up - lo) / (hi - lo) if hi > lo else np.zeros_like(up))
    return attn, np.stack(heatmaps), logits.data[0]
