"""Label-preserving word-image transforms and a RandAugment-style policy.

Geometric transforms are inverse warps: for every output pixel a source
coordinate is computed and sampled bilinearly with edge replication. Every
transform except ``Invert`` is the identity at magnitude 0.
"""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np
from scipy import ndimage

from .datagen import WordImage
from .numerics import ContractError


class AugKind(enum.Enum):
    INVERT = "Invert"
    CURVE = "Curve"
    BLUR = "Blur"
    NOISE = "Noise"
    DISTORT = "Distort"
    ROTATE = "Rotate"
    STRETCH_COMPRESS = "StretchCompress"
    PERSPECTIVE = "Perspective"
    SHRINK = "Shrink"


ALL_KINDS = tuple(AugKind)

# magnitude 1.0 limits
MAX_ROTATE_DEG = 15.0
MAX_CURVE_FRAC = 0.25
MAX_BLUR_SIGMA = 2.5
MAX_NOISE_SIGMA = 25.0
MAX_PERSPECTIVE_FRAC = 0.15
MIN_SHRINK_SCALE = 0.70
MAX_STRETCH_DELTA = 0.4
MAX_DISTORT_FRAC = 0.10
DISTORT_GRID = (2, 4)  # rows, cols of cells


@dataclasses.dataclass(frozen=True)
class AugOp:
    kind: AugKind
    magnitude: float = 0.0

    def __post_init__(self):
        if not isinstance(self.kind, AugKind):
            try:
                object.__setattr__(self, "kind", AugKind(self.kind))
            except ValueError:
                raise ContractError(f"unknown augmentation kind {self.kind!r}") from None
        if not 0.0 <= self.magnitude <= 1.0:
            raise ContractError(f"magnitude must lie in [0, 1], got {self.magnitude}")


@dataclasses.dataclass(frozen=True)
class RandAugmentPolicy:
    num_ops: int = 2
    magnitude_max: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.num_ops <= len(ALL_KINDS):
            raise ContractError(f"num_ops must lie in [0, {len(ALL_KINDS)}], got {self.num_ops}")
        if not 0.0 < self.magnitude_max <= 1.0:
            raise ContractError(f"magnitude_max must lie in (0, 1], got {self.magnitude_max}")


def _to_uint8(arr: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)


def _grid(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:h, 0:w]
    return ys.astype(np.float64), xs.astype(np.float64)


def _sample(pixels: np.ndarray, src_y: np.ndarray, src_x: np.ndarray) -> np.ndarray:
    out = ndimage.map_coordinates(pixels.astype(np.float64), [src_y, src_x], order=1, mode="nearest")
    return _to_uint8(out)


def _sign(rng: np.random.Generator) -> float:
    return 1.0 if rng.random() < 0.5 else -1.0


def invert(pixels, magnitude, rng):
    return (255 - pixels).astype(np.uint8)


def curve(pixels, magnitude, rng):
    h, w = pixels.shape
    ys, xs = _grid(h, w)
    amplitude = _sign(rng) * magnitude * MAX_CURVE_FRAC * h
    t = 2.0 * xs / max(w - 1, 1) - 1.0
    return _sample(pixels, ys - amplitude * (1.0 - t * t), xs)


def blur(pixels, magnitude, rng):
    sigma = magnitude * MAX_BLUR_SIGMA
    if sigma == 0.0:
        return pixels.copy()
    return _to_uint8(ndimage.gaussian_filter(pixels.astype(np.float64), sigma, mode="nearest"))


def noise(pixels, magnitude, rng):
    sigma = magnitude * MAX_NOISE_SIGMA
    return _to_uint8(pixels + rng.normal(0.0, 1.0, size=pixels.shape) * sigma)


def distort(pixels, magnitude, rng):
    h, w = pixels.shape
    rows, cols = DISTORT_GRID
    cell_h, cell_w = h / rows, w / cols
    jitter = rng.uniform(-1.0, 1.0, size=(2, rows + 1, cols + 1)) * magnitude * MAX_DISTORT_FRAC
    jitter[0] *= cell_h
    jitter[1] *= cell_w
    ys, xs = _grid(h, w)
    gy = ys * rows / max(h - 1, 1)
    gx = xs * cols / max(w - 1, 1)
    dy = ndimage.map_coordinates(jitter[0], [gy, gx], order=1, mode="nearest")
    dx = ndimage.map_coordinates(jitter[1], [gy, gx], order=1, mode="nearest")
    return _sample(pixels, ys + dy, xs + dx)


def rotate(pixels, magnitude, rng):
    h, w = pixels.shape
    theta = math.radians(_sign(rng) * magnitude * MAX_ROTATE_DEG)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ys, xs = _grid(h, w)
    c, s = math.cos(theta), math.sin(theta)
    src_x = c * (xs - cx) + s * (ys - cy) + cx
    src_y = -s * (xs - cx) + c * (ys - cy) + cy
    return _sample(pixels, src_y, src_x)


def stretch_compress(pixels, magnitude, rng):
    h, w = pixels.shape
    factor = 1.0 + _sign(rng) * magnitude * MAX_STRETCH_DELTA
    cx = (w - 1) / 2.0
    ys, xs = _grid(h, w)
    return _sample(pixels, ys, (xs - cx) / factor + cx)


def _homography(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """3x3 matrix mapping each ``src`` corner onto ``dst`` (points as (x, y))."""
    a, b = [], []
    for (x, y), (u, v) in zip(src, dst):
        a.append([x, y, 1, 0, 0, 0, -u * x, -u * y])
        a.append([0, 0, 0, x, y, 1, -v * x, -v * y])
        b.extend([u, v])
    coeffs = np.linalg.solve(np.array(a, dtype=np.float64), np.array(b, dtype=np.float64))
    return np.append(coeffs, 1.0).reshape(3, 3)


def perspective(pixels, magnitude, rng):
    h, w = pixels.shape
    corners = np.array([[0, 0], [w - 1, 0], [w - 1, h - 1], [0, h - 1]], dtype=np.float64)
    shift = rng.uniform(-1.0, 1.0, size=(4, 2)) * magnitude * MAX_PERSPECTIVE_FRAC
    shift[:, 0] *= w
    shift[:, 1] *= h
    # output corners come from shifted source corners
    m = _homography(corners, corners + shift)
    ys, xs = _grid(h, w)
    den = m[2, 0] * xs + m[2, 1] * ys + m[2, 2]
    src_x = (m[0, 0] * xs + m[0, 1] * ys + m[0, 2]) / den
    src_y = (m[1, 0] * xs + m[1, 1] * ys + m[1, 2]) / den
    return _sample(pixels, src_y, src_x)


def shrink(pixels, magnitude, rng):
    h, w = pixels.shape
    factor = 1.0 - magnitude * (1.0 - MIN_SHRINK_SCALE)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ys, xs = _grid(h, w)
    return _sample(pixels, (ys - cy) / factor + cy, (xs - cx) / factor + cx)


_IMPLS = {
    AugKind.INVERT: invert,
    AugKind.CURVE: curve,
    AugKind.BLUR: blur,
    AugKind.NOISE: noise,
    AugKind.DISTORT: distort,
    AugKind.ROTATE: rotate,
    AugKind.STRETCH_COMPRESS: stretch_compress,
    AugKind.PERSPECTIVE: perspective,
    AugKind.SHRINK: shrink,
}


def apply_pixels(op: AugOp, pixels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    impl = _IMPLS.get(op.kind)
    if impl is None:
        raise ContractError(f"unknown augmentation kind {op.kind!r}")
    out = impl(np.asarray(pixels, dtype=np.uint8), float(op.magnitude), rng)
    assert out.shape == pixels.shape and out.dtype == np.uint8
    return out


def apply(op: AugOp, image: WordImage, rng: np.random.Generator) -> WordImage:
    """Transform the pixels of ``image``; the label is carried over untouched."""
    return WordImage(apply_pixels(op, image.pixels, rng), image.label)


def sample_ops(policy: RandAugmentPolicy, rng: np.random.Generator) -> list[AugOp]:
    """``num_ops`` distinct kinds, each with magnitude uniform in (0, magnitude_max]."""
    picks = rng.choice(len(ALL_KINDS), size=policy.num_ops, replace=False)
    return [AugOp(ALL_KINDS[i], policy.magnitude_max * (1.0 - rng.random())) for i in picks]


def rand_augment(policy: RandAugmentPolicy, image: WordImage, rng: np.random.Generator | None = None) -> WordImage:
    rng = np.random.default_rng(policy.rng_seed) if rng is None else rng
    for op in sample_ops(policy, rng):
        image = apply(op, image, rng)
    return image
