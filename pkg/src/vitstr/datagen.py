"""Synthetic word images, dataset persistence and model preprocessing."""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from ._font import GLYPHS
from .numerics import ContractError, Tensor
from .tokenizer import Vocabulary, VocabularyError

GLYPH_SIZE = 8


class DatasetError(ValueError):
    pass


@dataclasses.dataclass(frozen=True, eq=False)
class WordImage:
    pixels: np.ndarray  # uint8 [H, W]
    label: str

    def __post_init__(self):
        if self.pixels.dtype != np.uint8 or self.pixels.ndim != 2:
            raise ContractError(f"WordImage pixels must be 2-D uint8, got {self.pixels.dtype} {self.pixels.shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, WordImage)
            and self.label == other.label
            and np.array_equal(self.pixels, other.pixels)
        )


def glyph_bitmap(ch: str) -> np.ndarray:
    try:
        rows = GLYPHS[ch]
    except KeyError:
        raise VocabularyError(f"no glyph for character {ch!r}") from None
    bits = np.unpackbits(np.array(rows, dtype=np.uint8)[:, None], axis=1)
    return bits.astype(bool)


@dataclasses.dataclass(frozen=True)
class Layout:
    """Geometry and intensities chosen for one render."""

    scale: int
    x0: int
    y0: int
    width: int
    height: int
    foreground: int
    background: int
    noise_sigma: float


def layout_word(label: str, height: int, rng: np.random.Generator) -> Layout:
    """Draw the random render parameters for ``label`` from ``rng``."""
    if height < 16:
        raise ContractError(f"render height must be at least 16, got {height}")
    if not label:
        raise ContractError("cannot render an empty label")
    for ch in label:
        glyph_bitmap(ch)
    max_scale = max(1, (height - 2) // GLYPH_SIZE)
    min_scale = 2 if max_scale >= 2 else 1
    scale = int(rng.integers(min_scale, max_scale + 1))
    glyph = GLYPH_SIZE * scale
    x0 = int(rng.integers(2, 7))
    y0 = int(rng.integers(0, height - glyph + 1))
    width = 2 * x0 + len(label) * glyph
    background = int(rng.integers(0, 256))
    contrast = int(rng.integers(100, 200))
    foreground = background - contrast if background >= 128 else background + contrast
    foreground = int(np.clip(foreground, 0, 255))
    noise_sigma = float(rng.uniform(2.0, 14.0))
    return Layout(scale, x0, y0, width, height, foreground, background, noise_sigma)


def render_word(label: str, height: int, rng: np.random.Generator, clean: bool = False) -> WordImage:
    """Render ``label`` with the embedded 8x8 font on a noise-textured background.

    ``clean`` skips the texture so that every pixel is exactly foreground or
    background.
    """
    lay = layout_word(label, height, rng)
    mask = np.zeros((lay.height, lay.width), dtype=bool)
    s = lay.scale
    for i, ch in enumerate(label):
        g = np.kron(glyph_bitmap(ch), np.ones((s, s), dtype=bool))
        x = lay.x0 + i * GLYPH_SIZE * s
        mask[lay.y0 : lay.y0 + g.shape[0], x : x + g.shape[1]] = g
    canvas = np.where(mask, lay.foreground, lay.background).astype(np.float64)
    if not clean:
        texture = rng.normal(0.0, lay.noise_sigma, size=canvas.shape)
        # coarse blotches plus per-pixel grain
        coarse = rng.normal(0.0, lay.noise_sigma, size=(max(1, lay.height // 8), max(1, lay.width // 8)))
        coarse = np.asarray(
            Image.fromarray(coarse.astype(np.float32)).resize((lay.width, lay.height), Image.BILINEAR)
        )
        canvas = canvas + texture + coarse
    pixels = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)
    return WordImage(pixels, label)


def random_label(vocab: Vocabulary, rng: np.random.Generator, min_len: int, max_len: int) -> str:
    n = int(rng.integers(min_len, max_len + 1))
    idx = rng.integers(0, len(vocab.chars), size=n)
    return "".join(vocab.chars[i] for i in idx)


def sample_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent stream for ``key`` under ``seed`` (counter-based split)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def generate_corpus(
    count: int,
    vocab: Vocabulary,
    seed: int,
    min_len: int = 3,
    max_len: int = 10,
    height: int = 32,
    clean: bool = False,
) -> list[WordImage]:
    """``count`` samples; sample ``i`` depends only on ``(seed, i)``."""
    if min_len < 1 or max_len < min_len:
        raise ContractError(f"invalid label length range [{min_len}, {max_len}]")
    out = []
    for i in range(count):
        rng = sample_rng(seed, i)
        label = random_label(vocab, rng, min_len, max_len)
        out.append(render_word(label, height, rng, clean=clean))
    return out


def write_pgm(path: str | Path, pixels: np.ndarray) -> None:
    arr = np.asarray(pixels)
    if arr.dtype != np.uint8 or arr.ndim != 2:
        raise ContractError(f"PGM export needs 2-D uint8, got {arr.dtype} {arr.shape}")
    Image.fromarray(arr).save(str(path), format="PPM")


def read_pgm(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        if im.format != "PPM" or im.mode != "L":
            raise DatasetError(f"{path}: not an 8-bit grayscale PGM")
        return np.array(im, dtype=np.uint8)


@dataclasses.dataclass
class DatasetManifest:
    root: Path
    records: list[tuple[str, str]]
    split: str
    line_numbers: list[int] = dataclasses.field(default_factory=list)


@dataclasses.dataclass
class Dataset:
    manifest: DatasetManifest
    samples: list[WordImage]

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.samples]


def save_dataset(samples: Sequence[WordImage], root: str | Path, split: str = "train") -> Path:
    """Write ``<root>/<split>/NNNNNN.pgm`` and ``<root>/<split>.tsv``; returns the manifest path."""
    root = Path(root)
    (root / split).mkdir(parents=True, exist_ok=True)
    lines = []
    for i, s in enumerate(samples):
        if "\t" in s.label or "\n" in s.label:
            raise DatasetError(f"label {s.label!r} cannot be stored in a TSV manifest")
        rel = f"{split}/{i:06d}.pgm"
        write_pgm(root / rel, s.pixels)
        lines.append(f"{rel}\t{s.label}\n")
    manifest = root / f"{split}.tsv"
    manifest.write_text("".join(lines), encoding="utf-8")
    return manifest


def read_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DatasetError(f"manifest not found: {path}") from None
    records, numbers = [], []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if line == "":
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise DatasetError(f"{path}:{lineno}: expected 2 tab-separated fields, got {len(fields)}")
        records.append((fields[0], fields[1]))
        numbers.append(lineno)
    return DatasetManifest(path.parent, records, path.stem, numbers)


def load_dataset(path: str | Path, vocab: Vocabulary | None = None, max_len: int | None = None) -> Dataset:
    """Read and validate a manifest and every image it references."""
    manifest = read_manifest(path)
    samples = []
    for lineno, (rel, label) in zip(manifest.line_numbers, manifest.records):
        where = f"{path}:{lineno}"
        if not label:
            raise DatasetError(f"{where}: empty label")
        if vocab is not None:
            try:
                vocab.validate(label, max_len)
            except ValueError as exc:
                raise DatasetError(f"{where}: {exc}") from None
        img_path = manifest.root / rel
        if not img_path.is_file():
            raise DatasetError(f"{where}: missing image {rel}")
        samples.append(WordImage(read_pgm(img_path), label))
    return Dataset(manifest, samples)


def resize_bilinear(pixels: np.ndarray, height: int, width: int) -> np.ndarray:
    im = Image.fromarray(np.asarray(pixels, dtype=np.float32))
    return np.asarray(im.resize((width, height), Image.BILINEAR), dtype=np.float32)


def preprocess_array(image: WordImage | np.ndarray, config) -> np.ndarray:
    pixels = image.pixels if isinstance(image, WordImage) else np.asarray(image)
    if pixels.size == 0:
        raise ContractError(f"cannot preprocess a zero-area image {pixels.shape}")
    h, w = config.image_size
    resized = resize_bilinear(pixels, h, w) / 127.5 - 1.0
    resized = np.clip(resized, -1.0, 1.0)
    return np.repeat(resized[None], config.in_channels, axis=0)


def preprocess(image: WordImage | np.ndarray, config) -> Tensor:
    """Bilinear resize to ``config.image_size`` and map [0, 255] to [-1, 1]; [C, H, W]."""
    return Tensor(preprocess_array(image, config))


def preprocess_batch(images: Sequence[WordImage], config) -> Tensor:
    return Tensor(np.stack([preprocess_array(im, config) for im in images]))
