import numpy as np
import pytest

from vitstr._font import GLYPHS
from vitstr.datagen import (
    DatasetError,
    WordImage,
    generate_corpus,
    glyph_bitmap,
    load_dataset,
    preprocess,
    preprocess_batch,
    random_label,
    read_pgm,
    render_word,
    sample_rng,
    save_dataset,
    write_pgm,
)
from vitstr.model import ViTSTRConfig, variant_config
from vitstr.numerics import ContractError
from vitstr.tokenizer import VocabularyError, build_default_vocab

TEMPLATES = {ch: glyph_bitmap(ch) for ch in GLYPHS}
_CHARS = sorted(TEMPLATES)
_STACK = np.stack([TEMPLATES[c] for c in _CHARS])


def template_decode(pixels, n_chars):
    """Recover a clean render's label knowing only its length.

    Searches every glyph scale and placement consistent with the image size,
    binarizes against the two intensities present, and matches each glyph cell
    against the font by Hamming distance. Returns the best-scoring text.
    """
    h, w = pixels.shape
    values = np.unique(pixels)
    if len(values) == 1:
        return None
    # background occupies the border column
    bg = int(np.bincount(pixels[:, 0]).argmax())
    ink = pixels != bg
    best = (None, np.inf)
    for s in range(1, h // 8 + 1):
        cell = 8 * s
        x0, rem = divmod(w - n_chars * cell, 2)
        if rem or x0 < 0:
            continue
        for y0 in range(0, h - cell + 1):
            text, cost = [], 0
            for i in range(n_chars):
                block = ink[y0 : y0 + cell, x0 + i * cell : x0 + (i + 1) * cell]
                small = block[::s, ::s]
                scores = (_STACK != small).sum(axis=(1, 2))
                j = int(scores.argmin())
                text.append(_CHARS[j])
                cost += int(scores[j])
            # the rest of the image must be background
            outside = ink.sum() - ink[y0 : y0 + cell, x0 : x0 + n_chars * cell].sum()
            cost += int(outside)
            if cost < best[1]:
                best = ("".join(text), cost)
    return best[0]


def test_glyphs_are_distinct():
    keys = sorted(TEMPLATES)
    assert len(keys) == 94
    flat = {TEMPLATES[k].tobytes() for k in keys}
    assert len(flat) == 94


def test_render_determinism():
    a = render_word("Hello", 32, sample_rng(7, 0))
    b = render_word("Hello", 32, sample_rng(7, 0))
    assert a == b
    assert a.pixels.tobytes() == b.pixels.tobytes()


def test_render_single_char_contract():
    img = render_word("A", 32, sample_rng(0, 0))
    assert img.shape[0] == 32
    assert img.shape[1] >= 8
    assert img.label == "A"


def test_render_width_grows_with_label():
    short = render_word("ab", 32, sample_rng(3, 1), clean=True)
    long = render_word("abcdefgh", 32, sample_rng(3, 1), clean=True)
    assert long.shape[1] > short.shape[1]


def test_render_rejects_unknown_glyph():
    with pytest.raises(VocabularyError):
        render_word("a b", 32, sample_rng(0, 0))
    with pytest.raises(ContractError):
        render_word("ab", 12, sample_rng(0, 0))


def test_template_oracle_recovers_clean_renders():
    vocab = build_default_vocab()
    failures = []
    for i in range(200):
        rng = sample_rng(99, i)
        label = random_label(vocab, rng, 1, 10)
        img = render_word(label, 32, rng, clean=True)
        if template_decode(img.pixels, len(label)) != label:
            failures.append(label)
    assert failures == []


def test_corpus_is_reproducible_and_prefix_stable():
    vocab = build_default_vocab()
    a = generate_corpus(6, vocab, seed=5)
    b = generate_corpus(9, vocab, seed=5)
    assert a == b[:6]
    assert generate_corpus(6, vocab, seed=6) != a
    assert all(3 <= len(s.label) <= 10 for s in a)


def test_save_load_roundtrip(tmp_path):
    samples = generate_corpus(5, build_default_vocab(), seed=1)
    manifest = save_dataset(samples, tmp_path)
    ds = load_dataset(manifest, build_default_vocab(), 25)
    assert ds.labels == [s.label for s in samples]
    for s, t in zip(samples, ds.samples):
        assert s.pixels.tobytes() == t.pixels.tobytes()
    assert ds.manifest.records[0][0] == "train/000000.pgm"


def test_pgm_is_binary_p5(tmp_path):
    write_pgm(tmp_path / "x.pgm", np.arange(12, dtype=np.uint8).reshape(3, 4))
    raw = (tmp_path / "x.pgm").read_bytes()
    assert raw.startswith(b"P5")
    assert read_pgm(tmp_path / "x.pgm").tolist() == np.arange(12).reshape(3, 4).tolist()


def test_manifest_with_three_fields_names_line(tmp_path):
    samples = generate_corpus(2, build_default_vocab(), seed=1)
    manifest = save_dataset(samples, tmp_path)
    lines = manifest.read_text().splitlines()
    lines.append("train/000000.pgm\tabc\textra")
    manifest.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match=r"train\.tsv:3:"):
        load_dataset(manifest)


def test_manifest_missing_image_and_bad_label(tmp_path):
    samples = generate_corpus(1, build_default_vocab(), seed=1)
    manifest = save_dataset(samples, tmp_path)
    manifest.write_text("train/000000.pgm\tok\ntrain/000009.pgm\tok\n")
    with pytest.raises(DatasetError, match=r":2: missing image"):
        load_dataset(manifest)
    manifest.write_text("train/000000.pgm\tné\n")
    with pytest.raises(DatasetError, match=r":1:"):
        load_dataset(manifest, build_default_vocab())


def test_empty_manifest_is_empty_dataset(tmp_path):
    (tmp_path / "train.tsv").write_text("")
    assert len(load_dataset(tmp_path / "train.tsv")) == 0


def test_preprocess_examples():
    cfg = variant_config("tiny")
    out = preprocess(np.full((32, 100), 127, dtype=np.uint8), cfg)
    assert out.shape == (1, 224, 224)
    np.testing.assert_allclose(out.data, 127 / 127.5 - 1, atol=1e-6)
    assert out.data[0, 0, 0] == pytest.approx(-0.0039, abs=1e-4)
    np.testing.assert_array_equal(preprocess(np.full((32, 100), 255, dtype=np.uint8), cfg).data, 1.0)


def test_preprocess_range_and_batch():
    cfg = ViTSTRConfig(image_size=(64, 64), seq_len=12, embed_dim=64, num_heads=4, depth=1)
    samples = generate_corpus(4, build_default_vocab(), seed=2)
    batch = preprocess_batch(samples, cfg).data
    assert batch.shape == (4, 1, 64, 64)
    assert batch.min() >= -1 and batch.max() <= 1


def test_preprocess_zero_area():
    with pytest.raises(ContractError):
        preprocess(np.zeros((0, 5), dtype=np.uint8), variant_config("tiny"))


def test_word_image_contract():
    with pytest.raises(ContractError):
        WordImage(np.zeros((4, 4), dtype=np.float32), "a")
