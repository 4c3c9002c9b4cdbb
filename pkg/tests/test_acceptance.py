"""Numbered acceptance criteria; each test records one PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` and read the "acceptance criteria"
section of the terminal summary, or ``pytest -s`` to see lines inline.
"""

import math
import time

import numpy as np
import pytest

from conftest import finite_difference, max_relative_error
from vitstr import numerics as nx
from vitstr.augment import ALL_KINDS, AugKind, AugOp, RandAugmentPolicy, apply, rand_augment
from vitstr.cli import main
from vitstr.datagen import generate_corpus, render_word, sample_rng, save_dataset
from vitstr.evalbench import (
    CostReport,
    count_params,
    default_baselines_path,
    dominates,
    estimate_flops,
    load_baselines,
    pareto_frontier,
)
from vitstr.model import ModelParams, ViTSTRConfig, attention_maps, forward, variant_config
from vitstr.tokenizer import EOS_ID, GO_ID, build_default_vocab
from vitstr.train import (
    AdadeltaState,
    TrainConfig,
    adadelta_step,
    clip_global_norm,
    cross_entropy,
    init_model,
    train_loop,
)

PUBLISHED_PARAMS = {"tiny": 5.4e6, "small": 21.5e6, "base": 85.8e6}
PUBLISHED_FLOPS = {"tiny": 1.3e9, "small": 4.6e9, "base": 17.6e9}

MICRO_GRAD = ViTSTRConfig(patch_size=16, depth=2, embed_dim=32, num_heads=2, seq_len=4,
                          image_size=(32, 32), num_classes=5)
MICRO_OVERFIT = ViTSTRConfig(patch_size=16, depth=4, embed_dim=64, num_heads=4, seq_len=12,
                             image_size=(64, 64), num_classes=96)
OVERFIT_SEED = 0
OVERFIT_SAMPLES = 32
OVERFIT_STEPS = 3000


def _overfit_run(out_dir):
    vocab = build_default_vocab()
    samples = generate_corpus(OVERFIT_SAMPLES, vocab, seed=OVERFIT_SEED)
    save_dataset(samples, out_dir / "data")
    params = init_model(MICRO_OVERFIT, OVERFIT_SEED)
    cfg = TrainConfig(batch_size=32, steps=OVERFIT_STEPS, seed=OVERFIT_SEED, stop_at_accuracy=100.0)
    start = time.perf_counter()
    result = train_loop(params, vocab, samples, cfg, out_dir=out_dir / "run")
    return result, time.perf_counter() - start


@pytest.fixture(scope="module")
def overfit_first(tmp_path_factory):
    root = tmp_path_factory.mktemp("overfit_a")
    result, seconds = _overfit_run(root)
    return root, result, seconds


def test_criterion_01_parameter_count(acceptance):
    start = time.perf_counter()
    parts, ok = [], True
    for name, published in PUBLISHED_PARAMS.items():
        cfg = variant_config(name)
        n = count_params(cfg)
        inventory = ModelParams.allocate(cfg).numel()
        rel = (n - published) / published
        ok &= abs(rel) <= 0.02 and n == inventory
        parts.append(f"{name} {n:,} ({rel:+.2%}, inventory {'==' if n == inventory else '!='})")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1.0
    assert acceptance(1, "parameter count within 2%", ok, "; ".join(parts) + f"; {elapsed:.2f}s")


def test_criterion_02_flops(acceptance):
    start = time.perf_counter()
    parts, ok = [], True
    for name, published in PUBLISHED_FLOPS.items():
        f = estimate_flops(variant_config(name))
        rel = (f - published) / published
        ok &= abs(rel) <= 0.15
        parts.append(f"{name} {f / 1e9:.3f}e9 ({rel:+.1%})")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1.0
    assert acceptance(2, "MAC count within 15%", ok, "; ".join(parts) + f"; {elapsed:.2f}s")


def test_criterion_03_gradient_check(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    with nx.precision(64):
        base = ModelParams.allocate(MICRO_GRAD)
        arrays = {}
        for name, t in base.items():
            arr = rng.normal(scale=0.3, size=t.shape)
            arrays[name] = arr + 1.0 if name.endswith(".gamma") else arr
        params = ModelParams.from_arrays(MICRO_GRAD, arrays)
        images = rng.uniform(-1, 1, size=(2, 1, 32, 32))
        targets = rng.integers(0, 5, size=(2, 4))

        def loss():
            return cross_entropy(forward(images, params, MICRO_GRAD), targets)

        params.zero_grad()
        nx.backward(loss())

        def f():
            with nx.no_grad():
                return float(loss().data)

        worst, worst_name, checked = 0.0, "", 0
        pick = np.random.default_rng(0)
        for name, t in params.items():
            # every entry of small tensors; a fixed random subset plus the largest-gradient entries of big ones
            if t.size <= 128:
                idx = np.arange(t.size)
            else:
                top = np.argsort(np.abs(t.grad).ravel())[-16:]
                idx = np.union1d(pick.choice(t.size, size=112, replace=False), top)
            err = max_relative_error(t.grad, finite_difference(f, t.data, indices=idx))
            checked += len(idx)
            if err > worst:
                worst, worst_name = err, name
    elapsed = time.perf_counter() - start
    ok = worst < 1e-4 and elapsed < 300
    detail = (f"{len(list(params.items()))} groups, {checked} entries, max rel err {worst:.2e} "
              f"({worst_name}); {elapsed:.1f}s")
    assert acceptance(3, "finite-difference gradients", ok, detail)


@pytest.mark.slow
def test_criterion_04_overfit(acceptance, overfit_first):
    _, result, seconds = overfit_first
    initial = result.records[0].loss
    final = result.records[-1]
    init_rel = (initial - math.log(96)) / math.log(96)
    ok = final.train_acc == 100.0 and final.step <= OVERFIT_STEPS and abs(init_rel) <= 0.15 and seconds < 1200
    detail = (f"initial loss {initial:.4f} vs ln96 {math.log(96):.4f} ({init_rel:+.1%}); "
              f"100% accuracy at step {final.step} (final loss {final.loss:.4f}); {seconds:.1f}s")
    assert acceptance(4, "32-sample overfit", ok, detail)


def test_criterion_05_shapes_and_protocol(acceptance):
    start = time.perf_counter()
    cfg = variant_config("tiny")
    params = init_model(cfg, 0)
    with nx.no_grad():
        shape = forward(np.zeros((2, 1, 224, 224), dtype=np.float32), params, cfg).shape
    vocab = build_default_vocab()
    rng = np.random.default_rng(5)
    roundtrip_fail = protocol_fail = 0
    for _ in range(10_000):
        n = int(rng.integers(0, 26))
        text = "".join(vocab.chars[i] for i in rng.integers(0, len(vocab.chars), size=n))
        ids = vocab.encode(text, 27)
        if ids[0] != GO_ID or not (ids[n + 1 :] == EOS_ID).all():
            protocol_fail += 1
        if vocab.decode_ids(ids) != text:
            roundtrip_fail += 1
    elapsed = time.perf_counter() - start
    ok = shape == (2, 27, 96) and roundtrip_fail == 0 and protocol_fail == 0 and elapsed < 60
    detail = (f"tiny logits {shape}; 10000 strings, {roundtrip_fail} roundtrip and {protocol_fail} "
              f"framing failures; {elapsed:.1f}s")
    assert acceptance(5, "shapes and token protocol", ok, detail)


@pytest.mark.slow
def test_criterion_06_attention(acceptance, overfit_first, tmp_path, capsys):
    start = time.perf_counter()
    cfg = variant_config("tiny")
    image = np.random.default_rng(6).uniform(-1, 1, size=(1, 224, 224)).astype(np.float32)
    attn, _, _ = attention_maps(image, init_model(cfg, 0), cfg)
    row_err = float(np.abs(attn.sum(axis=-1) - 1.0).max())

    root, result, _ = overfit_first
    sample = root / "data" / "train" / "000000.pgm"
    code = main(["-q", "attention-map", "--checkpoint", str(root / "run" / "final.ckpt"),
                 "--image", str(sample), "--out", str(tmp_path / "att")])
    capsys.readouterr()
    files = sorted((tmp_path / "att").glob("000000_pos*.pgm"))
    well_formed = 0
    for path in files:
        raw = path.read_bytes()
        header = raw.split(maxsplit=4)
        if header[0] == b"P5" and int(header[3]) == 255:
            w, h = int(header[1]), int(header[2])
            well_formed += (h, w) == MICRO_OVERFIT.image_size and len(header[4]) == w * h
    elapsed = time.perf_counter() - start
    ok = (row_err <= 1e-5 and attn.shape == (12, 3, 197, 197) and code == 0
          and len(files) == MICRO_OVERFIT.seq_len == well_formed and elapsed < 60)
    detail = (f"tiny {attn.shape} max |row sum - 1| {row_err:.1e}; {well_formed}/{MICRO_OVERFIT.seq_len} "
              f"heatmap PGMs well formed; {elapsed:.1f}s")
    assert acceptance(6, "attention rows and heatmap export", ok, detail)


def test_criterion_07_augmentation(acceptance):
    start = time.perf_counter()
    words = [render_word(label, 32, sample_rng(7, i)) for i, label in enumerate(["STOP", "ab1", "Quartz!"])]
    failures = []
    for word in words:
        for kind in ALL_KINDS:
            for magnitude in (0.0, 0.25, 0.5, 0.75, 1.0):
                out = apply(AugOp(kind, magnitude), word, np.random.default_rng(1))
                if out.shape != word.shape or out.pixels.dtype != np.uint8 or out.label != word.label:
                    failures.append(f"{kind.value}@{magnitude} dims")
            if kind is not AugKind.INVERT:
                if not np.array_equal(apply(AugOp(kind, 0.0), word, np.random.default_rng(2)).pixels, word.pixels):
                    failures.append(f"{kind.value}@0 not identity")
        inv = AugOp(AugKind.INVERT)
        twice = apply(inv, apply(inv, word, None), None)
        if not np.array_equal(twice.pixels, word.pixels):
            failures.append("invert twice")

    policy = RandAugmentPolicy(num_ops=2)
    runs = []
    for _ in range(2):
        digests = []
        for i in range(1000):
            rng = sample_rng(70, i)
            word = words[i % len(words)]
            out = rand_augment(policy, word, rng)
            if out.shape != word.shape:
                failures.append(f"draw {i} dims")
            digests.append(out.pixels.tobytes())
        runs.append(digests)
    if runs[0] != runs[1]:
        failures.append("1000-draw replay differs")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120
    detail = f"9 ops x 5 magnitudes x 3 images, 2x1000 policy draws; failures {failures[:3] or 'none'}; {elapsed:.1f}s"
    assert acceptance(7, "augmentation suite", ok, detail)


class _One:
    def __init__(self, value):
        with nx.precision(64):
            self.x = nx.Tensor(np.array([value], dtype=np.float64))

    def items(self):
        return [("x", self.x)]


def test_criterion_08_optimizer(acceptance):
    start = time.perf_counter()
    p = _One(1.0)
    adadelta_step(p, {"x": np.array([1.0])}, AdadeltaState({"x": np.zeros(1)}, {"x": np.zeros(1)}),
                  lr=1.0, rho=0.95, eps=1e-8)
    delta = p.x.data[0] - 1.0
    hand_ok = abs(delta - (-4.4721e-4)) < 1e-8 and abs(delta + math.sqrt(1e-8 / (0.05 + 1e-8))) < 1e-15

    a, _ = clip_global_norm({"g": np.array([3.0, 4.0])}, 5.0)
    b, _ = clip_global_norm({"g": np.array([6.0, 8.0])}, 5.0)
    clip_ok = a["g"].tolist() == [3.0, 4.0] and b["g"].tolist() == [3.0, 4.0]

    params = init_model(MICRO_GRAD, 1)
    before = {k: t.data.tobytes() for k, t in params.items()}
    state = AdadeltaState.zeros(params)
    adadelta_step(params, {k: np.zeros_like(t.data) for k, t in params.items()}, state)
    zero_ok = all(t.data.tobytes() == before[k] for k, t in params.items())
    elapsed = time.perf_counter() - start
    ok = hand_ok and clip_ok and zero_ok and elapsed < 1.0
    detail = (f"delta {delta:.7e} (|err| {abs(delta + 4.4721e-4):.1e}); clipping {'exact' if clip_ok else 'WRONG'}; "
              f"zero-grad {'identity' if zero_ok else 'CHANGED'}; {elapsed:.2f}s")
    assert acceptance(8, "Adadelta and clipping", ok, detail)


def _brute(points, axis):
    return {id(p) for p in points if not any(dominates(q, p, axis) for q in points if q is not p)}


def test_criterion_09_frontier(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(9)
    mismatches = 0
    for _ in range(100):
        n = int(rng.integers(0, 101))
        pts = [CostReport(f"p{i}", float(rng.integers(0, 30)), float(rng.integers(0, 30)),
                          int(rng.integers(0, 30)), int(rng.integers(0, 30))) for i in range(n)]
        for axis in ("params", "msec", "flops"):
            mismatches += {id(p) for p in pareto_frontier(pts, axis)} != _brute(pts, axis)

    rows = load_baselines(default_baselines_path())
    baselines = [r for r in rows if not r.name.startswith("ViTSTR")]
    ours = [r for r in rows if r.name.startswith("ViTSTR")]
    claim = {}
    for row in ours:
        # each ViTSTR row competes with the baselines and its own training recipe
        peers = [r for r in ours if r.name.endswith("+Aug") == row.name.endswith("+Aug")]
        population = baselines + peers
        claim[row.name] = [axis for axis in ("params", "msec", "flops")
                           if row in pareto_frontier(population, axis)]
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and all(claim.values()) and elapsed < 10
    summary = ", ".join(f"{k.replace('ViTSTR-', '')}:{'/'.join(v) or '-'}" for k, v in claim.items())
    detail = f"{mismatches} disagreements over 100 sets x 3 axes; non-dominated axes {summary}; {elapsed:.1f}s"
    assert acceptance(9, "Pareto frontier", ok, detail)


@pytest.mark.slow
def test_criterion_10_determinism(acceptance, overfit_first, tmp_path_factory):
    root_a, _, _ = overfit_first
    root_b = tmp_path_factory.mktemp("overfit_b")
    _overfit_run(root_b)
    a = (root_a / "run" / "metrics.tsv").read_bytes()
    b = (root_b / "run" / "metrics.tsv").read_bytes()
    ck_same = (root_a / "run" / "final.ckpt").read_bytes() == (root_b / "run" / "final.ckpt").read_bytes()
    ok = a == b and len(a) > 0
    records = len(a.splitlines()) - 1
    detail = (f"metrics logs {'identical' if a == b else 'DIFFER'} ({records} records); "
              f"final checkpoints {'identical' if ck_same else 'differ'}")
    assert acceptance(10, "same-seed reruns", ok, detail)


@pytest.mark.slow
def test_eval_matches_overfit_final_record(overfit_first, capsys):
    root, result, _ = overfit_first
    code = main(["-q", "eval", "--checkpoint", str(root / "run" / "final.ckpt"),
                 "--data", str(root / "data" / "train.tsv")])
    out = capsys.readouterr().out.strip().splitlines()
    assert code == 0
    assert out[1].split("\t") == ["train", "32", f"{result.records[-1].train_acc:.2f}"]
