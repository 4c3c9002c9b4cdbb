"""``vitstr`` command line entry point."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from contextlib import nullcontext
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from . import numerics as nx
from .augment import ALL_KINDS, AugOp, apply
from .config import ConfigError, RunConfig, load_run_config
from .datagen import (
    DatasetError,
    WordImage,
    generate_corpus,
    load_dataset,
    preprocess_array,
    read_pgm,
    render_word,
    sample_rng,
    save_dataset,
    write_pgm,
)
from .evalbench import (
    AXES,
    FLOPS_FORMULA,
    CostReport,
    benchmark_latency,
    count_params,
    default_baselines_path,
    estimate_flops,
    frontier_points,
    load_baselines,
    write_gnuplot_dat,
    write_report_tsv,
)
from .model import attention_maps, forward
from .numerics import ContractError, NumericError
from .tokenizer import EOS, GO, LengthError, Vocabulary, VocabularyError, build_default_vocab
from .train import (
    CheckpointError,
    TrainingError,
    evaluate,
    init_model,
    load_checkpoint,
    train_loop,
)

log = logging.getLogger("vitstr")

EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error\tusage\t{message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _write_meta(out: Path, command: str, argv, config: dict, seed: int | None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "config": config,
        "version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "threads": os.environ.get("VITSTR_THREADS"),
    }
    (out / "run.meta").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _log_resolved(command: str, config: dict, seed) -> None:
    log.info("%s resolved config %s seed=%s", command, json.dumps(config, sort_keys=True), seed)


def _symbol_tag(symbol: str) -> str:
    """Filesystem-safe name for one output symbol."""
    if symbol == GO:
        return "GO"
    if symbol == EOS:
        return "s"
    if symbol.isalnum():
        return symbol
    return f"u{ord(symbol):04x}"


def cmd_generate_data(args, argv) -> int:
    vocab = Vocabulary.load(args.charset) if args.charset else build_default_vocab()
    settings = {"count": args.count, "seed": args.seed, "min_len": args.min_len, "max_len": args.max_len,
                "height": args.height, "split": args.split, "clean": args.clean,
                "charset": args.charset}
    _log_resolved("generate-data", settings, args.seed)
    samples = generate_corpus(args.count, vocab, args.seed, args.min_len, args.max_len, args.height, args.clean)
    out = Path(args.out)
    manifest = save_dataset(samples, out, args.split)
    vocab.save(out / "vocab.txt")
    _write_meta(out, "generate-data", argv, settings, args.seed)
    print(manifest)
    return 0


def _run_config(args) -> RunConfig:
    overrides = {
        "train.seed": getattr(args, "seed", None),
        "train.steps": getattr(args, "steps", None),
        "train.batch_size": getattr(args, "batch_size", None),
        "model.variant": getattr(args, "variant", None),
    }
    return load_run_config(getattr(args, "config", None), overrides)


def cmd_train(args, argv) -> int:
    run = _run_config(args)
    vocab = run.vocab()
    config = run.model_config(len(vocab))
    tcfg = run.train_config()
    resolved = {**run.to_dict(), "model_config": config.to_dict()}
    _log_resolved("train", resolved, run.seed)
    out = Path(args.out)
    _write_meta(out, "train", argv, resolved, run.seed)
    data = load_dataset(args.data, vocab, config.max_text_len)
    with nx.precision(run.precision):
        if args.resume:
            ckpt = load_checkpoint(args.resume, config, vocab)
            params, state, start = ckpt.params, ckpt.state, ckpt.step
        else:
            params, state, start = init_model(config, run.seed), None, 0
        result = train_loop(params, vocab, data.samples, tcfg, state=state, start_step=start, out_dir=out)
    from .plotting import plot_loss_curve

    plot_loss_curve(result.records, out / "loss.png")
    last = result.records[-1]
    print("step\tloss\ttrain_acc")
    print(f"{last.step}\t{last.loss:.6f}\t{last.train_acc:.2f}")
    return 0


def cmd_eval(args, argv) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    data = load_dataset(args.data, ckpt.vocab, ckpt.config.max_text_len)
    _log_resolved("eval", {"checkpoint": args.checkpoint, "data": args.data,
                           "model_config": ckpt.config.to_dict()}, None)
    acc, _ = evaluate(ckpt.params, ckpt.config, ckpt.vocab, data.samples)
    print("dataset\tn\taccuracy")
    print(f"{data.manifest.split}\t{len(data)}\t{acc:.2f}")
    return 0


def cmd_bench(args, argv) -> int:
    if args.checkpoint:
        ckpt = load_checkpoint(args.checkpoint)
        params, config, vocab = ckpt.params, ckpt.config, ckpt.vocab
        seed = None
        resolved = {"checkpoint": args.checkpoint, "model_config": config.to_dict()}
    else:
        run = _run_config(args)
        vocab = run.vocab()
        config = run.model_config(len(vocab))
        seed = run.seed
        params = init_model(config, seed)
        resolved = {**run.to_dict(), "model_config": config.to_dict()}
    _log_resolved("bench", resolved, seed)
    accuracy = 0.0
    if args.data:
        data = load_dataset(args.data, vocab, config.max_text_len)
        accuracy, _ = evaluate(params, config, vocab, data.samples)
    rng = sample_rng(seed or 0, 99)
    images = rng.uniform(-1, 1, size=(args.batch_size, config.in_channels) + config.image_size)
    images = images.astype(params["head.weight"].dtype)

    def run_forward(batch):
        with nx.no_grad():
            return forward(batch, params, config)

    latency = benchmark_latency(run_forward, images, args.warmup, args.iters)
    name = args.name or "this-model"
    ours = CostReport(name, accuracy, latency.median_ms, count_params(config), estimate_flops(config))
    baselines_path = args.paper_baselines or default_baselines_path()
    reports = load_baselines(baselines_path) + [ours]
    points = frontier_points(reports, args.axis)
    print(f"# latency median {latency.median_ms:.3f} ms/image, IQR {latency.iqr_ms:.3f}, "
          f"env {json.dumps(latency.environment, sort_keys=True)}")
    print(f"# {FLOPS_FORMULA}")
    print("model\taccuracy\tmsec_per_image\tparams\tflops\ton_frontier")
    for fp in points:
        r = fp.report
        print(f"{r.name}\t{r.accuracy:.2f}\t{r.msec_per_image:.3f}\t{r.params}\t{r.flops}\t{int(not fp.dominated)}")
    if args.out:
        out = Path(args.out)
        _write_meta(out, "bench", argv, {**resolved, "latency": dataclasses.asdict(latency)}, seed)
        _write_frontier_outputs(out, reports, points, args.axis)
    return 0


def _write_frontier_outputs(out: Path, reports, points, axis: str) -> None:
    from .plotting import plot_frontier, plot_frontier_panels

    out.mkdir(parents=True, exist_ok=True)
    write_report_tsv(out / "report.tsv", points, axis)
    write_gnuplot_dat(out / f"frontier_{axis}.dat", points, axis)
    plot_frontier(points, axis, out / f"frontier_{axis}.png")
    plot_frontier_panels(reports, out / "frontier_all.png")


def cmd_pareto(args, argv) -> int:
    path = args.paper_baselines or default_baselines_path()
    reports = load_baselines(path)
    _log_resolved("pareto", {"paper_baselines": str(path), "axis": args.axis}, None)
    points = frontier_points(reports, args.axis)
    print(f"model\taccuracy\t{args.axis}\ton_frontier")
    for fp in points:
        cost = fp.report.cost(args.axis)
        cost_s = f"{cost:.3f}" if args.axis == "msec" else str(int(cost))
        print(f"{fp.report.name}\t{fp.report.accuracy:.2f}\t{cost_s}\t{int(not fp.dominated)}")
    if args.out:
        out = Path(args.out)
        _write_meta(out, "pareto", argv, {"paper_baselines": str(path), "axis": args.axis}, None)
        _write_frontier_outputs(out, reports, points, args.axis)
    return 0


def cmd_augment_preview(args, argv) -> int:
    rng = sample_rng(args.seed, 0)
    if args.image:
        base = WordImage(read_pgm(args.image), "")
    else:
        base = render_word(args.text, 32, rng)
    settings = {"image": args.image, "text": args.text, "seed": args.seed, "magnitude": args.magnitude}
    _log_resolved("augment-preview", settings, args.seed)
    out = Path(args.out)
    _write_meta(out, "augment-preview", argv, settings, args.seed)
    tiles = []
    for i, kind in enumerate(ALL_KINDS):
        img = apply(AugOp(kind, args.magnitude), base, sample_rng(args.seed, 1, i))
        write_pgm(out / f"{i}_{kind.value}.pgm", img.pixels)
        tiles.append((kind.value, img.pixels))
    h, w = base.pixels.shape
    sheet = np.zeros((3 * h, 3 * w), dtype=np.uint8)
    for i, (_, px) in enumerate(tiles):
        r, c = divmod(i, 3)
        sheet[r * h : (r + 1) * h, c * w : (c + 1) * w] = px
    write_pgm(out / "contact_sheet.pgm", sheet)
    write_pgm(out / "original.pgm", base.pixels)
    from .plotting import plot_image_grid

    plot_image_grid(tiles, out / "contact_sheet.png")
    print(out / "contact_sheet.pgm")
    return 0


def cmd_attention_map(args, argv) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    config, vocab = ckpt.config, ckpt.vocab
    pixels = read_pgm(args.image)
    _log_resolved("attention-map", {"checkpoint": args.checkpoint, "image": args.image}, None)
    image = preprocess_array(pixels, config).astype(ckpt.params["head.weight"].dtype)
    attn, heatmaps, logits = attention_maps(image, ckpt.params, config)
    text, confidence = vocab.decode_greedy(logits)
    out = Path(args.out)
    _write_meta(out, "attention-map", argv, {"checkpoint": args.checkpoint, "image": args.image}, None)
    stem = Path(args.image).stem
    labels = []
    for i, idx in enumerate(logits.argmax(axis=-1)):
        symbol = vocab.symbols[int(idx)]
        labels.append(symbol)
        heat = np.clip(np.rint(heatmaps[i] * 255.0), 0, 255).astype(np.uint8)
        write_pgm(out / f"{stem}_pos{i}_{_symbol_tag(symbol)}.pgm", heat)
    np.save(out / f"{stem}_attention.npy", attn)
    from .plotting import plot_attention

    plot_attention(image[0], heatmaps, labels, out / f"{stem}_attention.png")
    print(f"text\tconfidence\n{text}\t{confidence:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vitstr", description="Vision-transformer scene text recognition toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("generate-data", help="render a synthetic word-image dataset")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--charset", help="vocabulary file, one character per line")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--split", default="train")
    p.add_argument("--min-len", type=int, default=3)
    p.add_argument("--max-len", type=int, default=10)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--clean", action="store_true", help="no background texture")
    p.set_defaults(func=cmd_generate_data)

    p = sub.add_parser("train", help="train a model on a dataset manifest")
    p.add_argument("--config")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--variant")
    p.add_argument("--resume", help="continue from a checkpoint")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="word accuracy of a checkpoint on a dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="cost report and frontier for one model")
    p.add_argument("--config")
    p.add_argument("--checkpoint")
    p.add_argument("--variant")
    p.add_argument("--seed", type=int)
    p.add_argument("--axis", choices=AXES, default="msec")
    p.add_argument("--paper-baselines")
    p.add_argument("--data", help="manifest for measuring accuracy")
    p.add_argument("--name")
    p.add_argument("--warmup", type=int, default=2)
    p.add_argument("--iters", type=int, default=5)
    p.add_argument("--batch-size", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("augment-preview", help="one image per augmentation plus a 3x3 contact sheet")
    p.add_argument("--image")
    p.add_argument("--text", default="Nestle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--magnitude", type=float, default=0.8)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment_preview)

    p = sub.add_parser("attention-map", help="per-position attention heatmaps for one image")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attention_map)

    p = sub.add_parser("pareto", help="frontier membership of published rows")
    p.add_argument("--paper-baselines")
    p.add_argument("--axis", choices=AXES, default="msec")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pareto)
    return parser


def _thread_limit():
    raw = os.environ.get("VITSTR_THREADS")
    if not raw:
        return nullcontext()
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError:
        raise ConfigError(f"VITSTR_THREADS must be a positive integer, got {raw!r}") from None
    return threadpool_limits(limits=n)


def _fail(kind: str, message: str, code: int) -> int:
    print(f"error\t{kind}\t{' '.join(str(message).split())}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with _thread_limit():
            return args.func(args, argv)
    except ConfigError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except (DatasetError, CheckpointError, VocabularyError, LengthError) as exc:
        return _fail(type(exc).__name__, exc, EXIT_ERROR)
    except (TrainingError, NumericError, ContractError) as exc:
        return _fail(type(exc).__name__, exc, EXIT_ERROR)
    except OSError as exc:
        return _fail("io", exc, EXIT_ERROR)


if __name__ == "__main__":
    sys.exit(main())
