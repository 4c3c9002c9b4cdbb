"""Accuracy, analytic cost model, latency measurement and Pareto frontiers.

FLOPS follow the multiply-accumulate convention: one MAC counts as one
operation. Element-wise work (softmax, LayerNorm, GELU, residual adds) is not
counted.
"""

from __future__ import annotations

import csv
import dataclasses
import os
import platform
import statistics
import time
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from threadpoolctl import threadpool_info

from .numerics import ContractError

AXES = ("params", "msec", "flops")

FLOPS_FORMULA = (
    "MACs = N*P^2*C*D + L*[T*D*3D + 2*T^2*D + T*D^2 + 2*T*D*(r*D)] + S*D*K, "
    "T = N+1, one multiply-accumulate = 1"
)


def word_accuracy(predictions: Sequence[str], ground_truths: Sequence[str], case_insensitive: bool = True) -> float:
    """Percentage of exact full-string matches."""
    if len(predictions) != len(ground_truths):
        raise ContractError(f"{len(predictions)} predictions for {len(ground_truths)} ground truths")
    if not predictions:
        return 0.0
    if case_insensitive:
        hits = sum(p.lower() == g.lower() for p, g in zip(predictions, ground_truths))
    else:
        hits = sum(p == g for p, g in zip(predictions, ground_truths))
    return 100.0 * hits / len(predictions)


def count_params(config) -> int:
    """Closed-form parameter count; matches ``ModelParams.numel`` exactly."""
    d, k, t = config.embed_dim, config.num_classes, config.num_tokens
    hidden = config.mlp_ratio * d
    patch = config.patch_dim * d + d
    embeddings = d + t * d
    block = (
        2 * d  # ln1
        + d * 3 * d + 3 * d  # qkv
        + d * d + d  # attn out
        + 2 * d  # ln2
        + d * hidden + hidden  # fc1
        + hidden * d + d  # fc2
    )
    return patch + embeddings + config.depth * block + 2 * d + d * k + k


def flops_breakdown(config) -> dict[str, int]:
    d, t, s, k = config.embed_dim, config.num_tokens, config.seq_len, config.num_classes
    hidden = config.mlp_ratio * d
    per_block = {
        "qkv": t * d * 3 * d,
        "attn_scores": t * t * d,
        "attn_context": t * t * d,
        "attn_proj": t * d * d,
        "mlp": 2 * t * d * hidden,
    }
    out = {"patch_embed": config.num_patches * config.patch_dim * d}
    out.update({f"blocks.{name}": config.depth * v for name, v in per_block.items()})
    out["head"] = s * d * k
    return out


def estimate_flops(config) -> int:
    """Analytic MAC count for one image at ``config.image_size``."""
    return int(sum(flops_breakdown(config).values()))


@dataclasses.dataclass
class LatencyReport:
    median_ms: float
    p25_ms: float
    p75_ms: float
    iters: int
    batch_size: int
    environment: dict

    @property
    def iqr_ms(self) -> float:
        return self.p75_ms - self.p25_ms


def environment_descriptor(dtype=None) -> dict:
    threads = max((info.get("num_threads", 1) for info in threadpool_info()), default=os.cpu_count() or 1)
    return {
        "threads": int(threads),
        "precision": str(np.dtype(dtype).name) if dtype is not None else "float32",
        "machine": platform.machine(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def benchmark_latency(
    model: Callable[[np.ndarray], object],
    images: np.ndarray,
    warmup: int = 2,
    iters: int = 10,
    clock: Callable[[], float] = time.perf_counter,
) -> LatencyReport:
    """Median wall-clock msec per image over ``iters`` timed calls after ``warmup`` untimed ones."""
    if iters < 1:
        raise ContractError(f"iters must be >= 1, got {iters}")
    batch = int(images.shape[0])
    for _ in range(warmup):
        model(images)
    samples = []
    for _ in range(iters):
        start = clock()
        model(images)
        samples.append((clock() - start) * 1000.0 / batch)
    q = np.percentile(samples, [25, 75]) if len(samples) > 1 else (samples[0], samples[0])
    return LatencyReport(
        statistics.median(samples), float(q[0]), float(q[1]), iters, batch,
        environment_descriptor(getattr(images, "dtype", None)),
    )


@dataclasses.dataclass
class CostReport:
    name: str
    accuracy: float
    msec_per_image: float
    params: int
    flops: int

    def __post_init__(self):
        for field in ("accuracy", "msec_per_image", "params", "flops"):
            if getattr(self, field) < 0:
                raise ContractError(f"{self.name}: {field} must be nonnegative")

    def cost(self, axis: str) -> float:
        if axis == "params":
            return self.params
        if axis == "msec":
            return self.msec_per_image
        if axis == "flops":
            return self.flops
        raise ContractError(f"unknown cost axis {axis!r}; expected one of {AXES}")


@dataclasses.dataclass
class FrontierPoint:
    report: CostReport
    dominated: bool


def dominates(a: CostReport, b: CostReport, axis: str) -> bool:
    """``a`` is at least as accurate and as cheap as ``b``, and strictly better on one."""
    ca, cb = a.cost(axis), b.cost(axis)
    return a.accuracy >= b.accuracy and ca <= cb and (a.accuracy > b.accuracy or ca < cb)


def frontier_points(points: Iterable[CostReport], axis: str) -> list[FrontierPoint]:
    """Every point with its dominance flag, stably ordered by cost."""
    if axis not in AXES:
        raise ContractError(f"unknown cost axis {axis!r}; expected one of {AXES}")
    ordered = sorted(points, key=lambda p: p.cost(axis))
    out: list[FrontierPoint] = []
    best_cheaper = -np.inf
    i = 0
    while i < len(ordered):
        j = i
        cost = ordered[i].cost(axis)
        while j < len(ordered) and ordered[j].cost(axis) == cost:
            j += 1
        group = ordered[i:j]
        top = max(p.accuracy for p in group)
        for p in group:
            out.append(FrontierPoint(p, p.accuracy < top or p.accuracy <= best_cheaper))
        best_cheaper = max(best_cheaper, top)
        i = j
    return out


def pareto_frontier(points: Iterable[CostReport], axis: str) -> list[CostReport]:
    """Non-dominated points (maximize accuracy, minimize ``axis``), ordered by cost."""
    return [fp.report for fp in frontier_points(points, axis) if not fp.dominated]


BASELINE_COLUMNS = ("model", "accuracy", "msec_per_image", "params_millions", "flops_giga")


def load_baselines(path: str | Path) -> list[CostReport]:
    """Read a TSV of published rows (``#`` lines are comments)."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    reader = csv.DictReader(lines, delimiter="\t")
    missing = set(BASELINE_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ContractError(f"{path}: missing columns {sorted(missing)}")
    for row in reader:
        rows.append(CostReport(
            row["model"],
            float(row["accuracy"]),
            float(row["msec_per_image"]),
            int(round(float(row["params_millions"]) * 1e6)),
            int(round(float(row["flops_giga"]) * 1e9)),
        ))
    return rows


def default_baselines_path() -> Path:
    return Path(__file__).with_name("data") / "published_baselines.tsv"


def write_report_tsv(path: str | Path, points: Sequence[FrontierPoint], axis: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# cost axis: {axis}; FLOPS convention: {FLOPS_FORMULA}\n")
        fh.write("model\taccuracy\tmsec_per_image\tparams\tflops\ton_frontier\n")
        for fp in points:
            r = fp.report
            fh.write(f"{r.name}\t{r.accuracy:.2f}\t{r.msec_per_image:.3f}\t{r.params}\t{r.flops}\t"
                     f"{int(not fp.dominated)}\n")


def write_gnuplot_dat(path: str | Path, points: Sequence[FrontierPoint], axis: str) -> None:
    """Two data blocks separated by blank lines: all points, then the frontier."""
    scale = {"params": 1e-6, "msec": 1.0, "flops": 1e-9}[axis]
    unit = {"params": "params_1e6", "msec": "msec_per_image", "flops": "flops_1e9"}[axis]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {unit}\taccuracy\tmodel\n# index 0: all points\n")
        for fp in points:
            fh.write(f"{fp.report.cost(axis) * scale:.6g}\t{fp.report.accuracy:.2f}\t\"{fp.report.name}\"\n")
        fh.write("\n\n# index 1: frontier\n")
        for fp in points:
            if not fp.dominated:
                fh.write(f"{fp.report.cost(axis) * scale:.6g}\t{fp.report.accuracy:.2f}\t\"{fp.report.name}\"\n")
