import numpy as np
import pytest

from vitstr import numerics as nx
from vitstr.model import ViTSTRConfig


@pytest.fixture
def f64():
    with nx.precision(64):
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def micro_config():
    # gradient-check model: D=32, L=2, H=2, 32x32 image, P=16, S=4, K=5
    return ViTSTRConfig(patch_size=16, depth=2, embed_dim=32, num_heads=2, seq_len=4,
                        image_size=(32, 32), num_classes=5)


@pytest.fixture
def overfit_config():
    return ViTSTRConfig(patch_size=16, depth=4, embed_dim=64, num_heads=4, seq_len=12,
                        image_size=(64, 64), num_classes=96)


def finite_difference(fn, arr, h=1e-5, indices=None):
    """Central differences of scalar ``fn()`` w.r.t. entries of ``arr`` (mutated in place)."""
    flat = arr.reshape(-1)
    idx = range(flat.size) if indices is None else indices
    out = {}
    for i in idx:
        orig = flat[i]
        flat[i] = orig + h
        up = fn()
        flat[i] = orig - h
        down = fn()
        flat[i] = orig
        out[i] = (up - down) / (2 * h)
    return out


def max_relative_error(analytic, numeric: dict, floor=1e-4):
    # The floor keeps exactly-zero gradients (e.g. the key bias, which shifts
    # every score in a row equally) from dividing central-difference noise by ~0.
    a = analytic.reshape(-1)
    worst = 0.0
    for i, n in numeric.items():
        denom = max(abs(a[i]), abs(n), floor)
        worst = max(worst, abs(a[i] - n) / denom)
    return worst


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record one result line per numbered criterion; printed in the terminal summary."""

    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
