"""Tensor type, precision switch and the gradient tape."""

from __future__ import annotations

import contextlib
from typing import Callable, Sequence

import numpy as np


class NumericError(ArithmeticError):
    """A non-finite value appeared where finite values are required."""


class DimensionError(ValueError):
    """Operand shapes are incompatible for an operation."""


class ContractError(RuntimeError):
    """An API precondition was violated."""


_DTYPE: type = np.float32
_GRAD_ENABLED = True


def get_dtype():
    return _DTYPE


def set_precision(bits: int) -> None:
    """Switch the global floating point precision (32 or 64 bits)."""
    global _DTYPE
    if bits == 32:
        _DTYPE = np.float32
    elif bits == 64:
        _DTYPE = np.float64
    else:
        raise ValueError(f"unsupported precision: {bits} bits")


@contextlib.contextmanager
def precision(bits: int):
    previous = 64 if _DTYPE is np.float64 else 32
    set_precision(bits)
    try:
        yield
    finally:
        set_precision(previous)


@contextlib.contextmanager
def no_grad():
    """Run operations without recording them on the tape."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    """Dense row-major real array with an optional gradient."""

    __array_priority__ = 100
    __slots__ = ("data", "requires_grad", "grad", "_produced")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype or _DTYPE)
        if arr.dtype.kind != "f":
            arr = arr.astype(_DTYPE)
        self.data = np.ascontiguousarray(arr)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._produced = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy(), dtype=self.data.dtype)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"

    # operator sugar; implementations live in ops
    def __add__(self, other):
        from .ops import add
        return add(self, other)

    def __sub__(self, other):
        from .ops import add, scale
        return add(self, scale(other, -1.0))

    def __mul__(self, other):
        from .ops import mul, scale
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __neg__(self):
        from .ops import scale
        return scale(self, -1.0)

    def __matmul__(self, other):
        from .ops import matmul
        return matmul(self, other)

    def __getitem__(self, key):
        from .ops import index
        return index(self, key)


BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


class GradTape:
    """Ordered record of differentiable operations, replayed in reverse."""

    def __init__(self):
        self.records: list[tuple[Tensor, tuple[Tensor, ...], BackwardFn]] = []

    def __len__(self) -> int:
        return len(self.records)

    def record(self, out: Tensor, inputs: tuple[Tensor, ...], backward_fn: BackwardFn) -> None:
        self.records.append((out, inputs, backward_fn))

    def clear(self) -> None:
        self.records.clear()

    def backward(self, loss: Tensor) -> None:
        if loss.size != 1:
            raise ContractError(f"backward requires a scalar loss, got shape {loss.shape}")
        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        leaves: dict[int, Tensor] = {}
        if not loss._produced and loss.requires_grad:
            leaves[id(loss)] = loss
        try:
            for out, inputs, backward_fn in reversed(self.records):
                g_out = grads.pop(id(out), None)
                if g_out is None:
                    continue
                for inp, g in zip(inputs, backward_fn(g_out)):
                    if g is None or not inp.requires_grad:
                        continue
                    key = id(inp)
                    if key in grads:
                        grads[key] = grads[key] + g
                    else:
                        grads[key] = g
                    if not inp._produced:
                        leaves[key] = inp
            for key, leaf in leaves.items():
                g = grads.get(key)
                if g is None:
                    continue
                g = g.astype(leaf.data.dtype, copy=False)
                leaf.grad = g if leaf.grad is None else leaf.grad + g
        finally:
            self.clear()


_TAPE = GradTape()


def get_tape() -> GradTape:
    return _TAPE


def backward(loss: Tensor) -> None:
    """Populate ``.grad`` on every leaf reachable from ``loss`` and clear the tape."""
    _TAPE.backward(loss)


def check_finite(arr: np.ndarray, op: str) -> None:
    if not np.isfinite(arr).all():
        raise NumericError(f"{op}: non-finite values in result")


def make_result(
    data: np.ndarray,
    inputs: tuple[Tensor, ...],
    backward_fn: BackwardFn,
    op: str,
) -> Tensor:
    """Wrap an op result, check finiteness and record it when gradients flow."""
    check_finite(data, op)
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out._produced = True
    out.requires_grad = _GRAD_ENABLED and any(t.requires_grad for t in inputs)
    if out.requires_grad:
        _TAPE.record(out, inputs, backward_fn)
    return out


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)
