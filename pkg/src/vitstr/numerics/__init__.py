"""Minimal dense tensor library with reverse-mode gradients."""

from .ops import (
    add,
    concat,
    gelu,
    index,
    layer_norm,
    linear,
    log_softmax,
    matmul,
    mean,
    mul,
    repeat_leading,
    reshape,
    scale,
    softmax,
    sum,
    transpose,
)
from .serialize import SerializationError, read_tensors, write_tensors
from .tensor import (
    ContractError,
    DimensionError,
    GradTape,
    NumericError,
    Tensor,
    backward,
    get_dtype,
    get_tape,
    grad_enabled,
    make_result,
    no_grad,
    precision,
    set_precision,
)

__all__ = [
    "ContractError",
    "DimensionError",
    "GradTape",
    "NumericError",
    "SerializationError",
    "Tensor",
    "add",
    "backward",
    "concat",
    "gelu",
    "get_dtype",
    "get_tape",
    "grad_enabled",
    "index",
    "layer_norm",
    "linear",
    "log_softmax",
    "make_result",
    "matmul",
    "mean",
    "mul",
    "no_grad",
    "precision",
    "read_tensors",
    "repeat_leading",
    "reshape",
    "scale",
    "set_precision",
    "softmax",
    "sum",
    "transpose",
    "write_tensors",
]
