"""Minimal tensor library with reverse-mode autodiff."""

from .gradcheck import DEFAULT_FD_EPS, finite_diff_entries, finite_diff_grad, relative_error
from .ops import (
    LAYER_NORM_EPS,
    add,
    concat_features,
    elementwise,
    gelu,
    layer_norm,
    linear,
    matmul,
    mean_rows,
    mul,
    scale,
    slice_columns,
    softmax_rows,
    sub,
    sum_all,
    transpose,
)
from .tensor import (
    FLOAT32,
    FLOAT64,
    GradientMap,
    GradNode,
    Tensor,
    backward,
    ones,
    resolve_dtype,
    tensor_create,
    zeros,
)

__all__ = [
    "DEFAULT_FD_EPS",
    "FLOAT32",
    "FLOAT64",
    "LAYER_NORM_EPS",
    "GradNode",
    "GradientMap",
    "Tensor",
    "add",
    "backward",
    "concat_features",
    "elementwise",
    "finite_diff_entries",
    "finite_diff_grad",
    "gelu",
    "layer_norm",
    "linear",
    "matmul",
    "mean_rows",
    "mul",
    "ones",
    "relative_error",
    "resolve_dtype",
    "scale",
    "slice_columns",
    "softmax_rows",
    "sub",
    "sum_all",
    "tensor_create",
    "transpose",
    "zeros",
]
