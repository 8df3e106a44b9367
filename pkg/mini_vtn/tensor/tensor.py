"""Dense tensor with reverse-mode automatic differentiation.

A ``Tensor`` wraps a numpy array of rank 1-3. Tensors produced by an operation carry a
``GradNode`` that records the operation name, its operands and a backward function mapping
the output gradient to one gradient per operand. ``backward`` walks that graph once, in
reverse topological order, and returns a ``GradientMap`` for the requested leaves.

The graph lives as long as the output tensor does; there is no higher-order support.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from math import prod
from typing import Any

import numpy as np

from ..exceptions import ArgumentError, ShapeError

# 32-bit for training, 64-bit for finite-difference checks
FLOAT32 = np.dtype(np.float32)
FLOAT64 = np.dtype(np.float64)
SUPPORTED_DTYPES = (FLOAT32, FLOAT64)

MAX_RANK = 3

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


def resolve_dtype(precision: str | np.dtype | type | None) -> np.dtype:
    """Map a precision name ("float32"/"float64") or dtype-like to a supported dtype."""
    if precision is None:
        return FLOAT32
    dtype = np.dtype(precision)
    if dtype not in SUPPORTED_DTYPES:
        raise ArgumentError(f"Unsupported element type {dtype}; expected float32 or float64")
    return dtype


class GradNode:
    """Back-reference from an op output to the operation that produced it."""

    __slots__ = ("op", "parents", "backward")

    def __init__(self, op: str, parents: tuple[Tensor, ...], backward: BackwardFn):
        self.op = op
        self.parents = parents
        self.backward = backward

    def __repr__(self) -> str:
        return f"GradNode(op={self.op!r}, parents={len(self.parents)})"


class Tensor:
    """Dense rectangular array with an optional autodiff node."""

    __slots__ = ("data", "requires_grad", "grad_node", "__weakref__")

    def __init__(self, data: Any, requires_grad: bool = False, dtype: Any = None):
        if dtype is None and isinstance(data, np.ndarray) and data.dtype in SUPPORTED_DTYPES:
            array = data
        else:
            array = np.asarray(data, dtype=resolve_dtype(dtype))
        if not 1 <= array.ndim <= MAX_RANK:
            raise ShapeError(f"Tensor rank must be 1..{MAX_RANK}, got shape {array.shape}")
        if 0 in array.shape:
            raise ShapeError(f"Tensor extents must be positive, got shape {array.shape}")
        self.data: np.ndarray = array
        self.requires_grad = requires_grad
        self.grad_node: GradNode | None = None

    @classmethod
    def from_op(
        cls,
        data: np.ndarray,
        parents: Sequence[Tensor],
        backward: BackwardFn,
        op: str,
    ) -> Tensor:
        """Build an op output that records ``parents`` and their backward rule.

        ``backward`` receives the gradient of the output and must return one gradient
        (or None) per parent, in order.
        """
        out = cls(data)
        out.requires_grad = any(p.requires_grad for p in parents)
        out.grad_node = GradNode(op, tuple(parents), backward)
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def numel(self) -> int:
        return int(self.data.size)

    @property
    def parents(self) -> tuple[Tensor, ...]:
        return self.grad_node.parents if self.grad_node is not None else ()

    @property
    def is_leaf(self) -> bool:
        return self.grad_node is None

    @property
    def T(self) -> Tensor:
        from . import ops

        return ops.transpose(self)

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def tolist(self) -> list:
        return self.data.tolist()

    def item(self) -> float:
        if self.numel != 1:
            raise ArgumentError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> Tensor:
        return Tensor(self.data.copy())

    def astype(self, dtype: Any) -> Tensor:
        """Leaf copy in another element type; keeps ``requires_grad``."""
        return Tensor(self.data.astype(resolve_dtype(dtype)), requires_grad=self.requires_grad)

    def __add__(self, other: Tensor) -> Tensor:
        from . import ops

        return ops.add(self, other)

    def __sub__(self, other: Tensor) -> Tensor:
        from . import ops

        return ops.sub(self, other)

    def __mul__(self, other: Tensor | float) -> Tensor:
        from . import ops

        if isinstance(other, Tensor):
            return ops.mul(self, other)
        return ops.scale(self, float(other))

    __rmul__ = __mul__

    def __matmul__(self, other: Tensor) -> Tensor:
        from . import ops

        return ops.matmul(self, other)

    def __repr__(self) -> str:
        op = self.grad_node.op if self.grad_node is not None else "leaf"
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, op={op}, requires_grad={self.requires_grad})"


def tensor_create(
    shape: Sequence[int],
    values: Sequence[float] | np.ndarray,
    requires_grad: bool = False,
    dtype: Any = None,
) -> Tensor:
    """Create a leaf tensor from a flat row-major value list.

    Raises:
        ShapeError: extents are not positive or ``len(values) != prod(shape)``
    """
    shape = tuple(int(s) for s in shape)
    if not shape or any(s < 1 for s in shape):
        raise ShapeError(f"Extents must be >= 1, got {list(shape)}")
    flat = np.asarray(values, dtype=resolve_dtype(dtype)).reshape(-1)
    if flat.size != prod(shape):
        raise ShapeError(f"Shape {list(shape)} needs {prod(shape)} values, got {flat.size}")
    return Tensor(flat.reshape(shape).copy(), requires_grad=requires_grad)


def zeros(shape: Sequence[int], requires_grad: bool = False, dtype: Any = None) -> Tensor:
    return Tensor(np.zeros(tuple(shape), dtype=resolve_dtype(dtype)), requires_grad=requires_grad)


def ones(shape: Sequence[int], requires_grad: bool = False, dtype: Any = None) -> Tensor:
    return Tensor(np.ones(tuple(shape), dtype=resolve_dtype(dtype)), requires_grad=requires_grad)


class GradientMap(Mapping[Tensor, Tensor]):
    """Gradients keyed by leaf identity; each requested leaf appears exactly once."""

    def __init__(self, leaves: Sequence[Tensor], grads: Sequence[np.ndarray]):
        self._leaves: dict[int, Tensor] = {}
        self._grads: dict[int, Tensor] = {}
        for leaf, grad in zip(leaves, grads):
            self._leaves[id(leaf)] = leaf
            self._grads[id(leaf)] = Tensor(grad)

    def __getitem__(self, leaf: Tensor) -> Tensor:
        try:
            return self._grads[id(leaf)]
        except KeyError:
            raise KeyError(f"No gradient recorded for {leaf!r}") from None

    def __iter__(self) -> Iterator[Tensor]:
        return iter(self._leaves.values())

    def __len__(self) -> int:
        return len(self._leaves)

    def array(self, leaf: Tensor) -> np.ndarray:
        """Raw gradient array for ``leaf``."""
        return self[leaf].data


def _topological_order(root: Tensor) -> list[Tensor]:
    """Post-order over the gradient-carrying part of the graph (parents first)."""
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor, leaves: Iterable[Tensor]) -> GradientMap:
    """Reverse-mode gradients of a single-element ``loss`` with respect to ``leaves``.

    Leaves that ``loss`` does not depend on get zero gradients.

    Raises:
        ArgumentError: ``loss`` has more than one element
    """
    leaves = list(dict.fromkeys(leaves))  # identity-dedup, keeps order
    if loss.numel != 1:
        raise ArgumentError(f"backward needs a scalar loss, got shape {loss.shape}")

    wanted = {id(leaf) for leaf in leaves}
    grads: dict[int, np.ndarray] = {}
    if loss.requires_grad:
        grads[id(loss)] = np.ones_like(loss.data)
        for node in reversed(_topological_order(loss)):
            if node.grad_node is None:
                continue
            grad_out = grads.get(id(node)) if id(node) in wanted else grads.pop(id(node), None)
            if grad_out is None:
                continue
            parent_grads = node.grad_node.backward(grad_out)
            for parent, grad in zip(node.grad_node.parents, parent_grads):
                if grad is None or not parent.requires_grad:
                    continue
                grad = np.asarray(grad, dtype=parent.dtype).reshape(parent.shape)
                if id(parent) in grads:
                    grads[id(parent)] = grads[id(parent)] + grad
                else:
                    grads[id(parent)] = grad

    return GradientMap(
        leaves,
        [grads.get(id(leaf), np.zeros_like(leaf.data)) for leaf in leaves],
    )
