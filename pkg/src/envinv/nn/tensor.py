"""Reverse-mode automatic differentiation on float64 numpy arrays.

Each operation builds a Tensor holding its forward value, its parents, and a
closure that pushes the output gradient into the parents' grads.  Calling
backward() on a scalar output walks the graph once in reverse topological
order.  Gradients accumulate, so a parameter used twice gets the sum of both
contributions, and grads must be cleared between steps (zero_grad).

There is no graph compilation, no broadcasting magic and no dtype zoo:
everything is float64, shapes must match exactly unless an op documents
otherwise, and mismatches raise ShapeError naming both shapes.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class ShapeError(ValueError):
    def __init__(self, op: str, got, expected) -> None:
        super().__init__(f"{op}: shape {tuple(got)} incompatible with {tuple(expected)}")


class Tensor:
    """A node in the computation graph.

    requires_grad=False (constants, inputs) prunes the node from backward
    bookkeeping: no grad buffer is materialized and parents are not visited
    through it unless some ancestor requires grad.
    """

    __slots__ = ("values", "grad", "parents", "_push", "requires_grad")

    def __init__(
        self,
        values: np.ndarray | float,
        parents: Sequence["Tensor"] = (),
        push: Callable[[np.ndarray], None] | None = None,
        requires_grad: bool | None = None,
    ) -> None:
        self.values = np.asarray(values, dtype=np.float64)
        self.parents = tuple(parents)
        self._push = push
        if requires_grad is None:
            requires_grad = any(p.requires_grad for p in self.parents)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def accumulate(self, delta: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.zeros_like(self.values)
        self.grad += delta

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        if self.values.ndim != 0:
            raise ShapeError("backward", self.values.shape, ())
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node.parents:
                stack.append((p, False))
        self.grad = np.ones_like(self.values)
        for node in reversed(order):
            if node._push is not None and node.grad is not None:
                node._push(node.grad)

    def item(self) -> float:
        return float(self.values)


def param(values: np.ndarray) -> Tensor:
    """A learnable leaf: participates in backward, owns its buffer."""
    return Tensor(np.array(values, dtype=np.float64), requires_grad=True)


def constant(values: np.ndarray | float) -> Tensor:
    """A non-learnable leaf (input data); backward never reaches past it."""
    return Tensor(values, requires_grad=False)
