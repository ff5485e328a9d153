"""
Array-valued reverse-mode autodiff.

Every ``Tensor`` keeps its parents and a closure that pushes its gradient
back to them; ``backward`` walks the graph in reverse topological order.
The op set covers the interface networks, the autoencoder and the
classical heads: elementwise arithmetic, matmul, ReLU, 2D/1D convolution,
4x4 max pooling, nearest upsampling, reshaping and the two losses.
"""

from typing import Callable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..core.errors import NumericError

ArrayLike = Union[np.ndarray, float, int, Sequence[float]]


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "_parents", "_backward", "requires_grad")

    def __init__(self, data: ArrayLike, parents: Tuple["Tensor", ...] = (),
                 requires_grad: bool = False):
        self.data = np.asarray(data, dtype=float)
        self.grad: Optional[np.ndarray] = None
        self._parents = parents
        self._backward: Optional[Callable[[np.ndarray], None]] = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape})"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def _accumulate(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def backward(self, grad: Optional[ArrayLike] = None) -> None:
        """Propagate ``grad`` (d loss / d self) to every leaf in the graph."""
        if grad is None:
            if self.size != 1:
                raise NumericError("backward() without a gradient needs a scalar tensor")
            seed = np.ones_like(self.data)
        else:
            seed = np.asarray(grad, dtype=float).reshape(self.shape)

        topo = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))

        grads = {id(self): seed}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node._accumulate(g)
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg

    # -- construction helper --------------------------------------------------

    @staticmethod
    def _make(data: np.ndarray, parents: Tuple["Tensor", ...],
              backward: Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]) -> "Tensor":
        out = Tensor(data, parents)
        if out.requires_grad:
            out._backward = backward
        return out

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other: Union["Tensor", ArrayLike]) -> "Tensor":
        other = _lift(other)
        return Tensor._make(self.data + other.data, (self, other),
                            lambda g: (_unbroadcast(g, self.shape), _unbroadcast(g, other.shape)))

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        return Tensor._make(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other: Union["Tensor", ArrayLike]) -> "Tensor":
        return self + (-_lift(other))

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return _lift(other) + (-self)

    def __mul__(self, other: Union["Tensor", ArrayLike]) -> "Tensor":
        other = _lift(other)
        return Tensor._make(self.data * other.data, (self, other),
                            lambda g: (_unbroadcast(g * other.data, self.shape),
                                       _unbroadcast(g * self.data, other.shape)))

    __rmul__ = __mul__

    def __matmul__(self, other: "Tensor") -> "Tensor":
        a, b = self.data, other.data

        def backward(g: np.ndarray):
            ga = g @ np.swapaxes(b, -1, -2) if b.ndim > 1 else np.multiply.outer(g, b)
            if a.ndim == 1:
                gb = np.multiply.outer(a, g)
            else:
                gb = np.swapaxes(a, -1, -2) @ g
            return ga, gb

        return Tensor._make(a @ b, (self, other), backward)

    def square(self) -> "Tensor":
        return Tensor._make(self.data ** 2, (self,), lambda g: (2.0 * self.data * g,))

    def relu(self) -> "Tensor":
        mask = self.data > 0
        return Tensor._make(np.where(mask, self.data, 0.0), (self,), lambda g: (g * mask,))

    def sum(self) -> "Tensor":
        return Tensor._make(np.array(self.data.sum()), (self,),
                            lambda g: (np.broadcast_to(g, self.shape).copy(),))

    def mean(self) -> "Tensor":
        n = self.size
        return Tensor._make(np.array(self.data.mean()), (self,),
                            lambda g: (np.broadcast_to(g / n, self.shape).copy(),))

    # -- shape ----------------------------------------------------------------

    def reshape(self, *shape: int) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Tensor._make(self.data.reshape(shape), (self,), lambda g: (g.reshape(self.shape),))

    def transpose(self, axes: Sequence[int]) -> "Tensor":
        axes = tuple(axes)
        inverse = tuple(np.argsort(axes))
        return Tensor._make(np.transpose(self.data, axes), (self,),
                            lambda g: (np.transpose(g, inverse),))

    def flip(self, axes: Sequence[int]) -> "Tensor":
        axes = tuple(axes)
        return Tensor._make(np.flip(self.data, axes), (self,), lambda g: (np.flip(g, axes),))

    def __getitem__(self, index) -> "Tensor":
        def backward(g: np.ndarray):
            full = np.zeros_like(self.data)
            np.add.at(full, index, g)
            return (full,)

        return Tensor._make(self.data[index], (self,), backward)

    def segment(self, start: int, shape: Sequence[int]) -> "Tensor":
        """View of a flat parameter vector as a block of ``shape``."""
        size = int(np.prod(shape))
        return self[start:start + size].reshape(tuple(shape))


def _lift(value: Union[Tensor, ArrayLike]) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def backward(g: np.ndarray):
        return tuple(
            np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=axis) for i in range(len(tensors))
        )

    return Tensor._make(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward)


# -- layers -------------------------------------------------------------------

def _batched(x: Tensor, ndim: int) -> Tuple[Tensor, bool]:
    if x.data.ndim == ndim - 1:
        return x.reshape((1,) + x.shape), True
    if x.data.ndim != ndim:
        raise NumericError(f"expected a {ndim - 1}D or batched {ndim}D input, got shape {x.shape}")
    return x, False


def conv2d(x: Tensor, kernel: Tensor, bias: Tensor, padding: int = 1) -> Tensor:
    """Stride-1 cross-correlation of (B, C, H, W) or (C, H, W) input with zero padding."""
    x, squeeze = _batched(x, 4)
    c_out, c_in, kh, kw = kernel.shape
    if x.shape[1] != c_in:
        raise NumericError(f"conv2d expects {c_in} input channels, got {x.shape[1]}")
    if padding > min(kh, kw) - 1:
        raise NumericError("conv2d padding must be smaller than the kernel")
    padded = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))
    out = np.einsum("bchwij,ocij->bohw", windows, kernel.data, optimize=True) + bias.data[None, :, None, None]

    def backward(g: np.ndarray):
        g_kernel = np.einsum("bchwij,bohw->ocij", windows, g, optimize=True)
        g_bias = g.sum(axis=(0, 2, 3))
        back = (kh - 1 - padding, kw - 1 - padding)
        g_pad = np.pad(g, ((0, 0), (0, 0), (back[0], back[0]), (back[1], back[1])))
        g_windows = sliding_window_view(g_pad, (kh, kw), axis=(2, 3))
        flipped = kernel.data[:, :, ::-1, ::-1]
        g_x = np.einsum("bohwij,ocij->bchw", g_windows, flipped, optimize=True)
        return g_x, g_kernel, g_bias

    result = Tensor._make(out, (x, kernel, bias), backward)
    return result.reshape(result.shape[1:]) if squeeze else result


def conv_transpose2d(x: Tensor, kernel: Tensor, bias: Tensor, padding: int = 1) -> Tensor:
    """Stride-1 transposed convolution; ``kernel`` has shape (C_in, C_out, k, k)."""
    mirrored = kernel.transpose((1, 0, 2, 3)).flip((2, 3))
    k = kernel.shape[-1]
    return conv2d(x, mirrored, bias, padding=k - 1 - padding)


def maxpool(x: Tensor, size: int = 4) -> Tensor:
    """Non-overlapping ``size`` x ``size`` max pooling; ties go to the first element in row-major order."""
    x, squeeze = _batched(x, 4)
    b, c, h, w = x.shape
    if h % size or w % size:
        raise NumericError(f"maxpool{size} needs spatial dims divisible by {size}, got {h}x{w}")
    blocks = x.data.reshape(b, c, h // size, size, w // size, size).transpose(0, 1, 2, 4, 3, 5)
    flat = blocks.reshape(b, c, h // size, w // size, size * size)
    arg = np.argmax(flat, axis=-1)
    out = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]

    def backward(g: np.ndarray):
        routed = np.zeros_like(flat)
        np.put_along_axis(routed, arg[..., None], g[..., None], axis=-1)
        routed = routed.reshape(b, c, h // size, w // size, size, size).transpose(0, 1, 2, 4, 3, 5)
        return (routed.reshape(b, c, h, w),)

    result = Tensor._make(out, (x,), backward)
    return result.reshape(result.shape[1:]) if squeeze else result


def maxpool4(x: Tensor) -> Tensor:
    return maxpool(x, 4)


def upsample(x: Tensor, factor: int = 4) -> Tensor:
    """Nearest-neighbour upsampling of the two trailing axes."""
    out = np.repeat(np.repeat(x.data, factor, axis=-2), factor, axis=-1)

    def backward(g: np.ndarray):
        shape = g.shape[:-2] + (g.shape[-2] // factor, factor, g.shape[-1] // factor, factor)
        return (g.reshape(shape).sum(axis=(-3, -1)),)

    return Tensor._make(out, (x,), backward)


def conv1d(x: Tensor, kernel: Tensor, bias: Tensor, stride: int = 1) -> Tensor:
    """Valid 1D cross-correlation of (B, C, L) or (C, L) input."""
    x, squeeze = _batched(x, 3)
    c_out, c_in, k = kernel.shape
    if x.shape[1] != c_in:
        raise NumericError(f"conv1d expects {c_in} input channels, got {x.shape[1]}")
    length = x.shape[2]
    if length < k:
        raise NumericError(f"conv1d kernel {k} longer than input {length}")
    n_out = (length - k) // stride + 1
    windows = sliding_window_view(x.data, k, axis=2)[:, :, ::stride, :][:, :, :n_out, :]
    out = np.einsum("bclk,ock->bol", windows, kernel.data) + bias.data[None, :, None]

    def backward(g: np.ndarray):
        g_kernel = np.einsum("bclk,bol->ock", windows, g)
        g_bias = g.sum(axis=(0, 2))
        g_x = np.zeros_like(x.data)
        stop = stride * (n_out - 1) + 1
        for j in range(k):
            g_x[:, :, j:j + stop:stride] += np.einsum("bol,oc->bcl", g, kernel.data[:, :, j])
        return g_x, g_kernel, g_bias

    result = Tensor._make(out, (x, kernel, bias), backward)
    return result.reshape(result.shape[1:]) if squeeze else result


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """x @ W^T + b with W of shape (out, in)."""
    return x @ weight.transpose((1, 0)) + bias


# -- losses -------------------------------------------------------------------

def mse(prediction: Tensor, target: ArrayLike) -> Tensor:
    return (prediction - _lift(target)).square().mean()


def cross_entropy(logits: Tensor, labels: Iterable[int]) -> Tensor:
    """Mean softmax cross-entropy of (B, K) logits against integer labels."""
    labels = np.asarray(list(labels), dtype=int)
    z = logits.data
    if z.ndim != 2 or z.shape[0] != labels.shape[0]:
        raise NumericError(f"logits {z.shape} do not match {labels.shape[0]} labels")
    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    batch = np.arange(labels.shape[0])
    loss = -log_probs[batch, labels].mean()

    def backward(g: np.ndarray):
        probs = np.exp(log_probs)
        probs[batch, labels] -= 1.0
        return (g * probs / labels.shape[0],)

    return Tensor._make(np.array(loss), (logits,), backward)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)
