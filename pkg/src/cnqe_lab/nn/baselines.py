"""
Small classical heads trained on frozen interface outputs in place of the QCNN.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from ..core.errors import ConfigError, NumericError
from .autodiff import Tensor, conv1d, linear
from .interface import ParamSlot

logger = logging.getLogger(__name__)

HEAD_KINDS = ("linear", "bottleneck", "cnn1d")

# input length -> ((kernel, stride), ...) for the 1D convolutional head
_CNN1D_PLAN = {
    8: ((6, 1),),
    24: ((3, 3), (2, 2), (2, 1)),
}


def _conv_output_length(length: int, plan) -> int:
    for kernel, stride in plan:
        length = (length - kernel) // stride + 1
    return length


@dataclass(frozen=True)
class BaselineHead:
    kind: str
    input_dim: int
    slots: Tuple[ParamSlot, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.kind not in HEAD_KINDS:
            raise ConfigError(f"unknown baseline head '{self.kind}' (choose from {', '.join(HEAD_KINDS)})")
        if self.kind == "cnn1d" and self.input_dim not in _CNN1D_PLAN:
            raise ConfigError(f"cnn1d head supports inputs of length {sorted(_CNN1D_PLAN)}, got {self.input_dim}")
        object.__setattr__(self, "slots", tuple(self._layout()))

    def _layout(self) -> List[ParamSlot]:
        d = self.input_dim
        if self.kind == "linear":
            shapes = [("out.w", (2, d)), ("out.b", (2,))]
        elif self.kind == "bottleneck":
            shapes = [("hidden.w", (1, d)), ("hidden.b", (1,)), ("out.w", (2, 1)), ("out.b", (2,))]
        else:
            plan = _CNN1D_PLAN[d]
            shapes = []
            for i, (kernel, _) in enumerate(plan):
                shapes += [(f"conv{i}.w", (1, 1, kernel)), (f"conv{i}.b", (1,))]
            tail = _conv_output_length(d, plan)
            shapes += [("out.w", (2, tail)), ("out.b", (2,))]
        slots, offset = [], 0
        for name, shape in shapes:
            slot = ParamSlot(name, shape, offset, "fc")
            slots.append(slot)
            offset += slot.size
        return slots

    @property
    def n_params(self) -> int:
        last = self.slots[-1]
        return last.offset + last.size

    def block(self, weights: Tensor, name: str) -> Tensor:
        for s in self.slots:
            if s.name == name:
                return weights.segment(s.offset, s.shape)
        raise KeyError(name)

    def init_weights(self, rng: np.random.Generator) -> np.ndarray:
        weights = np.zeros(self.n_params)
        for s in self.slots:
            if s.name.endswith(".b"):
                continue
            receptive = s.shape[-1] if len(s.shape) == 3 else 1
            bound = np.sqrt(6.0 / ((s.shape[0] + s.shape[1]) * receptive))
            weights[s.offset:s.offset + s.size] = rng.uniform(-bound, bound, size=s.size)
        return weights

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "input_dim": self.input_dim, "n_params": self.n_params}


def forward_baseline(head: BaselineHead, features: Union[np.ndarray, Tensor],
                     weights: Union[np.ndarray, Tensor]) -> Tensor:
    """Two-class logits for one feature vector or a (B, d) batch."""
    x = features if isinstance(features, Tensor) else Tensor(features)
    single = x.data.ndim == 1
    if single:
        x = x.reshape(1, -1)
    if x.data.ndim != 2 or x.shape[1] != head.input_dim:
        raise NumericError(f"{head.kind} head expects {head.input_dim} features, got shape {x.shape}")
    w = weights if isinstance(weights, Tensor) else Tensor(weights)
    if w.shape != (head.n_params,):
        raise NumericError(f"{head.kind} head has {head.n_params} weights, got {w.shape}")

    if head.kind == "linear":
        out = linear(x, head.block(w, "out.w"), head.block(w, "out.b"))
    elif head.kind == "bottleneck":
        h = linear(x, head.block(w, "hidden.w"), head.block(w, "hidden.b")).relu()
        out = linear(h, head.block(w, "out.w"), head.block(w, "out.b"))
    else:
        h = x.reshape(x.shape[0], 1, head.input_dim)
        for i, (_, stride) in enumerate(_CNN1D_PLAN[head.input_dim]):
            h = conv1d(h, head.block(w, f"conv{i}.w"), head.block(w, f"conv{i}.b"), stride=stride).relu()
        h = h.reshape(h.shape[0], -1)
        out = linear(h, head.block(w, "out.w"), head.block(w, "out.b"))
    return out.reshape(out.shape[1:]) if single else out
