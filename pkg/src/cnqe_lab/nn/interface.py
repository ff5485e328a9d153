"""
Classical interface networks that turn an image into embedding angles.

GA and GB share one convolutional trunk over all channels. GA emits the
features of a single embedding layer and GB those of a three-layer
stack. GC runs a small trunk per channel and concatenates the channel
outputs in channel order.

All weights live in one flat vector; each layer reads its block through a
``ParamSlot`` offset so optimizers and checkpoints see a single array.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..core.errors import ConfigError, NumericError
from .autodiff import Tensor, concat, conv2d, linear, maxpool4

logger = logging.getLogger(__name__)

IMAGE_SIZE = 32
KERNEL = 3


class InterfaceKind(str, Enum):
    GA = "GA"
    GB = "GB"
    GC = "GC"

    @classmethod
    def parse(cls, name: Union[str, "InterfaceKind"]) -> "InterfaceKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().upper())
        except ValueError:
            raise ConfigError(f"unknown interface '{name}' (choose from GA, GB, GC)") from None


@dataclass(frozen=True)
class ParamSlot:
    name: str
    shape: Tuple[int, ...]
    offset: int
    group: str  # "cnn" or "fc"

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


def _trunk_slots(prefix: str, c_in: int, c1: int, c2: int, hidden: int, out: int,
                 offset: int) -> List[ParamSlot]:
    flat = c2 * (IMAGE_SIZE // 16) ** 2
    shapes = [
        ("conv1.w", (c1, c_in, KERNEL, KERNEL), "cnn"),
        ("conv1.b", (c1,), "cnn"),
        ("conv2.w", (c2, c1, KERNEL, KERNEL), "cnn"),
        ("conv2.b", (c2,), "cnn"),
        ("fc1.w", (hidden, flat), "fc"),
        ("fc1.b", (hidden,), "fc"),
        ("fc2.w", (out, hidden), "fc"),
        ("fc2.b", (out,), "fc"),
    ]
    slots = []
    for name, shape, group in shapes:
        slot = ParamSlot(f"{prefix}{name}", shape, offset, group)
        slots.append(slot)
        offset += slot.size
    return slots


@dataclass(frozen=True)
class InterfaceModel:
    """Architecture of one interface network; weights are kept separately."""

    kind: InterfaceKind
    p_unit: int
    n_channels: int = 3
    slots: Tuple[ParamSlot, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", InterfaceKind.parse(self.kind))
        if self.p_unit < 1 or self.n_channels < 1:
            raise ConfigError("interface needs p_unit >= 1 and n_channels >= 1")
        object.__setattr__(self, "slots", tuple(self._layout()))

    def _layout(self) -> List[ParamSlot]:
        nc = self.n_channels
        if self.kind is InterfaceKind.GC:
            slots: List[ParamSlot] = []
            offset = 0
            for c in range(nc):
                block = _trunk_slots(f"ch{c}.", 1, 2, 4, 16, self.p_unit, offset)
                slots.extend(block)
                offset = block[-1].offset + block[-1].size
            return slots
        flat = 4 * nc * (IMAGE_SIZE // 16) ** 2
        return _trunk_slots("", nc, 2 * nc, 4 * nc, flat, self.out_dim, 0)

    @property
    def out_dim(self) -> int:
        if self.kind is InterfaceKind.GA:
            return self.p_unit
        return self.n_channels * self.p_unit

    @property
    def n_params(self) -> int:
        last = self.slots[-1]
        return last.offset + last.size

    def slot(self, name: str) -> ParamSlot:
        for s in self.slots:
            if s.name == name:
                return s
        raise KeyError(name)

    def init_weights(self, rng: np.random.Generator) -> np.ndarray:
        """Glorot-uniform weights and zero biases."""
        weights = np.zeros(self.n_params)
        for s in self.slots:
            if s.name.endswith(".b"):
                continue
            receptive = int(np.prod(s.shape[2:])) if len(s.shape) > 2 else 1
            fan_in = s.shape[1] * receptive
            fan_out = s.shape[0] * receptive
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            weights[s.offset:s.offset + s.size] = rng.uniform(-bound, bound, size=s.size)
        return weights

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "p_unit": self.p_unit, "n_channels": self.n_channels}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "InterfaceModel":
        return cls(data["kind"], int(data["p_unit"]), int(data.get("n_channels", 3)))


def count_params(model: InterfaceModel) -> Tuple[int, int]:
    """(cnn, fc) trainable parameter counts walked from the weight slots."""
    cnn = sum(s.size for s in model.slots if s.group == "cnn")
    fc = sum(s.size for s in model.slots if s.group == "fc")
    return cnn, fc


def table_counts(kind: Union[str, InterfaceKind], n_channels: int, p_unit: int) -> Tuple[int, int]:
    """Closed-form (cnn, fc) counts with flatten size n_f = 16 n_c."""
    kind = InterfaceKind.parse(kind)
    nc, p = n_channels, p_unit
    nf = 16 * nc
    if kind is InterfaceKind.GA:
        return 90 * nc ** 2 + 6 * nc, nf ** 2 + nf + nf * p + p
    if kind is InterfaceKind.GB:
        return 90 * nc ** 2 + 6 * nc, nf ** 2 + nf + nc * nf * p + nc * p
    return 96 * nc, nf ** 2 // nc + nf + nf * p + nc * p


def _trunk(x: Tensor, w: Tensor, model: InterfaceModel, prefix: str) -> Tensor:
    def block(name: str) -> Tensor:
        s = model.slot(prefix + name)
        return w.segment(s.offset, s.shape)

    h = maxpool4(conv2d(x, block("conv1.w"), block("conv1.b")).relu())
    h = maxpool4(conv2d(h, block("conv2.w"), block("conv2.b")).relu())
    h = h.reshape(h.shape[0], -1)
    h = linear(h, block("fc1.w"), block("fc1.b")).relu()
    return linear(h, block("fc2.w"), block("fc2.b"))


def forward_interface(model: InterfaceModel, images: Union[np.ndarray, Tensor],
                      weights: Union[np.ndarray, Tensor]) -> Tensor:
    """Embedding features for one (C, 32, 32) image or a (B, C, 32, 32) batch."""
    x = images if isinstance(images, Tensor) else Tensor(images)
    single = x.data.ndim == 3
    if single:
        x = x.reshape((1,) + x.shape)
    expected = (model.n_channels, IMAGE_SIZE, IMAGE_SIZE)
    if x.data.ndim != 4 or x.shape[1:] != expected:
        raise NumericError(f"interface {model.kind.value} expects images of shape {expected}, got {x.shape}")
    w = weights if isinstance(weights, Tensor) else Tensor(weights)
    if w.shape != (model.n_params,):
        raise NumericError(f"interface {model.kind.value} has {model.n_params} weights, got {w.shape}")

    if model.kind is InterfaceKind.GC:
        outputs = [_trunk(x[:, c:c + 1], w, model, f"ch{c}.") for c in range(model.n_channels)]
        out = concat(outputs, axis=1)
    else:
        out = _trunk(x, w, model, "")
    return out.reshape(out.shape[1:]) if single else out


def interface_features(model: InterfaceModel, images: np.ndarray, weights: np.ndarray,
                       batch_size: int = 100) -> np.ndarray:
    """Forward-only features for many images, (N, out_dim)."""
    images = np.asarray(images, dtype=float)
    if images.shape[0] == 0:
        return np.zeros((0, model.out_dim))
    chunks = [forward_interface(model, images[i:i + batch_size], weights).data
              for i in range(0, images.shape[0], batch_size)]
    return np.concatenate(chunks, axis=0)


def build_interface(kind: Union[str, InterfaceKind], p_unit: int, n_channels: int = 3,
                    rng: Optional[np.random.Generator] = None) -> Tuple[InterfaceModel, np.ndarray]:
    model = InterfaceModel(kind, p_unit, n_channels)
    weights = model.init_weights(rng) if rng is not None else np.zeros(model.n_params)
    cnn, fc = count_params(model)
    logger.debug(f"Built interface {model.kind.value}: cnn={cnn} fc={fc} out={model.out_dim}")
    return model, weights
