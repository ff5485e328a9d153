"""
Convolutional autoencoder whose encoder is an interface network.

The decoder mirrors the encoder: two fully connected layers back to the
flattened trunk shape, then nearest 4x upsampling followed by a
transposed convolution, twice. The reconstruction is linear.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np

from ..core.errors import ConfigError, NumericError
from .autodiff import Tensor, concat, conv_transpose2d, linear, mse, upsample
from .interface import IMAGE_SIZE, KERNEL, InterfaceKind, InterfaceModel, ParamSlot, forward_interface

logger = logging.getLogger(__name__)

LATENT_PER_UNIT = 8


def _decoder_slots(prefix: str, latent: int, hidden: int, c2: int, c1: int, c_out: int,
                   offset: int) -> List[ParamSlot]:
    spatial = (IMAGE_SIZE // 16) ** 2
    shapes = [
        ("dfc1.w", (hidden, latent), "fc"),
        ("dfc1.b", (hidden,), "fc"),
        ("dfc2.w", (c2 * spatial, hidden), "fc"),
        ("dfc2.b", (c2 * spatial,), "fc"),
        ("deconv1.w", (c2, c1, KERNEL, KERNEL), "cnn"),
        ("deconv1.b", (c1,), "cnn"),
        ("deconv2.w", (c1, c_out, KERNEL, KERNEL), "cnn"),
        ("deconv2.b", (c_out,), "cnn"),
    ]
    slots = []
    for name, shape, group in shapes:
        slot = ParamSlot(prefix + name, shape, offset, group)
        slots.append(slot)
        offset += slot.size
    return slots


@dataclass(frozen=True)
class AutoencoderModel:
    """Encoder (GA or GC interface) plus mirrored decoder over one flat weight vector."""

    encoder: InterfaceModel
    decoder_slots: Tuple[ParamSlot, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.encoder.kind is InterfaceKind.GB:
            raise ConfigError("autoencoder encoders are GA (8-dim latent) or GC (24-dim latent)")
        object.__setattr__(self, "decoder_slots", tuple(self._layout()))

    @classmethod
    def create(cls, kind: Union[str, InterfaceKind], n_channels: int = 3) -> "AutoencoderModel":
        return cls(InterfaceModel(kind, LATENT_PER_UNIT, n_channels))

    def _layout(self) -> List[ParamSlot]:
        enc = self.encoder
        nc = enc.n_channels
        offset = enc.n_params
        if enc.kind is InterfaceKind.GC:
            slots: List[ParamSlot] = []
            for c in range(nc):
                block = _decoder_slots(f"ch{c}.", enc.p_unit, 16, 4, 2, 1, offset)
                slots.extend(block)
                offset = block[-1].offset + block[-1].size
            return slots
        flat = 4 * nc * (IMAGE_SIZE // 16) ** 2
        return _decoder_slots("", enc.p_unit, flat, 4 * nc, 2 * nc, nc, offset)

    @property
    def latent_dim(self) -> int:
        return self.encoder.out_dim

    @property
    def n_params(self) -> int:
        last = self.decoder_slots[-1]
        return last.offset + last.size

    def init_weights(self, rng: np.random.Generator) -> np.ndarray:
        weights = np.zeros(self.n_params)
        weights[:self.encoder.n_params] = self.encoder.init_weights(rng)
        for s in self.decoder_slots:
            if s.name.endswith(".b"):
                continue
            receptive = int(np.prod(s.shape[2:])) if len(s.shape) > 2 else 1
            bound = np.sqrt(6.0 / ((s.shape[0] + s.shape[1]) * receptive))
            weights[s.offset:s.offset + s.size] = rng.uniform(-bound, bound, size=s.size)
        return weights

    def encoder_weights(self, weights: np.ndarray) -> np.ndarray:
        return np.asarray(weights, dtype=float)[:self.encoder.n_params].copy()

    def _block(self, w: Tensor, name: str) -> Tensor:
        for s in self.decoder_slots:
            if s.name == name:
                return w.segment(s.offset, s.shape)
        raise KeyError(name)


def _decode_branch(model: AutoencoderModel, z: Tensor, w: Tensor, prefix: str, channels: int) -> Tensor:
    block = lambda name: model._block(w, prefix + name)  # noqa: E731
    h = linear(z, block("dfc1.w"), block("dfc1.b")).relu()
    h = linear(h, block("dfc2.w"), block("dfc2.b")).relu()
    side = IMAGE_SIZE // 16
    h = h.reshape(h.shape[0], channels, side, side)
    h = conv_transpose2d(upsample(h, 4), block("deconv1.w"), block("deconv1.b")).relu()
    return conv_transpose2d(upsample(h, 4), block("deconv2.w"), block("deconv2.b"))


def decode(model: AutoencoderModel, latent: Tensor, weights: Tensor) -> Tensor:
    enc = model.encoder
    if enc.kind is InterfaceKind.GC:
        p = enc.p_unit
        branches = [_decode_branch(model, latent[:, c * p:(c + 1) * p], weights, f"ch{c}.", 4)
                    for c in range(enc.n_channels)]
        return concat(branches, axis=1)
    return _decode_branch(model, latent, weights, "", 4 * enc.n_channels)


def autoencoder_step(model: AutoencoderModel, images: np.ndarray,
                     weights: Union[np.ndarray, Tensor]) -> Tuple[Tensor, Tensor]:
    """Reconstruction and mean squared pixel error for an image or batch."""
    images = np.asarray(images, dtype=float)
    batch = images[None] if images.ndim == 3 else images
    w = weights if isinstance(weights, Tensor) else Tensor(weights)
    if w.shape != (model.n_params,):
        raise NumericError(f"autoencoder has {model.n_params} weights, got {w.shape}")
    latent = forward_interface(model.encoder, batch, w[:model.encoder.n_params])
    reconstruction = decode(model, latent, w)
    return reconstruction, mse(reconstruction, batch)
