"""Classical networks: interface, baseline heads and the autoencoder."""

from .autodiff import Tensor
from .interface import InterfaceKind, InterfaceModel, build_interface, forward_interface, interface_features
from .baselines import BaselineHead, forward_baseline
from .autoencoder import AutoencoderModel

__all__ = [
    "Tensor",
    "InterfaceKind",
    "InterfaceModel",
    "build_interface",
    "forward_interface",
    "interface_features",
    "BaselineHead",
    "forward_baseline",
    "AutoencoderModel",
]
