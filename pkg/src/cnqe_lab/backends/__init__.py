"""Simulation backends for cnqe-lab."""

from typing import Optional

from ..core.config import NoiseConfig
from ..core.router import BackendRouter
from .density import DensityBackend, noise_from_config
from .statevector import StatevectorBackend


def create_router(noise: Optional[NoiseConfig] = None) -> BackendRouter:
    """Router with the exact backend and a density backend for ``noise``."""
    router = BackendRouter()
    router.register_backend(StatevectorBackend())
    router.register_backend(DensityBackend(noise_from_config(noise)))
    return router


__all__ = ["StatevectorBackend", "DensityBackend", "noise_from_config", "create_router"]
