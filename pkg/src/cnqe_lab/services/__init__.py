"""Services for cnqe-lab."""

from .storage import ArtifactStore, load_checkpoint

__all__ = ["ArtifactStore", "load_checkpoint"]
