"""
Labeled random streams.

All stochastic sites draw from a Philox generator keyed by the experiment
seed and a textual label, so a stream depends only on (seed, label) and
never on the order in which other streams were consumed.
"""

import hashlib
from typing import Dict

import numpy as np


def _label_words(label: str) -> tuple:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))


def make_stream(seed: int, label: str) -> np.random.Generator:
    """Create the generator for one labeled substream."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=_label_words(label))
    return np.random.Generator(np.random.Philox(sequence))


class RngFactory:
    """Hands out labeled substreams derived from one root seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._issued: Dict[str, int] = {}

    def stream(self, label: str) -> np.random.Generator:
        """Return a fresh generator for ``label``; repeated calls replay it."""
        self._issued[label] = self._issued.get(label, 0) + 1
        return make_stream(self.seed, label)

    def child(self, prefix: str) -> "RngFactory":
        """Factory whose labels are namespaced under ``prefix``."""
        return _PrefixedFactory(self.seed, prefix)

    @property
    def issued_labels(self) -> Dict[str, int]:
        return dict(self._issued)


class _PrefixedFactory(RngFactory):
    def __init__(self, seed: int, prefix: str):
        super().__init__(seed)
        self.prefix = prefix.rstrip("/")

    def stream(self, label: str) -> np.random.Generator:
        return super().stream(f"{self.prefix}/{label}")
