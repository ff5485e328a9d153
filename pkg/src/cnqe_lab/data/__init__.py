"""Datasets for cnqe-lab."""

from .records import ImageRecord, Partition, DatasetSplit
from .loaders import load_dataset, load_cifar10_pair, load_raw_tensor, pack_arrays, write_raw_tensor
from .synthetic import synthetic_blobs

__all__ = [
    "ImageRecord",
    "Partition",
    "DatasetSplit",
    "load_dataset",
    "load_cifar10_pair",
    "load_raw_tensor",
    "pack_arrays",
    "write_raw_tensor",
    "synthetic_blobs",
]
