"""Hierarchical adaptive voxel-guided point cloud sampling."""

from ._core import (
    HavsError,
    avs,
    generate_scene,
    read_cloud,
    recall,
    sample,
    spacing,
    write_cloud,
)

__all__ = [
    "HavsError",
    "avs",
    "generate_scene",
    "read_cloud",
    "recall",
    "sample",
    "spacing",
    "write_cloud",
]
