"""Vessel enhancement fusion and topology-aware evaluation.

Arrays are numpy arrays shaped (nz, ny, nx); spacings and origins are (x, y, z) in mm.
"""

import json

from . import _core
from ._core import (
    CHANNEL_NAMES,
    DataError,
    UsageError,
    __version__,
    cl_dice,
    dice,
    distance_transform,
    eigvalsh3,
    masked_metric,
    phantom,
    psnr,
    read_mask,
    read_volume,
    resample,
    resample_mask,
    set_threads,
    skeletonize,
    vesselness,
    write_mask,
    write_volume,
)


def hypervolume(array, spacing, scales=None, rorpo_lengths=None, polarity="bright"):
    """Original + six filter channels as a (7, nz, ny, nx) array, plus the sidecar dict."""
    hv, sidecar = _core.hypervolume(array, spacing, scales, rorpo_lengths, polarity)
    return hv, json.loads(sidecar)


def vessel_graph(mask, spacing=(1.0, 1.0, 1.0)):
    return json.loads(_core.vessel_graph(mask, spacing))


def partition(gt, spacing=(1.0, 1.0, 1.0), preset="ircad", bif_radius_mm=None):
    """Region masks keyed by class name plus "bifurcations", and the partition summary."""
    masks, summary = _core.partition(gt, spacing, preset, bif_radius_mm)
    return masks, json.loads(summary)


def evaluate(pred, gt, spacing=(1.0, 1.0, 1.0), preset="ircad", intensity=None):
    return json.loads(_core.evaluate(pred, gt, spacing, preset, intensity))


__all__ = [
    "CHANNEL_NAMES",
    "DataError",
    "UsageError",
    "cl_dice",
    "dice",
    "distance_transform",
    "eigvalsh3",
    "evaluate",
    "hypervolume",
    "masked_metric",
    "partition",
    "phantom",
    "psnr",
    "read_mask",
    "read_volume",
    "resample",
    "resample_mask",
    "set_threads",
    "skeletonize",
    "vessel_graph",
    "vesselness",
    "write_mask",
    "write_volume",
]
