"""Window-level feature assembly across the three feature families.

A window is one fundamental period of the three phase currents. The
assembled vector concatenates, per the enabled families:

  time_domain  twelve statistics per phase (36 values)
  vector       unit current-vector trajectory summary: swept surface
               area, mean vector angle, angular spread (3 values)
  haar         per-phase detail energies of the first haar_levels
               filter-bank levels (3 * haar_levels values)

The window is truncated to its leading power-of-two samples for the
filter bank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .haar import detail_energy, haar_decompose
from .timestats import FEATURE_NAMES as TIME_DOMAIN_NAMES
from .timestats import time_domain_features
from .vectors import (
    DEGENERATE_EPS,
    DegenerateVectorError,
    distribution_angle,
    dq_transform,
    vector_surface_area,
)

CHANNEL_NAMES = ("i_a", "i_b", "i_c")
VECTOR_FEATURE_NAMES = ("surface_area", "mean_angle", "distribution_angle")


@dataclass(frozen=True)
class FeatureConfig:
    """Which feature families go into the assembled vector."""

    time_domain: bool = True
    vector: bool = False
    haar_levels: int = 0

    def __post_init__(self) -> None:
        if self.haar_levels < 0:
            raise ValueError("haar_levels must be >= 0")
        if not (self.time_domain or self.vector or self.haar_levels):
            raise ValueError("feature config enables no feature family")


@dataclass(frozen=True)
class FeatureVector:
    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.names) != len(self.values):
            raise ValueError("names and values must have equal length")


def _unit_trajectory(i_a, i_b, i_c):
    vec = dq_transform(np.asarray(i_a), np.asarray(i_b), np.asarray(i_c))
    radii = np.hypot(vec.i_d, vec.i_q)
    keep = radii > DEGENERATE_EPS
    if not np.any(keep):
        raise DegenerateVectorError("window trajectory is entirely degenerate")
    return np.column_stack([vec.i_d[keep] / radii[keep], vec.i_q[keep] / radii[keep]])


def assemble_window_features(i_a, i_b, i_c, config: FeatureConfig) -> FeatureVector:
    """Feature vector of one window (nominally one fundamental period)."""
    channels = [np.asarray(ch, dtype=float) for ch in (i_a, i_b, i_c)]
    n = channels[0].size
    if any(ch.ndim != 1 or ch.size != n for ch in channels):
        raise ValueError("i_a, i_b, i_c must be equal-length 1-d arrays")
    if n < 2:
        raise ValueError("window must hold at least 2 samples")

    names: list[str] = []
    values: list[float] = []

    if config.time_domain:
        for ch_name, ch in zip(CHANNEL_NAMES, channels):
            feats = time_domain_features(ch).as_vector()
            names.extend(f"{ch_name}_{f}" for f in TIME_DOMAIN_NAMES)
            values.extend(feats)

    if config.vector:
        traj = _unit_trajectory(*channels)
        angles = np.degrees(np.arctan2(traj[:, 1], traj[:, 0])) % 360.0
        names.extend(VECTOR_FEATURE_NAMES)
        values.extend(
            [
                vector_surface_area(traj, closed=True),
                float(np.mean(angles)),
                distribution_angle(traj),
            ]
        )

    if config.haar_levels:
        pow2 = 1 << (n.bit_length() - 1) if n & (n - 1) else n
        if config.haar_levels > int(np.log2(pow2)):
            raise ValueError(f"window of {n} samples supports at most {int(np.log2(pow2))} haar levels")
        for ch_name, ch in zip(CHANNEL_NAMES, channels):
            levels = haar_decompose(ch[:pow2], config.haar_levels)
            for lvl, level in enumerate(levels, start=1):
                names.append(f"{ch_name}_haar_detail_energy_{lvl}")
                values.append(detail_energy(level))

    return FeatureVector(names=tuple(names), values=np.array(values, dtype=float))
