"""Feature extraction for the zone-confirmation classifier.

Only the local measurements enter the features: the remote current is
assumed compromised once the first-stage detector has fired, so every
feature derives from ``v1`` and ``i1`` alone.  Each snapshot yields nine
quantity groups (voltage and current magnitudes and angles, their angle
difference, and apparent-impedance magnitude/angle/real/imaginary)
evaluated on six channels (phases a, b, c and the zero, positive,
negative sequences): 54 values.  Two snapshots are taken, one power
cycle before the trigger and at the trigger, for 108 features total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phasors import abc_to_seq_array, wrap_angle_array
from .scenario import Stream

#: Substitute apparent impedance when the current is too small to divide by.
IMPEDANCE_SENTINEL = 1e6
EPS_CURRENT_KA = 1e-9

GROUP_NAMES = (
    "v_mag",
    "i_mag",
    "v_ang",
    "i_ang",
    "vi_ang_diff",
    "z_mag",
    "z_ang",
    "z_re",
    "z_im",
)
CHANNEL_NAMES = ("a", "b", "c", "seq0", "seq1", "seq2")
SNAPSHOT_NAMES = ("pre", "post")

FEATURE_DIM = len(SNAPSHOT_NAMES) * len(GROUP_NAMES) * len(CHANNEL_NAMES)


class DegenerateCurrent(Exception):
    """Raised only by strict callers; extraction substitutes sentinels."""


def feature_names() -> list:
    """Column names in extraction order."""
    names = []
    for snap in SNAPSHOT_NAMES:
        for group in GROUP_NAMES:
            for ch in CHANNEL_NAMES:
                names.append(f"{snap}_{group}_{ch}")
    return names


@dataclass(frozen=True)
class FeatureVector:
    """Flat 108-value feature vector plus bookkeeping."""

    values: np.ndarray
    trigger_index: int
    degenerate_channels: int = 0

    def __post_init__(self) -> None:
        if self.values.shape != (FEATURE_DIM,):
            raise ValueError(f"feature vector must have {FEATURE_DIM} entries")


def _snapshot_features(v_abc: np.ndarray, i_abc: np.ndarray) -> tuple:
    """54 features of one snapshot; returns (values, degenerate count)."""
    v = np.concatenate([v_abc, abc_to_seq_array(v_abc)])
    i = np.concatenate([i_abc, abc_to_seq_array(i_abc)])

    v_mag = np.abs(v)
    i_mag = np.abs(i)
    v_ang = wrap_angle_array(np.angle(v))
    i_ang = wrap_angle_array(np.angle(i))

    ok = i_mag >= EPS_CURRENT_KA
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(ok, v / np.where(ok, i, 1.0), 0.0)
    z_mag = np.where(ok, np.abs(z), IMPEDANCE_SENTINEL)
    z_ang = np.where(ok, wrap_angle_array(np.angle(z)), 0.0)
    z_re = np.where(ok, z.real, IMPEDANCE_SENTINEL)
    z_im = np.where(ok, z.imag, 0.0)

    rows = [v_mag, i_mag, v_ang, i_ang, wrap_angle_array(v_ang - i_ang),
            z_mag, z_ang, z_re, z_im]
    return np.concatenate(rows), int((~ok).sum())


def pre_trigger_offset(stream: Stream) -> int:
    """Snapshot separation: one power cycle of samples."""
    return int(round(stream.samples_per_cycle))


def extract_features(stream: Stream, trigger_index: int) -> FeatureVector:
    """Pre/post-trigger local-measurement features around a trigger frame.

    The pre snapshot sits one power cycle before the trigger so it stays
    clear of the fault; the post snapshot is the trigger frame itself.
    """
    offset = pre_trigger_offset(stream)
    if trigger_index < offset:
        raise ValueError("trigger index precedes the pre-snapshot window")
    if trigger_index >= len(stream):
        raise ValueError("trigger index beyond the stream")
    values = []
    degenerate = 0
    for k in (trigger_index - offset, trigger_index):
        snap, bad = _snapshot_features(stream.v1[k], stream.i1[k])
        values.append(snap)
        degenerate += bad
    return FeatureVector(
        values=np.concatenate(values),
        trigger_index=trigger_index,
        degenerate_channels=degenerate,
    )
