"""Power-loss parsing from image filenames.

Deep Solar Eye images encode per-image metadata in the filename as
``..._L_<power loss>_I_<irradiance>.jpg``; the default pattern captures
the loss fraction. The pattern is configurable because other datasets
name files differently — it must contain exactly one capture group.
"""

from __future__ import annotations

import re

DEFAULT_POWER_LOSS_REGEX = r"_L_([0-9]*\.?[0-9]+)_I_"


def compile_pattern(pattern: str) -> re.Pattern:
    compiled = re.compile(pattern)
    if compiled.groups != 1:
        raise ValueError(
            f"power-loss pattern must have exactly one capture group, got {compiled.groups}"
        )
    return compiled


def parse_power_loss(filename: str, pattern: re.Pattern) -> float:
    match = pattern.search(filename)
    if match is None:
        raise ValueError(f"no power-loss match in filename: {filename!r}")
    value = float(match.group(1))
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"power loss {value} outside [0, 1] in filename: {filename!r}")
    return value
