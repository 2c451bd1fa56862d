"""Implicit padding modes resolved to explicit per-dim amounts.

"valid" pads nothing. "same" picks the padding that keeps out = ceil(in/s);
the required total per dim is t = max(0, (ceil(in/s) - 1)*s + k - in), split
evenly. An odd total cannot be split symmetrically, which the numeric
representation requires, so it raises AsymmetricPadding.
"""

from __future__ import annotations

import math

from netforge.errors import AsymmetricPadding

SAME = "same"
VALID = "valid"
CUSTOM = "custom"


def same_total(in_dim, kernel, stride):
    """Total padding a dim needs so that out = ceil(in/stride)."""
    return max(0, (math.ceil(in_dim / stride) - 1) * stride + kernel - in_dim)


def resolve_padding(mode, input_dims, kernel, stride):
    """Numeric per-dim padding for a windowed layer.

    `mode` is "same", "valid", or an explicit numeric sequence (passed
    through unchanged). `input_dims` are the spatial dims aligned with
    `kernel` and `stride`.
    """
    if isinstance(mode, (list, tuple)):
        return tuple(int(p) for p in mode)
    if mode == VALID:
        return tuple(0 for _ in kernel)
    if mode != SAME:
        raise ValueError(f"unknown padding mode {mode!r}")
    pads = []
    for i, (d, k, s) in enumerate(zip(input_dims, kernel, stride)):
        t = same_total(d, k, s)
        if t % 2:
            raise AsymmetricPadding(i, t)
        pads.append(t // 2)
    return tuple(pads)
