"""Dense vectors, intervals, and axis-aligned boxes.

All numeric state in the toolkit is 64-bit floating point.  Vectors and
matrices are plain numpy arrays; ``Box`` and ``Interval`` add the invariant
checks the rest of the package relies on.  Values are immutable once
constructed (arrays are marked read-only), so they can be shared freely
between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Interval", "Box", "box_contains", "box_center_radius"]


def _as_readonly_vector(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Interval:
    """Closed real interval [lo, hi] with lo <= hi."""

    lo: float
    hi: float

    def __post_init__(self):
        lo = float(self.lo)
        hi = float(self.hi)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("interval endpoints must be finite")
        if lo > hi:
            raise ValueError(f"invalid interval: lo={lo} > hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class Box:
    """Axis-aligned hyper-rectangle {x : lower <= x <= upper element-wise}.

    Degenerate (zero-width) boxes are legal; a point set is a valid box.
    """

    lower: np.ndarray = field()
    upper: np.ndarray = field()

    def __post_init__(self):
        lower = _as_readonly_vector(self.lower)
        upper = _as_readonly_vector(self.upper)
        if lower.shape != upper.shape:
            raise ValueError(
                f"lower/upper dimension mismatch: {lower.shape} vs {upper.shape}"
            )
        if np.any(lower > upper):
            raise ValueError("invalid box: lower > upper in some coordinate")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def corners(self) -> np.ndarray:
        """All 2^dim corner points, shape (2**dim, dim)."""
        d = self.dim
        masks = (np.arange(2**d)[:, None] >> np.arange(d)) & 1
        return np.where(masks == 1, self.upper, self.lower)

    def contains_box(self, other: "Box", tol: float = 0.0) -> bool:
        if other.dim != self.dim:
            raise ValueError("box dimension mismatch")
        return bool(
            np.all(self.lower - tol <= other.lower)
            and np.all(other.upper <= self.upper + tol)
        )


def box_contains(b: Box, x: np.ndarray, tol: float = 0.0) -> bool:
    """True iff lower - tol <= x <= upper + tol element-wise."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (b.dim,):
        raise ValueError(f"point dimension {x.shape} does not match box dim {b.dim}")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return bool(np.all(b.lower - tol <= x) and np.all(x <= b.upper + tol))


def box_center_radius(b: Box) -> tuple[np.ndarray, np.ndarray]:
    """Center and half-width vectors of a box; radius is element-wise >= 0."""
    center = (b.lower + b.upper) / 2.0
    radius = (b.upper - b.lower) / 2.0
    return center, radius
