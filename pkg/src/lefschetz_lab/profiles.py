"""Monotone one-dimensional profiles for Condition A maps.

A profile is a piecewise-linear function whose corners are rounded by
convolution with a triweight kernel of half-width ``h``.  Away from the
corners it is exactly linear, so the collar pieces stay exact, and the
rounding is a convex combination of neighbouring slopes, so a monotone
polyline stays monotone.  The result is C^4.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

# Antiderivatives of the triweight kernel K(x) = 35/32 (1 - x^2)^3 on [-1, 1].
_K = np.polynomial.Polynomial([35 / 32, 0, -105 / 32, 0, 105 / 32, 0, -35 / 32])
_S = _K.integ(lbnd=-1)          # smoothed step, S(-1) = 0, S(1) = 1
_R = _S.integ(lbnd=-1)          # smoothed ramp, R(x) = x for x >= 1


def _ramp(x: np.ndarray, h: float, order: int) -> np.ndarray:
    """Smoothed ``max(x, 0)`` with half-width h and its derivatives."""
    z = np.clip(x / h, -1.0, 1.0)
    inside = np.abs(x) < h
    if order == 0:
        out = np.where(x >= h, x, 0.0)
        return np.where(inside, h * _R(z), out)
    if order == 1:
        return np.where(inside, _S(z), (x >= h).astype(float))
    if order == 2:
        return np.where(inside, _K(z) / h, 0.0)
    raise ValueError(order)


@dataclass(frozen=True)
class Profile:
    """Rounded polyline ``y(x)``; linear outside the rounded corners."""

    x0: float
    y0: float
    slope0: float
    corners: Tuple[float, ...]
    jumps: Tuple[float, ...]
    h: float

    @classmethod
    def through(cls, start_slope: float, points: Sequence[Tuple[float, float]],
                end_slope: float, h: float) -> "Profile":
        """Polyline with given end slopes whose corners are ``points``."""
        pts = [(float(a), float(b)) for a, b in points]
        xs = [p[0] for p in pts]
        if any(b - a <= 2 * h for a, b in zip(xs, xs[1:])):
            raise ValueError("profile corners closer than twice the rounding width")
        slopes = [start_slope]
        for (xa, ya), (xb, yb) in zip(pts, pts[1:]):
            slopes.append((yb - ya) / (xb - xa))
        slopes.append(end_slope)
        jumps = tuple(b - a for a, b in zip(slopes, slopes[1:]))
        return cls(pts[0][0], pts[0][1], start_slope, tuple(xs), jumps, float(h))

    @property
    def segment_slopes(self) -> List[float]:
        out = [self.slope0]
        for j in self.jumps:
            out.append(out[-1] + j)
        return out

    def __call__(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        if order == 0:
            y = self.y0 + self.slope0 * (x - self.x0)
        elif order == 1:
            y = np.full_like(x, self.slope0)
        else:
            y = np.zeros_like(x)
        for xc, dm in zip(self.corners, self.jumps):
            y = y + dm * _ramp(x - xc, self.h, order)
        return y

    def is_strictly_monotone(self) -> bool:
        s = np.array(self.segment_slopes)
        return bool(np.all(s > 0) or np.all(s < 0))

    def linear_outside(self) -> Tuple[float, float]:
        """Interval outside which the profile equals its end lines exactly."""
        return self.corners[0] - self.h, self.corners[-1] + self.h
