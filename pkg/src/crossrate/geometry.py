"""Host-vehicle rectangle geometry.

Four oriented boundary segments with inward normals, the rigid rotation
that maps any segment onto the front-boundary configuration, and
chord/segment crossing detection for Monte-Carlo trajectories.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianDensity, symmetrize

SEGMENT_ORDER = ("front", "right", "left", "rear")

_POINT_TOL = 1e-9
_CORNER_TOL = 1e-12


@dataclass(frozen=True)
class HostRectangle:
    """Axis-aligned host footprint; front boundary at x_front (Fig. 4 frame)."""

    x_front: float = 0.0
    x_rear: float = -5.0
    y_left: float = -1.0
    y_right: float = 1.0

    def __post_init__(self):
        if not self.x_rear < self.x_front:
            raise ValueError(f"x_rear ({self.x_rear}) must be < x_front ({self.x_front})")
        if not self.y_left < self.y_right:
            raise ValueError(f"y_left ({self.y_left}) must be < y_right ({self.y_right})")

    @property
    def width(self) -> float:
        return self.y_right - self.y_left

    @property
    def length(self) -> float:
        return self.x_front - self.x_rear

    def contains(self, point) -> bool:
        x, y = point
        return (
            self.x_rear <= x <= self.x_front and self.y_left <= y <= self.y_right
        )


@dataclass(frozen=True)
class BoundarySegment:
    """One straight side of the host rectangle.

    `axis` names the coordinate pinned by the anchor line ('x' or 'y'),
    `coord` its value; the tangent interval [t_lo, t_hi] runs along the
    other coordinate.  `normal` points into the rectangle.
    """

    name: str
    axis: str
    coord: float
    t_lo: float
    t_hi: float
    normal: tuple[float, float]

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise ValueError(f"axis must be 'x' or 'y', got {self.axis!r}")
        if not self.t_lo < self.t_hi:
            raise ValueError("tangent interval is degenerate")

    def point_at(self, tangent: float) -> tuple[float, float]:
        if self.axis == "x":
            return (self.coord, tangent)
        return (tangent, self.coord)

    def frame_rotation(self) -> np.ndarray:
        """Proper rotation whose first row is -normal (front frame x-axis)."""
        nx, ny = self.normal
        return np.array([[-nx, -ny], [ny, -nx]])

    def frame_boundary_offset(self) -> float:
        """Boundary coordinate x0 in the front frame (x' = -n . p)."""
        nx, ny = self.normal
        ax, ay = self.point_at(0.5 * (self.t_lo + self.t_hi))
        return -(nx * ax + ny * ay)

    def frame_interval(self) -> tuple[float, float]:
        """Image of the tangent interval under the frame rotation."""
        rot = self.frame_rotation()
        a = rot @ np.asarray(self.point_at(self.t_lo))
        b = rot @ np.asarray(self.point_at(self.t_hi))
        lo, hi = sorted((a[1], b[1]))
        return lo, hi


@dataclass(frozen=True)
class CrossingEvent:
    """One boundary crossing, timestamped by the caller."""

    time: float
    segment: str
    point: tuple[float, float]
    kind: str  # 'entry' or 'exit'


@dataclass(frozen=True)
class ChordCrossing:
    """Crossing of a single chord, located by fraction along the chord."""

    fraction: float
    segment: str
    point: tuple[float, float]
    kind: str


def segments(rect: HostRectangle) -> tuple[BoundarySegment, ...]:
    """The four boundary segments in corner-tie-break priority order."""
    return (
        BoundarySegment(
            "front", "x", rect.x_front, rect.y_left, rect.y_right, (-1.0, 0.0)
        ),
        BoundarySegment(
            "right", "y", rect.y_right, rect.x_rear, rect.x_front, (0.0, -1.0)
        ),
        BoundarySegment(
            "left", "y", rect.y_left, rect.x_rear, rect.x_front, (0.0, 1.0)
        ),
        BoundarySegment(
            "rear", "x", rect.x_rear, rect.y_left, rect.y_right, (1.0, 0.0)
        ),
    )


def to_segment_frame(g: GaussianDensity, seg: BoundarySegment) -> GaussianDensity:
    """Rotate a 4-dim (x, y, xdot, ydot) density into the segment frame.

    In the segment frame the boundary sits at x' = frame_boundary_offset()
    with tangent interval frame_interval(), and inward motion has
    negative x'-velocity, exactly as for the front boundary.
    """
    if g.dim != 4:
        raise ValueError(f"expected a 4-dim (x, y, xdot, ydot) density, got {g.dim}")
    rot = seg.frame_rotation()
    t = np.zeros((4, 4))
    t[:2, :2] = rot
    t[2:, 2:] = rot
    return GaussianDensity(t @ g.mean, symmetrize(t @ g.cov @ t.T))


def detect_crossings(p0, p1, rect: HostRectangle) -> list[ChordCrossing]:
    """Crossings of the chord p0 -> p1 against all four sides.

    Events are ordered by fraction along the chord and labeled entry/exit
    by the chord direction against the inward normal.  Corner contacts
    resolve to a single event with front > right > left > rear priority.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    d = p1 - p0
    if d[0] == 0.0 and d[1] == 0.0:
        return []
    found: list[ChordCrossing] = []
    for seg in segments(rect):
        ai = 0 if seg.axis == "x" else 1
        ti = 1 - ai
        if d[ai] == 0.0:
            continue
        s = (seg.coord - p0[ai]) / d[ai]
        if not 0.0 <= s <= 1.0:
            continue
        tangent = p0[ti] + s * d[ti]
        if not seg.t_lo <= tangent <= seg.t_hi:
            continue
        inward = d[0] * seg.normal[0] + d[1] * seg.normal[1]
        if inward == 0.0:
            continue
        kind = "entry" if inward > 0.0 else "exit"
        found.append(ChordCrossing(s, seg.name, seg.point_at(tangent), kind))
    # stable sort keeps priority order among corner ties
    found.sort(key=lambda ev: ev.fraction)
    deduped: list[ChordCrossing] = []
    for ev in found:
        if deduped and abs(ev.fraction - deduped[-1].fraction) <= _CORNER_TOL:
            if ev.kind != deduped[-1].kind:
                # diagonal corner graze: simultaneous entry+exit touches a
                # single point without entering the interior — cancel both
                deduped.pop()
            continue
        deduped.append(ev)
    return deduped


def on_segment(point, seg: BoundarySegment, tol: float = _POINT_TOL) -> bool:
    """Whether a point lies on the named segment within tolerance."""
    x, y = point
    if seg.axis == "x":
        return abs(x - seg.coord) <= tol and seg.t_lo - tol <= y <= seg.t_hi + tol
    return abs(y - seg.coord) <= tol and seg.t_lo - tol <= x <= seg.t_hi + tol
