"""Shape reconstruction from dense planar point samples.

Dense per-frame samples along the actuator are reduced to an n-link
polyline whose nodes sit at equal fractions of the cumulative chord
length; a natural cubic spline through the nodes reconstructs the
continuous shape. Reconstruction error against the raw samples drives
the choice of the smallest adequate link count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidInputError
from .kinematics import LinkChain, LinkParams

__all__ = [
    "SensorFrame",
    "SplineCurve",
    "OrderCandidate",
    "OrderSelectionReport",
    "segment_frame",
    "fit_reference_chain",
    "frame_to_joint_angles",
    "spline_through",
    "max_deviation",
    "select_order",
    "curvature_profile",
    "wrap_angle",
]

# Curve-parameter sampling used by the deviation metric (m).
_SCAN_STEP = 1e-4
_REFINE_TOL = 1e-9


@dataclass(frozen=True)
class SensorFrame:
    """One timestamped snapshot of ordered points along the actuator.

    Points run base to tip with nominally uniform arc spacing. Only the
    planar projection is stored; reconstruction operations additionally
    require at least 4 points.
    """

    time: float
    points: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.time) and self.time >= 0):
            raise InvalidInputError(f"frame time must be >= 0, got {self.time}")
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise InvalidInputError("points must be a K x 2 array with K >= 2")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("frame points must be finite")
        if np.any(np.hypot(*(np.diff(pts, axis=0).T)) == 0.0):
            raise InvalidInputError("consecutive frame points must be distinct")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def chord_lengths(self) -> np.ndarray:
        """Cumulative chord length at every point, starting at 0 (m)."""
        seg = np.hypot(*(np.diff(self.points, axis=0).T))
        return np.concatenate([[0.0], np.cumsum(seg)])


@dataclass(frozen=True)
class SplineCurve:
    """Piecewise-cubic planar curve in a chord-length parameter.

    knots are strictly increasing parameters (m); coeffs_x / coeffs_y
    hold per-interval polynomial coefficients, highest power first, in
    the local variable (s - knot[j]).
    """

    knots: np.ndarray
    coeffs_x: np.ndarray
    coeffs_y: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        cx = np.asarray(self.coeffs_x, dtype=float)
        cy = np.asarray(self.coeffs_y, dtype=float)
        if knots.ndim != 1 or len(knots) < 2 or np.any(np.diff(knots) <= 0):
            raise InvalidInputError("knots must be strictly increasing")
        if cx.shape != (4, len(knots) - 1) or cy.shape != cx.shape:
            raise InvalidInputError("coefficients must be 4 x (len(knots)-1)")
        for arr in (knots, cx, cy):
            arr.flags.writeable = False
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "coeffs_x", cx)
        object.__setattr__(self, "coeffs_y", cy)

    @property
    def s_min(self) -> float:
        return float(self.knots[0])

    @property
    def s_max(self) -> float:
        return float(self.knots[-1])

    def evaluate(self, s) -> np.ndarray:
        """Curve points at parameters s; shape (..., 2)."""
        s = np.asarray(s, dtype=float)
        idx = np.clip(np.searchsorted(self.knots, s, side="right") - 1, 0,
                      len(self.knots) - 2)
        ds = s - self.knots[idx]
        out = np.empty(s.shape + (2,))
        for k, coeffs in ((0, self.coeffs_x), (1, self.coeffs_y)):
            val = coeffs[0, idx]
            for row in range(1, 4):
                val = val * ds + coeffs[row, idx]
            out[..., k] = val
        return out

    def derivative(self, s, order: int = 1) -> np.ndarray:
        """First or second parameter derivative at s; shape (..., 2)."""
        s = np.asarray(s, dtype=float)
        idx = np.clip(np.searchsorted(self.knots, s, side="right") - 1, 0,
                      len(self.knots) - 2)
        ds = s - self.knots[idx]
        out = np.empty(s.shape + (2,))
        for k, c in ((0, self.coeffs_x), (1, self.coeffs_y)):
            if order == 1:
                out[..., k] = (3 * c[0, idx] * ds + 2 * c[1, idx]) * ds + c[2, idx]
            elif order == 2:
                out[..., k] = 6 * c[0, idx] * ds + 2 * c[1, idx]
            else:
                raise InvalidInputError("order must be 1 or 2")
        return out


@dataclass(frozen=True)
class OrderCandidate:
    """Reconstruction errors of one candidate link count."""

    n: int
    max_error: float
    mean_error: float
    per_frame_max: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "per_frame_max", tuple(self.per_frame_max))


@dataclass(frozen=True)
class OrderSelectionReport:
    """Error sweep over candidate link counts and the selected order."""

    candidates: tuple[OrderCandidate, ...]
    chosen_n: int
    threshold: float
    threshold_met: bool

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))

    def candidate(self, n: int) -> OrderCandidate:
        for c in self.candidates:
            if c.n == n:
                return c
        raise KeyError(n)


def wrap_angle(x: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    y = math.fmod(x + math.pi, 2.0 * math.pi)
    if y <= 0.0:
        y += 2.0 * math.pi
    return y - math.pi


def segment_frame(frame: SensorFrame, n: int) -> np.ndarray:
    """Reduce a frame to n+1 node points at equal chord-length fractions.

    Node i is the frame point whose cumulative chord length is nearest
    to i/n of the total (ties toward the lower index), constrained so
    node indices strictly increase; the first and last points are always
    nodes. Returns an (n+1) x 2 array.
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    K = len(frame)
    if K < 4:
        raise InvalidInputError(f"frame needs at least 4 points, got {K}")
    if n + 1 > K:
        raise InvalidInputError(
            f"cannot place {n + 1} nodes on a frame of {K} points"
        )
    s = frame.chord_lengths
    total = s[-1]
    idx = np.empty(n + 1, dtype=int)
    idx[0] = 0
    idx[n] = K - 1
    for i in range(1, n):
        # Feasibility window leaves room for the remaining nodes.
        lo = idx[i - 1] + 1
        hi = K - 1 - (n - i)
        target = total * i / n
        k = lo + int(np.argmin(np.abs(s[lo : hi + 1] - target)))
        idx[i] = k
    return frame.points[idx]


def _chord_headings(nodes: np.ndarray) -> np.ndarray:
    """Heading of each node-to-node chord measured from the +Y base axis."""
    d = np.diff(nodes, axis=0)
    norms = np.hypot(d[:, 0], d[:, 1])
    if np.any(norms == 0.0):
        raise InvalidInputError("coincident nodes")
    # A link at heading a points along (-sin a, cos a).
    return np.arctan2(-d[:, 0], d[:, 1])


def fit_reference_chain(reference: SensorFrame, n: int) -> LinkChain:
    """Skeletonize the unactuated reference shape into an n-link chain.

    Link lengths are the node-to-node distances; rest offsets are the
    relative heading changes between consecutive chords (the first
    measured from the +Y base axis). Masses are left zero: inertial
    properties belong to build_chain.
    """
    nodes = segment_frame(reference, n)
    d = np.diff(nodes, axis=0)
    lengths = np.hypot(d[:, 0], d[:, 1])
    headings = _chord_headings(nodes)
    offsets = np.empty(n)
    offsets[0] = headings[0]
    offsets[1:] = np.diff(headings)
    links = tuple(
        LinkParams(length=float(l), offset=float(wrap_angle(o)))
        for l, o in zip(lengths, offsets)
    )
    return LinkChain(links)


def frame_to_joint_angles(frame: SensorFrame, chain: LinkChain) -> np.ndarray:
    """Joint angles that align the chain's chords with the frame's nodes.

    q_i is the chord-to-chord heading change minus the chain's rest
    offset, wrapped to (-pi, pi]. Matches the frame only up to the
    chord-length discretization of the node placement.
    """
    n = len(chain)
    nodes = segment_frame(frame, n)
    headings = _chord_headings(nodes)
    offsets = chain.offsets
    q = np.empty(n)
    prev = 0.0
    for i in range(n):
        q[i] = wrap_angle(headings[i] - prev - offsets[i])
        prev = headings[i]
    return q


def spline_through(nodes: np.ndarray) -> SplineCurve:
    """Natural cubic spline through node points, one per coordinate.

    Parameterized by cumulative chord length; second derivatives vanish
    at both ends. Needs at least 3 nodes with strictly increasing
    cumulative chord length.
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 2 or nodes.shape[1] != 2:
        raise InvalidInputError("nodes must be an m x 2 array")
    if len(nodes) < 3:
        raise InvalidInputError(f"need at least 3 nodes, got {len(nodes)}")
    seg = np.hypot(*(np.diff(nodes, axis=0).T))
    if np.any(seg == 0.0):
        raise InvalidInputError("repeated parameter values (coincident nodes)")
    s = np.concatenate([[0.0], np.cumsum(seg)])
    sx = CubicSpline(s, nodes[:, 0], bc_type="natural")
    sy = CubicSpline(s, nodes[:, 1], bc_type="natural")
    return SplineCurve(knots=s, coeffs_x=sx.c, coeffs_y=sy.c)


def _nearest_distances(curve: SplineCurve, points: np.ndarray) -> np.ndarray:
    """Distance from each point to the curve, via dense scan + refinement."""
    span = curve.s_max - curve.s_min
    m = max(2, int(math.ceil(span / _SCAN_STEP)) + 1)
    grid = np.linspace(curve.s_min, curve.s_max, m)
    samples = curve.evaluate(grid)
    # K x m squared distances; K and m stay small enough to hold at once.
    d2 = ((points[:, None, :] - samples[None, :, :]) ** 2).sum(axis=2)
    best = np.argmin(d2, axis=1)
    lo = grid[np.maximum(best - 1, 0)]
    hi = grid[np.minimum(best + 1, m - 1)]

    def dist2(s):
        diff = curve.evaluate(s) - points
        return (diff**2).sum(axis=1)

    # Vectorized ternary search on the bracketed parameter window.
    iters = max(1, int(math.ceil(math.log((2 * _SCAN_STEP) / _REFINE_TOL)
                                 / math.log(1.5))))
    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        take_hi = dist2(m1) > dist2(m2)
        lo = np.where(take_hi, m1, lo)
        hi = np.where(take_hi, hi, m2)
    s_best = 0.5 * (lo + hi)
    return np.sqrt(dist2(s_best))


def max_deviation(
    curve: SplineCurve, frame: SensorFrame
) -> tuple[float, float]:
    """(max, mean) distance from the frame's points to the curve (m)."""
    d = _nearest_distances(curve, frame.points)
    return float(d.max()), float(d.mean())


def select_order(
    frames,
    n_values,
    threshold: float,
) -> OrderSelectionReport:
    """Sweep candidate link counts over a frame sequence.

    For each candidate n the per-frame reconstruction error is the max
    deviation of that frame's node spline; the candidate's max_error and
    mean_error summarize the per-frame series. The chosen order is the
    smallest candidate whose max_error stays below the threshold, or the
    overall argmin when none qualifies (flagged via threshold_met).
    """
    frames = list(frames)
    if not frames:
        raise InvalidInputError("need at least one frame")
    n_values = sorted(set(int(n) for n in n_values))
    if not n_values:
        raise InvalidInputError("need at least one candidate order")
    if threshold <= 0:
        raise InvalidInputError(f"threshold must be > 0, got {threshold}")
    candidates = []
    for n in n_values:
        per_frame = []
        for frame in frames:
            curve = spline_through(segment_frame(frame, n))
            mx, _ = max_deviation(curve, frame)
            per_frame.append(mx)
        arr = np.asarray(per_frame)
        candidates.append(
            OrderCandidate(
                n=n,
                max_error=float(arr.max()),
                mean_error=float(arr.mean()),
                per_frame_max=tuple(float(v) for v in arr),
            )
        )
    meeting = [c for c in candidates if c.max_error < threshold]
    if meeting:
        chosen = min(meeting, key=lambda c: c.n)
        met = True
    else:
        chosen = min(candidates, key=lambda c: c.max_error)
        met = False
    return OrderSelectionReport(
        candidates=tuple(candidates),
        chosen_n=chosen.n,
        threshold=float(threshold),
        threshold_met=met,
    )


def curvature_profile(frame: SensorFrame) -> np.ndarray:
    """Discrete signed curvature along the frame, (K-2) x 2 of (s, 1/m).

    Uses the circumscribed circle of consecutive point triples (Menger
    curvature), positive for counter-clockwise bending; collinear
    triples give zero. Reported at interior points with their cumulative
    chord-length position.
    """
    if len(frame) < 5:
        raise InvalidInputError(
            f"curvature needs at least 5 points, got {len(frame)}"
        )
    pts = frame.points
    s = frame.chord_lengths
    a = pts[:-2]
    b = pts[1:-1]
    c = pts[2:]
    ab = b - a
    bc = c - b
    ac = c - a
    cross = ab[:, 0] * bc[:, 1] - ab[:, 1] * bc[:, 0]
    denom = (
        np.hypot(ab[:, 0], ab[:, 1])
        * np.hypot(bc[:, 0], bc[:, 1])
        * np.hypot(ac[:, 0], ac[:, 1])
    )
    kappa = np.where(denom > 0.0, 2.0 * cross / np.where(denom == 0, 1, denom), 0.0)
    return np.column_stack([s[1:-1], kappa])
