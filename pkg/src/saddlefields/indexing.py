"""Certified topological indices of vector and line fields at singularities.

The winding of a field along a small positively oriented circle is tracked
by nearest-lift angle accumulation.  A step below pi/4 cannot be a
misidentified lift (a true jump would need pi for vectors and pi/2 for the
branches of a cross), so the lift is refined until every step clears that
threshold, and the resulting integer (or half-integer, for line fields) is
only certified once two consecutive radii r and r/2 agree exactly.  The
radius stabilization is what stands in for "a sufficiently small
neighborhood": the index is reported as exact arithmetic, never as a float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (CertificationFailure, DegeneratePoint, NearZeroSample,
                     NoStabilization)
from .fields import ExtendedCrossField, extended_z_field
from .geometry import shape_numerator
from .poly import Poly2
from .umbilics import detect_segments

QUARTER_PI = math.pi / 4
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class IndexReport:
    """Exact half-integer index with its certification data."""

    index: Fraction
    radius_used: float
    samples_used: int
    max_step: float
    certified: bool

    @property
    def half_numerator(self) -> int:
        return int(self.index * 2)

    def to_dict(self):
        return {"index": f"{self.half_numerator}/2",
                "radius_used": self.radius_used,
                "samples_used": self.samples_used,
                "max_step": self.max_step,
                "certified": self.certified}


def _circle(center, r, n, phase=0.0):
    t = np.linspace(0.0, TWO_PI, n + 1) + phase
    return np.stack([center[0] + r * np.cos(t), center[1] + r * np.sin(t)], axis=1)


def _vector_lift_total(field, pts, min_norm_rel):
    v = np.asarray(field(pts), dtype=float)
    norms = np.hypot(v[:, 0], v[:, 1])
    scale = float(np.max(norms))
    if scale == 0.0 or float(np.min(norms)) < min_norm_rel * scale:
        raise NearZeroSample(f"field norm fell below {min_norm_rel} of scale")
    ang = np.arctan2(v[:, 1], v[:, 0])
    d = np.diff(ang)
    d = (d + math.pi) % TWO_PI - math.pi
    return float(np.sum(d)), float(np.max(np.abs(d)))


def _line_lift_total(angle_source, pts, start_branch: int = 0):
    if hasattr(angle_source, "branch_angles"):
        cands = np.asarray(angle_source.branch_angles(pts), dtype=float)
    else:
        cands = np.asarray(angle_source(pts), dtype=float)
    if cands.ndim == 1:
        cands = cands[:, None]
    cands = np.mod(cands, math.pi)
    lift = float(cands[0, min(start_branch, cands.shape[1] - 1)])
    total = 0.0
    max_step = 0.0
    for k in range(1, len(pts)):
        deltas = (cands[k] - lift + math.pi / 2) % math.pi - math.pi / 2
        j = int(np.argmin(np.abs(deltas)))
        step = float(deltas[j])
        lift += step
        total += step
        max_step = max(max_step, abs(step))
    return total, max_step


def _certified_total(tracker, center, r, *, n0, step_threshold, max_doublings):
    """Refine the sample count until every lift step clears the threshold."""
    n = n0
    phase = 0.0
    retried = False
    for _ in range(max_doublings + 1):
        try:
            total, max_step = tracker(_circle(center, r, n, phase))
        except (NearZeroSample, DegeneratePoint):
            if not retried:
                # a sample landed on a zero/stratum: rotate by half a step
                phase += math.pi / n
                retried = True
                continue
            raise
        if max_step < step_threshold:
            return total, max_step, n
        n *= 2
    raise CertificationFailure(
        f"angular steps >= {step_threshold:.3f} persist at {n} samples, radius {r}")


def _stabilized_index(tracker, center, r0, *, unit, n0, step_threshold,
                      residual_tol, max_doublings, max_halvings) -> IndexReport:
    """Shrink the radius until two consecutive certified values agree.

    ``unit`` is the lift quantum: 2*pi for vector fields (integer index),
    pi for line fields (half-integer index).
    """
    prev: Optional[Fraction] = None
    r = r0
    last = None
    for _ in range(max_halvings + 1):
        try:
            total, max_step, n = _certified_total(
                tracker, center, r, n0=n0, step_threshold=step_threshold,
                max_doublings=max_doublings)
        except (NearZeroSample, DegeneratePoint, CertificationFailure):
            prev = None
            r *= 0.5
            continue
        quanta = total / unit
        nearest = round(quanta)
        if abs(quanta - nearest) > residual_tol:
            prev = None
            r *= 0.5
            continue
        value = Fraction(nearest) if unit == TWO_PI else Fraction(nearest, 2)
        if prev is not None and value == prev:
            return IndexReport(index=value, radius_used=r, samples_used=n,
                               max_step=max_step, certified=True)
        prev = value
        last = (value, r, n, max_step)
        r *= 0.5
    raise NoStabilization(
        f"index did not stabilize after {max_halvings} radius halvings"
        + (f" (last value {last[0]})" if last else ""))


def vector_index(field: Callable, center, r0: float, *, n0: int = 64,
                 step_threshold: float = QUARTER_PI, residual_tol: float = 0.05,
                 max_doublings: int = 8, max_halvings: int = 8,
                 min_norm_rel: float = 1e-12) -> IndexReport:
    """Certified winding number of a vector field around ``center``.

    ``field`` maps an (N, 2) array of points to (N, 2) vectors and must be
    nonvanishing on the sampling circles; samples falling on a near-zero
    trigger one circle rotation by half a step, then a radius shrink.
    """
    tracker = lambda pts: _vector_lift_total(field, pts, min_norm_rel)
    return _stabilized_index(tracker, center, r0, unit=TWO_PI, n0=n0,
                             step_threshold=step_threshold,
                             residual_tol=residual_tol,
                             max_doublings=max_doublings,
                             max_halvings=max_halvings)


def line_index(angle_source, center, r0: float, *, n0: int = 64,
               step_threshold: float = QUARTER_PI, residual_tol: float = 0.05,
               max_doublings: int = 8, max_halvings: int = 8,
               start_branch: int = 0) -> IndexReport:
    """Certified half-integer index of a line field around ``center``.

    ``angle_source`` is either an object with ``branch_angles(pts)`` (a
    cross source; both branch angles are candidate lifts) or a callable
    returning mod-pi angles, shape (N,) or (N, k).  ``start_branch``
    selects which branch of a cross the lift starts on.
    """
    tracker = lambda pts: _line_lift_total(angle_source, pts, start_branch)
    return _stabilized_index(tracker, center, r0, unit=math.pi, n0=n0,
                             step_threshold=step_threshold,
                             residual_tol=residual_tol,
                             max_doublings=max_doublings,
                             max_halvings=max_halvings)


# --- composite checks -------------------------------------------------------

@dataclass(frozen=True)
class DoublingReport:
    """Ind of the rotation field Z against twice the Hessian-cross index."""

    z_index: Fraction
    cross_index: Fraction
    z_report: IndexReport
    cross_report: IndexReport

    @property
    def holds(self) -> bool:
        return self.z_index == 2 * self.cross_index

    def to_dict(self):
        return {"z_index": str(self.z_index),
                "cross_index": f"{int(self.cross_index * 2)}/2",
                "holds": self.holds,
                "z": self.z_report.to_dict(), "cross": self.cross_report.to_dict()}


def index_doubling_check(h: Poly2, center=(0.0, 0.0), r0: float = 0.4, *,
                         locus=None, **kwargs) -> DoublingReport:
    """Verify Ind(L_Z) == 2 * Ind(Hessian cross) at the origin singularity.

    Z = (-2 h_xy, h_xx - h_yy) rotates twice as fast as the solutions of
    the Hessian direction equation, so its line-field index is exactly
    twice the cross index.  Both fields are extended across umbilic
    segments by dividing out the common segment factor.
    """
    if locus is None:
        locus = detect_segments(h)
    zf = extended_z_field(h, locus)
    z_rep = vector_index(zf, center, r0, **kwargs)
    cross = ExtendedCrossField(h, locus=locus, t=1.0)
    c_rep = line_index(cross, center, r0, **kwargs)
    return DoublingReport(z_index=z_rep.index, cross_index=c_rep.index,
                          z_report=z_rep, cross_report=c_rep)


@dataclass(frozen=True)
class HomotopyInvarianceReport:
    t_grid: Tuple[float, ...]
    indices: Tuple[Fraction, ...]
    reports: Tuple[IndexReport, ...]

    @property
    def constant(self) -> bool:
        return len(set(self.indices)) == 1

    def to_dict(self):
        return {"t_grid": list(self.t_grid),
                "indices": [f"{int(i * 2)}/2" for i in self.indices],
                "constant": self.constant}


def homotopy_invariance_check(h: Poly2, t_grid: Sequence[float],
                              center=(0.0, 0.0), r0: float = 0.4, *,
                              ambient: str = "spherical", locus=None,
                              **kwargs) -> HomotopyInvarianceReport:
    """Indices of the interpolated cross fields across the t grid.

    Topological invariance demands a constant value; the report says
    whether the computed certified indices agree.
    """
    if locus is None:
        locus = detect_segments(h)
    reports = []
    for t in t_grid:
        src = ExtendedCrossField(h, ambient=ambient, locus=locus, t=float(t))
        reports.append(line_index(src, center, r0, **kwargs))
    return HomotopyInvarianceReport(t_grid=tuple(float(t) for t in t_grid),
                                    indices=tuple(r.index for r in reports),
                                    reports=tuple(reports))


def poincare_hopf_sum(singularities: Iterable) -> Fraction:
    """Exact sum of half-integer indices over a singularity list.

    Entries are (chart, center, index) with index a Fraction or an
    IndexReport; completeness of the list is the caller's responsibility.
    """
    total = Fraction(0)
    for entry in singularities:
        idx = entry[2] if isinstance(entry, (tuple, list)) else entry
        if isinstance(idx, IndexReport):
            idx = idx.index
        total += Fraction(idx)
    return total
