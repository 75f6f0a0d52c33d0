"""Detection and classification of the umbilic set of a saddle graph.

Under the saddle condition the umbilic points of the graph of h are exactly
the zeros of the Hessian of h.  For analytic saddle inputs any
one-dimensional component is a straight segment through the origin, so
detection is algebraic: a segment with unit normal (cos t, sin t) exists
iff the corresponding linear form divides h to order >= 3.  Candidate
normals come from the multiple projective roots of the lowest homogeneous
part; a grid scan then confirms no Hessian zeros are left unexplained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import LowOrder, OrderTooLow, UnclassifiedZeros, ZeroFunction
from .poly import (Disk, JetEvaluator, Poly2, SegmentFactorization,
                   lowest_homogeneous_part, segment_factorization)

ISOLATED_ORIGIN = "isolated_origin"
SEGMENT = "segment"


@dataclass(frozen=True)
class UmbilicStratum:
    """One stratum of the umbilic set near the origin."""

    kind: str
    theta: Optional[float] = None
    factorization: Optional[SegmentFactorization] = None

    def __post_init__(self):
        if self.kind not in (ISOLATED_ORIGIN, SEGMENT):
            raise ValueError(f"unknown stratum kind {self.kind!r}")
        if self.kind == SEGMENT and (self.theta is None or self.factorization is None):
            raise ValueError("segment strata need theta and a factorization")

    @property
    def vanishing_order(self) -> Optional[int]:
        return None if self.factorization is None else self.factorization.n

    def line_distance(self, xs, ys):
        """Distance from points to the full segment line through the origin."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.abs(c * np.asarray(xs, float) + s * np.asarray(ys, float))

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == SEGMENT:
            d["theta"] = float(self.theta)
            d["n"] = self.factorization.n
            d["eta_terms"] = self.factorization.to_dict()["eta_terms"]
        return d


@dataclass(frozen=True)
class LocusReport:
    strata: Tuple[UmbilicStratum, ...]
    residual_zero_points: Tuple[Tuple[float, float], ...] = ()
    grid_n: int = 0
    tol: float = 0.0

    @property
    def segments(self) -> Tuple[UmbilicStratum, ...]:
        return tuple(s for s in self.strata if s.kind == SEGMENT)

    @property
    def classified(self) -> bool:
        return not self.residual_zero_points

    def to_dict(self):
        return {"strata": [s.to_dict() for s in self.strata],
                "residual_zero_points": [list(p) for p in self.residual_zero_points],
                "grid_n": self.grid_n, "tol": self.tol}


def _normalize_affine(h: Poly2) -> Poly2:
    """Subtract value and gradient at the origin (Hessian unchanged)."""
    return h - Poly2([(0, 0, h.coeff(0, 0)), (1, 0, h.coeff(1, 0)),
                      (0, 1, h.coeff(0, 1))])


def _candidate_normals(omega: Poly2, min_multiplicity: int = 3) -> List[float]:
    """Normal angles of linear factors of multiplicity >= 3 of omega.

    Works on the dehomogenized polynomial P(t) = omega(1, t); a root t0 of
    multiplicity k corresponds to the factor (y - t0 x)^k (normal direction
    (-t0, 1)), and a degree deficiency of P corresponds to a power of x
    (normal direction (1, 0)).  Clustered float roots are Newton-refined on
    the (k-1)-th derivative, where the multiple root becomes simple.
    """
    m = omega.degree
    coeffs = np.array([float(omega.coeff(m - k, k)) for k in range(m + 1)])
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        return []
    trimmed = np.where(np.abs(coeffs) > 1e-12 * scale, coeffs, 0.0)
    nz = np.nonzero(trimmed)[0]
    d = int(nz[-1])
    out: List[float] = []
    if m - d >= min_multiplicity:
        out.append(0.0)  # factor x^(m-d): normal (1, 0)
    if d >= 1:
        p = np.polynomial.Polynomial(trimmed[: d + 1])
        roots = p.roots()
        # a k-fold root scatters into a complex k-gon of radius ~eps^(1/k)
        # under coefficient noise, so cluster in C and keep near-real means
        order = np.argsort(roots.real)
        roots = roots[order]
        clusters: List[List[complex]] = []
        for t in roots:
            if clusters and abs(t - clusters[-1][-1]) < 2e-2 * (1 + abs(t)):
                clusters[-1].append(complex(t))
            else:
                clusters.append([complex(t)])
        for cl in clusters:
            k = len(cl)
            if k < min_multiplicity:
                continue
            mean = complex(np.mean(cl))
            if abs(mean.imag) > 1e-6 * (1 + abs(mean.real)):
                continue
            t0 = _refine_multiple_root(p, mean.real, k)
            out.append(math.atan2(1.0, -t0) % math.pi)
    return out


def _refine_multiple_root(p, t0: float, mult: int, iters: int = 30) -> float:
    """Newton iterations on p^(mult-1), where the root is simple."""
    pk = p.deriv(mult - 1)
    dpk = pk.deriv()
    for _ in range(iters):
        denom = dpk(t0)
        if denom == 0:
            break
        step = pk(t0) / denom
        t0 -= step
        if abs(step) < 1e-15 * (1 + abs(t0)):
            break
    return t0


def detect_segments(h: Poly2, rel_tol: float = 1e-9) -> List[UmbilicStratum]:
    """Confirmed umbilic segments of h (affine part ignored)."""
    h0 = _normalize_affine(h)
    if h0.is_zero:
        return []
    _, omega = lowest_homogeneous_part(h0)
    strata: List[UmbilicStratum] = []
    seen: List[float] = []
    for theta in _candidate_normals(omega):
        try:
            fac = segment_factorization(h0, theta, rel_tol=rel_tol)
        except (OrderTooLow, ZeroFunction, ValueError):
            continue
        if any(abs((theta - t) % math.pi) < 1e-9 or
               abs((theta - t) % math.pi - math.pi) < 1e-9 for t in seen):
            continue
        seen.append(theta)
        strata.append(UmbilicStratum(SEGMENT, theta=theta, factorization=fac))
    return strata


def _bisect_entry_zero(poly: Poly2, p1, p2, iters: int = 60):
    """Root of ``poly`` on the segment [p1, p2], by bisection."""
    a, b = 0.0, 1.0
    fa = float(poly(*p1))
    pt = lambda t: (p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1]))
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = float(poly(*pt(m)))
        if fa * fm <= 0:
            b = m
        else:
            a, fa = m, fm
    return pt(0.5 * (a + b))


def _grid_zero_points(h: Poly2, region: Disk, grid_n: int, tol_abs: float):
    """Points where all three Hessian entries vanish, at grid resolution.

    Direct hits (all entries below tol_abs at a grid point) are kept as-is.
    A zero curve that runs between grid points is caught by cells where
    every entry either changes sign or is already below tol_abs; the
    candidate is refined by bisecting the entry with the largest swing and
    then re-tested against tol_abs, so rank-one degeneracies (where only
    some entries vanish) are not reported.
    """
    cx, cy = region.center
    side = np.linspace(-region.radius, region.radius, grid_n)
    gx, gy = np.meshgrid(side, side, indexing="ij")
    gx = gx + cx
    gy = gy + cy
    inside = (gx - cx) ** 2 + (gy - cy) ** 2 <= region.radius**2 * (1 + 1e-12)
    jets = JetEvaluator(h)
    _, _, _, fxx, fxy, fyy = jets.many(gx, gy)
    entries = np.stack([fxx, fxy, fyy])
    mags = np.max(np.abs(entries), axis=0)
    points = [(float(a), float(b)) for a, b in
              zip(gx[inside & (mags <= tol_abs)], gy[inside & (mags <= tol_abs)])]

    hessian_polys = (jets.fxx, jets.fxy, jets.fyy)

    def scan_pairs(e1, e2, x1, y1, x2, y2, ok):
        crossing = np.all((e1 * e2 <= 0) | (np.abs(e1) <= tol_abs)
                          | (np.abs(e2) <= tol_abs), axis=0)
        idx = np.nonzero(crossing & ok)
        for a, b in zip(*idx):
            p1 = (x1[a, b], y1[a, b])
            p2 = (x2[a, b], y2[a, b])
            swings = [abs(e1[k][a, b] - e2[k][a, b]) for k in range(3)]
            k = int(np.argmax(swings))
            root = _bisect_entry_zero(hessian_polys[k], p1, p2)
            if max(abs(float(p(*root))) for p in hessian_polys) <= tol_abs:
                points.append((float(root[0]), float(root[1])))

    scan_pairs(entries[:, :-1, :], entries[:, 1:, :], gx[:-1, :], gy[:-1, :],
               gx[1:, :], gy[1:, :], inside[:-1, :] & inside[1:, :])
    scan_pairs(entries[:, :, :-1], entries[:, :, 1:], gx[:, :-1], gy[:, :-1],
               gx[:, 1:], gy[:, 1:], inside[:, :-1] & inside[:, 1:])
    return points, float(np.max(mags[inside]))


def umbilic_locus(h: Poly2, region: Disk, grid_n: int = 64, tol: float = 1e-9,
                  dist_tol: Optional[float] = None, strict: bool = True) -> LocusReport:
    """Classify the umbilic set of the graph of h over the region.

    Segments are found by exact divisibility; a grid scan of the Hessian
    then requires every zero (all three entries below ``tol`` relative to
    the largest entry on the grid, located at grid resolution) to lie near
    a detected segment line or the origin.  ``dist_tol`` defaults to two
    grid spacings, the resolution at which the grid localizes zero sets.
    With ``strict=True`` unexplained zeros raise UnclassifiedZeros
    (carrying the report); otherwise they are returned in the report.
    """
    if h.degree < 2:
        raise LowOrder("h must be nonlinear")
    strata = detect_segments(h)
    # first pass to fix the scale, second to collect zeros against it
    xs, ys = region.grid(grid_n)
    jets = JetEvaluator(h)
    _, _, _, fxx, fxy, fyy = jets.many(xs, ys)
    scale = float(np.max(np.maximum(np.abs(fxx), np.maximum(np.abs(fxy), np.abs(fyy)))))
    tol_abs = tol * max(scale, 1e-300)
    zeros, _ = _grid_zero_points(h, region, grid_n, tol_abs)
    spacing = 2.0 * region.radius / (grid_n - 1)
    if dist_tol is None:
        dist_tol = 2.0 * spacing
    residual = []
    cx, cy = region.center
    for zx, zy in zeros:
        if math.hypot(zx - cx, zy - cy) <= dist_tol:
            continue
        if any(float(s.line_distance(zx, zy)) <= dist_tol for s in strata):
            continue
        residual.append((zx, zy))
    if not strata:
        strata = [UmbilicStratum(ISOLATED_ORIGIN)]
    report = LocusReport(strata=tuple(strata), residual_zero_points=tuple(residual),
                         grid_n=grid_n, tol=tol)
    if strict and residual:
        raise UnclassifiedZeros(
            f"{len(residual)} Hessian zeros not explained by segments or the origin",
            report=report)
    return report


def straightness_check(samples: Sequence) -> float:
    """Max distance from the samples to their best-fit line through the origin."""
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("need at least 3 samples")
    # direction = dominant eigenvector of the 2x2 scatter matrix
    scatter = pts.T @ pts
    _, vecs = np.linalg.eigh(scatter)
    direction = vecs[:, -1]
    normal = np.array([-direction[1], direction[0]])
    return float(np.max(np.abs(pts @ normal)))
