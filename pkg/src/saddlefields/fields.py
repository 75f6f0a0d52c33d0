"""Line and cross fields of saddle graphs, with extension across segments.

Along an umbilic segment with unit normal (cos t, sin t) and vanishing
order n, every entry of the Hessian, of the shape numerator B and of any
homotopy mix of the two carries the polynomial factor u^(n-2), where
u = cos(t) x + sin(t) y.  The principal-direction equation is homogeneous
in these entries, so dividing the factor out (exact polynomial division)
changes nothing off the segment and produces a field that stays defined on
the segment itself, where it is tangent/normal to it.  That division is
the analytic extension; everything in this module is built on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (CertificationFailure, DegeneratePoint, NoDirectionFound,
                     OriginQuery)
from .geometry import (CrossSample, ShapeNumerator, cross_angles_many,
                       cross_from_matrix, shape_numerator)
from .poly import Disk, JetEvaluator, Poly2, rotation_pair
from .umbilics import LocusReport, UmbilicStratum, detect_segments

QUARTER_PI = math.pi / 4


# --- elementary fields ----------------------------------------------------

def grad_directional_polys(h: Poly2, nu) -> Tuple[Poly2, Poly2]:
    """Polynomial components of grad <grad h, nu>."""
    c, s = float(nu[0]), float(nu[1])
    hx = h.diff("x")
    hy = h.diff("y")
    hxx, hxy, hyy = hx.diff("x"), hx.diff("y"), hy.diff("y")
    return hxx * c + hxy * s, hxy * c + hyy * s


def grad_directional(h: Poly2, nu, pt) -> np.ndarray:
    """Gradient of the directional derivative h_nu at ``pt``; |nu| must be 1."""
    if abs(math.hypot(float(nu[0]), float(nu[1])) - 1.0) > 1e-9:
        raise ValueError("nu must be a unit vector")
    p1, p2 = grad_directional_polys(h, nu)
    x, y = pt
    return np.array([float(p1(x, y)), float(p2(x, y))])


def z_polys(h: Poly2) -> Tuple[Poly2, Poly2]:
    """Components (-2 h_xy, h_xx - h_yy); never zero off umbilics for saddles."""
    hx = h.diff("x")
    hy = h.diff("y")
    return -2 * hx.diff("y"), hx.diff("x") - hy.diff("y")


def z_field(h: Poly2, pt) -> np.ndarray:
    z1, z2 = z_polys(h)
    x, y = pt
    return np.array([float(z1(x, y)), float(z2(x, y))])


# --- exact division by the segment factors --------------------------------

def _segment_strata(locus) -> Tuple[UmbilicStratum, ...]:
    if locus is None:
        return ()
    if isinstance(locus, LocusReport):
        return locus.segments
    return tuple(s for s in locus if s.kind == "segment")


def divide_out_strata(p: Poly2, strata: Sequence[UmbilicStratum],
                      rel_tol: float = 1e-9) -> Poly2:
    """Divide out u_j^(n_j - 2) for every segment stratum.

    The divisions are exact for the fields this module builds; a large
    remainder means the strata do not belong to the polynomial and is an
    error.
    """
    out = p
    for s in strata:
        c, sn = rotation_pair(s.theta)
        for _ in range(s.factorization.n - 2):
            scale = out.max_abs_coeff()
            quo, rem = out.divide_linear(c, sn)
            if rem.max_abs_coeff() > rel_tol * max(scale, 1e-300):
                raise ValueError(
                    f"entry is not divisible by the segment factor at theta={s.theta}")
            out = quo.strip_small(1e-13)
    return out


class ExtendedVectorField:
    """Polynomial vector field with the segment factors divided out.

    Used for grad h_nu and for Z: both vanish on umbilic segments to order
    n-2, and dividing that factor out leaves a field that is continuous and
    nonzero on the segments (away from the origin), so its line field is
    the analytic extension.
    """

    def __init__(self, v1: Poly2, v2: Poly2, locus=None):
        strata = _segment_strata(locus)
        self.raw = (v1, v2)
        self.v1 = divide_out_strata(v1, strata)
        self.v2 = divide_out_strata(v2, strata)
        self.strata = strata

    def vectors_many(self, xs, ys) -> np.ndarray:
        return np.stack([self.v1.eval_many(xs, ys), self.v2.eval_many(xs, ys)], axis=-1)

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return self.vectors_many(pts[..., 0], pts[..., 1])

    def angles_many(self, pts) -> np.ndarray:
        """Line angles mod pi of the extended field."""
        v = self(pts)
        return np.mod(np.arctan2(v[..., 1], v[..., 0]), math.pi)


def extended_grad_field(h: Poly2, nu, locus=None) -> ExtendedVectorField:
    return ExtendedVectorField(*grad_directional_polys(h, nu), locus=locus)


def extended_z_field(h: Poly2, locus=None) -> ExtendedVectorField:
    return ExtendedVectorField(*z_polys(h), locus=locus)


# --- matrix cross sources --------------------------------------------------

def hessian_entry_polys(h: Poly2) -> Tuple[Poly2, Poly2, Poly2]:
    hx = h.diff("x")
    return hx.diff("x"), hx.diff("y"), h.diff("y").diff("y")


@dataclass(frozen=True)
class HomotopyField:
    """Interpolation m(t) = (1-t) * (II I^{-1}) + t * Hess(h) at fixed t.

    t=0 is the principal cross, t=1 the Hessian cross; the shape operator
    side is mu * B with the exact positive scale, so the interpolation path
    matches the definition and not merely its direction field.
    """

    h: Poly2
    shape: ShapeNumerator
    t: float

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError("t must lie in [0, 1]")

    def matrix(self, pt) -> np.ndarray:
        x, y = float(pt[0]), float(pt[1])
        jets = self.shape.jets.at((x, y))
        hess = np.array([[jets.fxx, jets.fxy], [jets.fxy, jets.fyy]], dtype=float)
        if self.t == 1.0:
            return hess
        b = self.shape.at(pt) * self.shape.positive_scale(pt)
        return (1.0 - self.t) * b + self.t * hess

    def cross(self, pt) -> CrossSample:
        try:
            return cross_from_matrix(self.matrix(pt))
        except Exception as exc:
            raise DegeneratePoint(f"homotopy matrix degenerates at {tuple(pt)}") from exc


def homotopy_cross(h: Poly2, shape: ShapeNumerator, t: float, pt) -> CrossSample:
    """Cross of the interpolated matrix at ``pt`` (no segment extension).

    Raises DegeneratePoint where all direction coefficients vanish, which
    under the saddle condition happens only at umbilic points.
    """
    return HomotopyField(h=h, shape=shape, t=t).cross(pt)


class ExtendedCrossField:
    """Principal / homotopy cross field with analytic segment extension.

    ``t`` selects the matrix family: 0 the shape numerator (principal
    directions), 1 the Hessian, in between the exact homotopy mix.  Inside
    a band of half-width ``band`` around each segment line the divided
    matrices are used; outside, the plain ones.  The two agree up to a
    nonzero scalar wherever both are defined, so the choice only affects
    conditioning, not the cross.
    """

    def __init__(self, h: Poly2, ambient: str = "spherical", locus=None,
                 t: float = 0.0, band: Optional[float] = None,
                 region_radius: float = 1.0):
        if locus is None:
            locus = detect_segments(h)
        self.h = h
        self.ambient = ambient
        self.t = float(t)
        self.strata = _segment_strata(locus)
        self.band = band if band is not None else 1e-3 * region_radius
        self.shape = shape_numerator(h, ambient) if self.t < 1.0 else None
        self.jets = JetEvaluator(h)
        hxx, hxy, hyy = hessian_entry_polys(h)
        self._hess = (hxx, hxy, hxy, hyy)
        if self.shape is not None:
            self._b = self.shape.entries
            self._b_ext = tuple(divide_out_strata(p, self.strata) for p in self._b)
        self._hess_ext = tuple(divide_out_strata(p, self.strata) for p in self._hess)

    # matrix entries (m11, m12, m21, m22) at array points
    def matrix_many(self, xs, ys, extended: bool = True):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        hess = self._hess_ext if extended else self._hess
        if self.t == 1.0:
            return tuple(p.eval_many(xs, ys) for p in hess)
        b = self._b_ext if extended else self._b
        bv = [p.eval_many(xs, ys) for p in b]
        if self.t == 0.0:
            return tuple(bv)
        mu = self.shape.positive_scale_many(xs, ys)
        hv = [p.eval_many(xs, ys) for p in hess]
        return tuple((1.0 - self.t) * mu * bb + self.t * hh for bb, hh in zip(bv, hv))

    def in_band(self, xs, ys) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        mask = np.zeros(np.broadcast(xs, ys).shape, dtype=bool)
        for s in self.strata:
            mask |= s.line_distance(xs, ys) <= self.band
        return mask

    def cross_many(self, xs, ys, extended: bool = True):
        m11, m12, m21, m22 = self.matrix_many(xs, ys, extended=extended)
        return cross_angles_many(m11, m12, m21, m22)

    def branch_angles(self, pts) -> np.ndarray:
        """(N, 2) candidate branch angles mod pi, for continuation/indexing."""
        pts = np.asarray(pts, dtype=float)
        t1, t2, degen = self.cross_many(pts[..., 0], pts[..., 1])
        if np.any(degen):
            k = int(np.argmax(degen))
            raise DegeneratePoint(f"cross degenerate at sample {pts[k]}")
        return np.stack([t1, t2], axis=-1)

    def label_matrix_many(self, xs, ys):
        """Undivided matrix of the same family, for curvature-order labels."""
        return self.matrix_many(xs, ys, extended=False)

    def cross_at(self, pt, extended: Optional[bool] = None) -> CrossSample:
        x, y = float(pt[0]), float(pt[1])
        if math.hypot(x, y) == 0.0:
            raise OriginQuery("the extended cross has a singularity at the origin")
        if extended is None:
            extended = bool(self.in_band(np.array([x]), np.array([y]))[0]) \
                if self.strata else False
        t1, t2, degen = self.cross_many(np.array([x]), np.array([y]), extended=extended)
        if bool(degen[0]):
            raise DegeneratePoint(f"cross degenerate at {pt}")
        return CrossSample(float(t1[0]), float(t2[0]))


def extended_cross(h: Poly2, locus, source, pt, band: Optional[float] = None) -> CrossSample:
    """Cross at ``pt``, using the divided matrices inside the segment bands.

    ``source`` may be a ShapeNumerator (principal directions), a
    HomotopyField, or the string ``"hessian"``.  Off all bands this equals
    the ordinary cross of the source; on a segment it returns the
    tangent/normal pair.  The origin is a genuine singularity: OriginQuery.
    """
    if isinstance(source, ShapeNumerator):
        fieldsrc = ExtendedCrossField(h, ambient=source.ambient, locus=locus,
                                      t=0.0, band=band)
    elif isinstance(source, HomotopyField):
        fieldsrc = ExtendedCrossField(h, ambient=source.shape.ambient, locus=locus,
                                      t=source.t, band=band)
    elif source == "hessian":
        fieldsrc = ExtendedCrossField(h, locus=locus, t=1.0, band=band)
    else:
        raise TypeError(f"unsupported cross source {source!r}")
    return fieldsrc.cross_at(pt)


# --- admissible directions -------------------------------------------------

def admissible_direction(h: Poly2, locus, region: Disk, *, n_angles: int = 64,
                         n_probes: int = 512, seed: int = 0,
                         band: Optional[float] = None,
                         min_rel_norm: float = 1e-10) -> np.ndarray:
    """First scanned direction nu with grad h_nu nonzero off the strata.

    Scans ``n_angles`` equally spaced angles in [0, pi); accepts the first
    that is transverse to every segment (angle to the tangent > pi/64) and
    whose directional-gradient field clears ``min_rel_norm`` times the
    Hessian scale at ``n_probes`` random region points outside the strata
    bands.  Raises NoDirectionFound when the scan is exhausted (the caller
    should shrink the region).
    """
    strata = _segment_strata(locus)
    delta = band if band is not None else 1e-3 * region.radius
    rng = np.random.default_rng(seed)
    probes = []
    attempts = 0
    while len(probes) < n_probes and attempts < 50:
        m = 4 * (n_probes - len(probes))
        rr = region.radius * np.sqrt(rng.uniform(size=m))
        aa = rng.uniform(0, 2 * math.pi, size=m)
        px = region.center[0] + rr * np.cos(aa)
        py = region.center[1] + rr * np.sin(aa)
        ok = np.ones(m, dtype=bool)
        for s in strata:
            ok &= s.line_distance(px, py) > delta
        probes.extend(zip(px[ok], py[ok]))
        attempts += 1
    if len(probes) < n_probes:
        raise NoDirectionFound("could not sample enough points off the strata")
    probes = np.array(probes[:n_probes])
    jets = JetEvaluator(h)
    _, _, _, fxx, fxy, fyy = jets.many(probes[:, 0], probes[:, 1])
    scale = max(float(np.max(np.abs(fxx))), float(np.max(np.abs(fxy))),
                float(np.max(np.abs(fyy))), 1e-300)
    tangents = [s.theta + math.pi / 2 for s in strata]
    for k in range(n_angles):
        ang = k * math.pi / n_angles
        if any(_mod_pi_dist(ang, tg) <= math.pi / 64 for tg in tangents):
            continue
        c, s = math.cos(ang), math.sin(ang)
        g1 = c * fxx + s * fxy
        g2 = c * fxy + s * fyy
        if np.all(np.hypot(g1, g2) > min_rel_norm * scale):
            return np.array([c, s])
    raise NoDirectionFound("no admissible direction in the scan; shrink the region")


def _mod_pi_dist(a: float, b: float) -> float:
    d = (a - b) % math.pi
    return min(d, math.pi - d)


# --- branch continuation ----------------------------------------------------

@dataclass
class LineBranch:
    """A continuously lifted branch of a cross field along a path."""

    path: np.ndarray
    angles: np.ndarray            # continuous lifts, not reduced mod pi
    labels: List[str]             # 'L1' | 'L2' | 'extended' per sample
    crossings: List[Tuple[int, int]]   # (stratum index, sample index before)
    swaps: int
    max_step: float
    certified: bool

    @property
    def total_rotation(self) -> float:
        return float(self.angles[-1] - self.angles[0])


def _branch_candidates(source, pts) -> np.ndarray:
    if hasattr(source, "branch_angles"):
        a = source.branch_angles(pts)
    else:
        a = np.asarray(source(pts), dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    return np.mod(a, math.pi)


def _refine_path(path: np.ndarray, bad: np.ndarray) -> np.ndarray:
    """Insert chord midpoints after every sample flagged in ``bad``."""
    out = []
    for k in range(len(path) - 1):
        out.append(path[k])
        if bad[k]:
            out.append(0.5 * (path[k] + path[k + 1]))
    out.append(path[-1])
    return np.array(out)


def continue_branch(source, path, start_angle: Optional[float] = None, *,
                    step_threshold: float = QUARTER_PI, max_refine: int = 10,
                    label_gap_rel: float = 1e-10) -> LineBranch:
    """Continuous lift of one cross branch along a polyline.

    At each sample the branch angle nearest (mod pi) to the previous lift
    is chosen; a genuine branch mix-up would need a step >= pi/4, so the
    lift is certified when every step stays below that.  Offending
    intervals get chord midpoints inserted, up to ``max_refine`` rounds;
    persisting large steps raise CertificationFailure (the path runs too
    close to a singularity).

    Labels track which principal branch the lift follows, by comparing the
    branch's Rayleigh quotient with the eigenvalues of the undivided
    matrix; samples inside the segment bands (or with no usable eigenvalue
    gap) are labelled 'extended'.  A label swap across a segment crossing
    is what the parity of the vanishing order dictates: odd orders swap,
    even ones do not.
    """
    path = np.asarray(path, dtype=float)
    if path.ndim != 2 or path.shape[0] < 2:
        raise ValueError("path must be an (N, 2) polyline")
    for _ in range(max_refine + 1):
        cands = _branch_candidates(source, path)
        lifts = np.empty(len(path))
        steps = np.zeros(len(path) - 1)
        if start_angle is None:
            lift = float(cands[0, 0])
        else:
            # snap the requested angle to the nearest branch at the start
            d = np.array([_signed_mod_pi(c, start_angle) for c in cands[0]])
            lift = float(start_angle + d[np.argmin(np.abs(d))])
        lifts[0] = lift
        for k in range(1, len(path)):
            deltas = np.array([_signed_mod_pi(c, lift) for c in cands[k]])
            j = int(np.argmin(np.abs(deltas)))
            lift = lift + float(deltas[j])
            lifts[k] = lift
            steps[k - 1] = abs(float(deltas[j]))
        max_step = float(np.max(steps)) if len(steps) else 0.0
        if max_step < step_threshold:
            break
        path = _refine_path(path, steps >= step_threshold)
    else:
        raise CertificationFailure(
            f"steps up to {max_step:.3f} persist after {max_refine} refinements")

    labels = _branch_labels(source, path, lifts, label_gap_rel)
    crossings, swaps = _crossing_swaps(source, path, labels)
    return LineBranch(path=path, angles=lifts, labels=labels, crossings=crossings,
                      swaps=swaps, max_step=max_step, certified=True)


def _signed_mod_pi(angle: float, ref: float) -> float:
    return (angle - ref + math.pi / 2) % math.pi - math.pi / 2


def _branch_labels(source, path, lifts, gap_rel) -> List[str]:
    if not hasattr(source, "label_matrix_many"):
        return ["extended"] * len(path)
    m11, m12, m21, m22 = source.label_matrix_many(path[:, 0], path[:, 1])
    scale = np.max(np.abs(np.stack([m11, m12, m21, m22])), axis=0)
    tr = m11 + m22
    disc = np.maximum((m11 - m22) ** 2 + 4 * m12 * m21, 0.0)
    root = np.sqrt(disc)
    lam1 = 0.5 * (tr + root)
    lam2 = 0.5 * (tr - root)
    c = np.cos(lifts)
    s = np.sin(lifts)
    rayleigh = m11 * c**2 + (m12 + m21) * c * s + m22 * s**2
    in_band = source.in_band(path[:, 0], path[:, 1]) \
        if hasattr(source, "in_band") else np.zeros(len(path), dtype=bool)
    labels = []
    for k in range(len(path)):
        if in_band[k] or root[k] <= gap_rel * max(scale[k], 1e-300):
            labels.append("extended")
        elif abs(rayleigh[k] - lam1[k]) <= abs(rayleigh[k] - lam2[k]):
            labels.append("L1")
        else:
            labels.append("L2")
    return labels


def _crossing_swaps(source, path, labels):
    strata = getattr(source, "strata", ())
    crossings: List[Tuple[int, int]] = []
    swaps = 0
    for si, s in enumerate(strata):
        c, sn = math.cos(s.theta), math.sin(s.theta)
        ell = c * path[:, 0] + sn * path[:, 1]
        sign_change = np.nonzero(ell[:-1] * ell[1:] < 0)[0]
        for k in sign_change:
            crossings.append((si, int(k)))
            before = _nearest_defined(labels, k, -1)
            after = _nearest_defined(labels, k + 1, +1)
            if before and after and before != after:
                swaps += 1
    crossings.sort(key=lambda t: t[1])
    return crossings, swaps


def _nearest_defined(labels, start, step):
    k = start
    while 0 <= k < len(labels):
        if labels[k] in ("L1", "L2"):
            return labels[k]
        k += step
    return None


def circle_path(center, radius: float, n: int, phase: float = 0.0) -> np.ndarray:
    """Closed positively oriented circle polyline with n+1 samples."""
    t = np.linspace(0.0, 2 * math.pi, n + 1) + phase
    return np.stack([center[0] + radius * np.cos(t),
                     center[1] + radius * np.sin(t)], axis=1)
