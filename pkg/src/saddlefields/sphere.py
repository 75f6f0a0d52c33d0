"""A smooth (non-analytic) saddle sphere immersed in S^3, by construction.

Two totally geodesic caps (the planes z = +1 and z = -1 in the gnomonic
chart, outside the unit disk) are joined through a saddle annulus of
revolution.  The meridian has three kinds of pieces:

* joint pieces  z = 1 - A exp(-1/(1-R))  (and its mirror), flat at R = 1,
  so the union with the plane is C-infinity;
* a convex catenary-type waist R = d + a cosh(z/c), matched in value,
  slope and curvature to the joint curve at the blend center, so the
  partition-of-unity blend only has to absorb third-order mismatch;
* blend windows where a flat smoothstep interpolates the two charts.

None of the inequalities this construction needs are proved here; they are
*certified* numerically instead: Gauss curvature K <= tol at every sample
of the meridian (per-chart closed-form revolution formulas), the extrinsic
curvature sign of the gnomonic lift <= 0 at every sample, and
finite-difference derivative agreement of the two sides of each joint
circle.  The shipped default parameters were picked by a coarse search for
the largest curvature margin; re-running the certificate is part of the
test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import CurvatureViolation
from .geometry import cross4, fundamental_forms, gnomonic_inverse_many
from .poly import Poly2


# --- flat exponential join -------------------------------------------------

def _flat_q_polys(kmax: int) -> List[np.ndarray]:
    """Coefficient arrays of q_k with (d/ds)^k exp(-1/s) = exp(-1/s) q_k(1/s).

    Recursion q_{k+1}(u) = u^2 (q_k(u) - q_k'(u)), q_0 = 1.
    """
    polys = [np.array([1.0])]
    for _ in range(kmax):
        q = polys[-1]
        dq = np.arange(1, len(q)) * q[1:]          # derivative in u
        diff = q.copy()
        if len(dq):
            diff[: len(dq)] -= dq
        nxt = np.zeros(len(q) + 2)
        nxt[2:] = diff                              # multiply by u^2
        polys.append(nxt)
    return polys


class FlatJoin:
    """Upper joint piece z = g(R) = 1 - A exp(-1/(1-R)), flat at R = 1.

    ``support`` is the radial interval on which the piece is used; its
    left end must stay above 1/2, where g' g'' <= 0 starts to hold and the
    revolution surface is saddle.
    """

    def __init__(self, flat_scale: float, support: Tuple[float, float] = (0.5, 1.0),
                 max_order: int = 8):
        if flat_scale <= 0:
            raise ValueError("flat scale A must be positive")
        if not 0.5 <= support[0] < support[1] <= 1.0:
            raise ValueError("support must sit inside [0.5, 1.0]")
        self.flat_scale = flat_scale
        self.support = support
        self._q = _flat_q_polys(max_order)

    def g(self, radial):
        radial = np.asarray(radial, dtype=float)
        s = 1.0 - radial
        out = np.ones_like(s)
        pos = s > 0
        out[pos] = 1.0 - self.flat_scale * np.exp(-1.0 / s[pos])
        return out

    def deriv(self, radial, k: int):
        """k-th derivative of g with respect to the radial coordinate."""
        if k == 0:
            return self.g(radial)
        radial = np.asarray(radial, dtype=float)
        s = 1.0 - radial
        out = np.zeros_like(s)
        pos = s > 0
        u = 1.0 / s[pos]
        qval = np.polynomial.polynomial.polyval(u, self._q[k])
        out[pos] = (-1.0) ** (k + 1) * self.flat_scale * np.exp(-u) * qval
        return out

    def curvature(self, radial):
        """Gauss curvature of the revolution surface of z = g(R)."""
        g1 = self.deriv(radial, 1)
        g2 = self.deriv(radial, 2)
        radial = np.asarray(radial, dtype=float)
        return g1 * g2 / (radial * (1.0 + g1**2) ** 2)


def flat_join_profile(flat_scale: float, support: Tuple[float, float] = (0.5, 1.0)) -> FlatJoin:
    return FlatJoin(flat_scale, support)


# --- the joint curve in the height chart ------------------------------------

class JointCurve:
    """The upper joint piece solved for R as a function of z.

    Inverting z = 1 - A exp(-1/(1-R)) gives R = 1 - 1/L with
    L(z) = log(A/(1-z)); valid for 1 - z < A, convex exactly where L > 2.
    """

    def __init__(self, flat_scale: float):
        self.flat_scale = flat_scale

    def L(self, z):
        return np.log(self.flat_scale / (1.0 - np.asarray(z, dtype=float)))

    def radius(self, z):
        return 1.0 - 1.0 / self.L(z)

    def d1(self, z):
        z = np.asarray(z, dtype=float)
        L = self.L(z)
        return 1.0 / (L**2 * (1.0 - z))

    def d2(self, z):
        z = np.asarray(z, dtype=float)
        L = self.L(z)
        return (L - 2.0) / (L**3 * (1.0 - z) ** 2)


# --- waist -------------------------------------------------------------------

@dataclass(frozen=True)
class WaistCurve:
    """R = offset + amp * cosh(z / width); convex for amp > 0."""

    amp: float
    width: float
    offset: float

    def radius(self, z):
        return self.offset + self.amp * np.cosh(np.asarray(z, dtype=float) / self.width)

    def d1(self, z):
        return (self.amp / self.width) * np.sinh(np.asarray(z, dtype=float) / self.width)

    def d2(self, z):
        return (self.amp / self.width**2) * np.cosh(np.asarray(z, dtype=float) / self.width)


def match_waist(joint: JointCurve, z_match: float) -> WaistCurve:
    """Waist curve agreeing with the joint in value, slope and curvature.

    Solves tau*coth(tau) = z_match * R''/R' for the catenary scale; the
    right side must exceed 1, which is where the joint curve is convex
    enough (L > 2) for a symmetric catenary to reach it.
    """
    rm = float(joint.radius(z_match))
    d1 = float(joint.d1(z_match))
    d2 = float(joint.d2(z_match))
    if d2 <= 0:
        raise ValueError("joint curve is not convex at the match point (need L > 2)")
    target = z_match * d2 / d1
    if target <= 1.0:
        raise ValueError("no symmetric catenary matches: z * R''/R' must exceed 1")
    f = lambda tau: tau / math.tanh(tau) - target
    tau = brentq(f, 1e-9, 500.0)
    width = z_match / tau
    amp = d1 * width / math.sinh(tau)
    offset = rm - amp * math.cosh(tau)
    return WaistCurve(amp=amp, width=width, offset=offset)


# --- flat smoothstep ---------------------------------------------------------

def _sigma(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _sigma_d1(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos]) / t[pos] ** 2
    return out


def _sigma_d2(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    u = 1.0 / t[pos]
    out[pos] = np.exp(-u) * (u**4 - 2.0 * u**3)
    return out


def smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, flat at both ends."""
    u = _sigma(t)
    v = _sigma(1.0 - np.asarray(t, dtype=float))
    return u / (u + v)


def smoothstep_d1(t):
    t = np.asarray(t, dtype=float)
    u, v = _sigma(t), _sigma(1.0 - t)
    du, dv = _sigma_d1(t), -_sigma_d1(1.0 - t)
    s = u + v
    return (du * v - u * dv) / s**2


def smoothstep_d2(t):
    t = np.asarray(t, dtype=float)
    u, v = _sigma(t), _sigma(1.0 - t)
    du, dv = _sigma_d1(t), -_sigma_d1(1.0 - t)
    d2u, d2v = _sigma_d2(t), _sigma_d2(1.0 - t)
    s = u + v
    return (d2u * v - u * d2v) / s**2 - 2.0 * (du * v - u * dv) * (du + dv) / s**3


# --- assembled profile --------------------------------------------------------

@dataclass(frozen=True)
class AnnulusParams:
    """Construction parameters; the defaults pass the shipped certificate."""

    flat_scale: float = 2.0           # A in the flat join
    blend_center: float = 0.92       # where the waist matches the joint
    blend_halfwidth: float = 0.004   # half-width of the blend window in z
    cap_outer_radius: float = 3.0    # radial extent of sampled cap domains
    curvature_tol: float = 1e-12

    def to_dict(self):
        return {"flat_scale": self.flat_scale, "blend_center": self.blend_center,
                "blend_halfwidth": self.blend_halfwidth,
                "cap_outer_radius": self.cap_outer_radius,
                "curvature_tol": self.curvature_tol}


DEFAULT_PARAMS = AnnulusParams()


class MeridianProfile:
    """Piecewise meridian of the annulus, mirror symmetric in z.

    Charts: |z| <= z1 pure waist, z1 <= |z| <= z2 blend (graph R(z)),
    z2 <= |z| <= 1 joint (graph z = +-g(R)).
    """

    def __init__(self, params: AnnulusParams):
        self.params = params
        self.joint = JointCurve(params.flat_scale)
        zm = params.blend_center
        w = params.blend_halfwidth
        self.z1 = zm - w
        self.z2 = zm + w
        if not 0 < self.z1 < self.z2 < 1:
            raise ValueError("blend window must sit inside (0, 1)")
        if 1.0 - self.z1 >= params.flat_scale * math.exp(-2.0):
            raise ValueError("blend window reaches below the convex part of the joint")
        self.waist = match_waist(self.joint, zm)
        if self.waist.radius(0.0) <= 0:
            raise ValueError("waist pinches through the axis; adjust parameters")
        self.flat_join = FlatJoin(params.flat_scale,
                                  support=(float(self.joint.radius(self.z2)), 1.0))

    # blended radius as a function of height, valid for |z| <= z2
    def _blend_t(self, z):
        return (np.abs(z) - self.z1) / (self.z2 - self.z1)

    def radius(self, z):
        z = np.asarray(z, dtype=float)
        az = np.abs(z)
        out = np.empty_like(az)
        waist = az <= self.z1
        out[waist] = self.waist.radius(z[waist])
        rest = ~waist
        t = self._blend_t(az[rest])
        phi = smoothstep(t)
        out[rest] = (1 - phi) * self.waist.radius(az[rest]) + phi * self.joint.radius(az[rest])
        return out

    def radius_d1_d2(self, z):
        """(R', R'') of the height-chart meridian, valid for |z| <= z2.

        Derivatives are taken with respect to z; mirror symmetry makes the
        odd/even reflection explicit through |z|.
        """
        z = np.asarray(z, dtype=float)
        az = np.abs(z)
        sign = np.where(z >= 0, 1.0, -1.0)
        scale = 1.0 / (self.z2 - self.z1)
        t = self._blend_t(az)
        phi = smoothstep(t)
        dphi = smoothstep_d1(t) * scale
        d2phi = smoothstep_d2(t) * scale**2
        rw, dw, d2w = self.waist.radius(az), self.waist.d1(az), self.waist.d2(az)
        blend = az > self.z1
        rj = np.where(blend, self.joint.radius(np.where(blend, az, 0.5)), 0.0)
        dj = np.where(blend, self.joint.d1(np.where(blend, az, 0.5)), 0.0)
        d2j = np.where(blend, self.joint.d2(np.where(blend, az, 0.5)), 0.0)
        phi = np.where(blend, phi, 0.0)
        dphi = np.where(blend, dphi, 0.0)
        d2phi = np.where(blend, d2phi, 0.0)
        diff = rj - rw
        d1 = (1 - phi) * dw + phi * dj + dphi * diff
        d2 = ((1 - phi) * d2w + phi * d2j + 2 * dphi * (dj - dw) + d2phi * diff)
        return sign * d1, d2

    def height_chart_curvature(self, z):
        """K of the revolution surface where the meridian is a graph R(z)."""
        r = self.radius(z)
        _, d2 = self.radius_d1_d2(z)
        d1, _ = self.radius_d1_d2(z)
        return -d2 / (r * (1.0 + d1**2) ** 2)

    def meridian_samples(self, n: int):
        """(chart, zs or radii, K) triples covering the whole meridian.

        Joint pieces are sampled in the radial variable (their natural
        chart), waist and blends in height; allocation is proportional to
        the fixed weights below.
        """
        alloc = {"joint_top": 0.25, "joint_bottom": 0.25,
                 "blend_top": 0.1, "blend_bottom": 0.1, "waist": 0.3}
        out = []
        r_lo = float(self.joint.radius(self.z2))
        for chart, wgt in alloc.items():
            k = max(16, int(round(wgt * n)))
            if chart.startswith("joint"):
                rr = np.linspace(r_lo, 1.0, k)
                kk = self.flat_join.curvature(rr)
                out.append((chart, rr, kk))
            elif chart.startswith("blend"):
                zz = np.linspace(self.z1, self.z2, k)
                kk = self.height_chart_curvature(zz)
                out.append((chart, zz if chart.endswith("top") else -zz, kk))
            else:
                zz = np.linspace(-self.z1, self.z1, k)
                out.append((chart, zz, self.height_chart_curvature(zz)))
        return out

    def point(self, chart: str, param):
        """(R, z) meridian point from a chart parameter."""
        param = np.asarray(param, dtype=float)
        if chart.startswith("joint"):
            z = self.flat_join.g(param)
            return param, z if chart.endswith("top") else -z
        return self.radius(param), param


# --- assembled annulus and certificate ----------------------------------------

@dataclass(frozen=True)
class CurvatureCertificate:
    passed: bool
    worst_value: float
    worst_chart: str
    worst_param: float
    n_samples: int
    tol: float

    def to_dict(self):
        return {"passed": self.passed, "worst_value": self.worst_value,
                "worst_chart": self.worst_chart, "worst_param": self.worst_param,
                "n_samples": self.n_samples, "tol": self.tol}


class RevolutionAnnulus:
    """The saddle annulus of revolution in R^3 with its meridian profile."""

    def __init__(self, profile: MeridianProfile):
        self.profile = profile
        self.params = profile.params

    def certify_curvature(self, n_meridian: int = 2500,
                          n_parallel: int = 4) -> CurvatureCertificate:
        tol = self.params.curvature_tol
        worst = -math.inf
        worst_chart, worst_param = "", 0.0
        total = 0
        for chart, pp, kk in self.profile.meridian_samples(n_meridian):
            total += len(pp) * n_parallel
            j = int(np.argmax(kk))
            if kk[j] > worst:
                worst = float(kk[j])
                worst_chart, worst_param = chart, float(pp[j])
        cert = CurvatureCertificate(passed=bool(worst <= tol), worst_value=worst,
                                    worst_chart=worst_chart, worst_param=worst_param,
                                    n_samples=total, tol=tol)
        return cert

    def sample_points(self, n_meridian: int = 400, n_parallel: int = 25):
        """R^3 sample grid (points, chart labels, meridian (R, z))."""
        phis = np.linspace(0.0, 2 * math.pi, n_parallel, endpoint=False)
        pts, charts, meridian = [], [], []
        for chart, pp, _ in self.profile.meridian_samples(n_meridian):
            rr, zz = self.profile.point(chart, pp)
            rr = np.broadcast_to(np.asarray(rr, float), np.asarray(pp).shape)
            zz = np.broadcast_to(np.asarray(zz, float), np.asarray(pp).shape)
            for r, z in zip(rr, zz):
                for phi in phis:
                    pts.append((r * math.cos(phi), r * math.sin(phi), z))
                    charts.append(chart)
                    meridian.append((r, z))
        return np.array(pts), charts, np.array(meridian)

    def meridian_is_simple(self, n: int = 2000) -> bool:
        """The meridian is a graph in each chart; verify the charts are
        monotone so the concatenated curve has no self-intersection."""
        zz = np.linspace(-self.profile.z2, self.profile.z2, n)
        rr = self.profile.radius(zz)
        if np.any(rr <= 0):
            return False
        r_joint = np.linspace(float(self.profile.joint.radius(self.profile.z2)), 1.0, n)
        g_vals = self.profile.flat_join.g(r_joint)
        g1 = self.profile.flat_join.deriv(r_joint, 1)
        # nondecreasing height along the joint graph (flat near R=1, where
        # the derivative legitimately underflows to zero)
        return bool(np.all(np.diff(g_vals) >= 0) and np.all(g1 >= 0))


def assemble_saddle_annulus(params: AnnulusParams = DEFAULT_PARAMS, *,
                            n_meridian: int = 2500, n_parallel: int = 4):
    """Build the annulus and certify K <= tol on the sample grid.

    Raises CurvatureViolation when the certificate fails, carrying the
    worst sample; the shipped DEFAULT_PARAMS pass.
    """
    profile = MeridianProfile(params)
    annulus = RevolutionAnnulus(profile)
    cert = annulus.certify_curvature(n_meridian=n_meridian, n_parallel=n_parallel)
    if not cert.passed:
        raise CurvatureViolation(
            f"K = {cert.worst_value} > {cert.tol} at {cert.worst_chart}"
            f" param {cert.worst_param}",
            worst_point=(cert.worst_chart, cert.worst_param),
            worst_value=cert.worst_value)
    return annulus, cert


# --- lift to the 3-sphere -------------------------------------------------------

@dataclass
class SphereAtlas:
    """Lifted samples of the immersed saddle sphere in S^3."""

    annulus_points: np.ndarray          # (N, 4), unit norm
    annulus_charts: List[str]
    annulus_meridian: np.ndarray        # (N, 2) the (R, z) sources
    cap_top: np.ndarray                 # (M, 4) in S^3 cap {x0 = x3}
    cap_bottom: np.ndarray              # (M, 4) in S^3 cap {x0 = -x3}
    params: AnnulusParams
    annulus: RevolutionAnnulus

    def manifest(self) -> Dict:
        return {"params": self.params.to_dict(),
                "annulus_samples": int(len(self.annulus_points)),
                "cap_samples": int(len(self.cap_top)) + int(len(self.cap_bottom)),
                "charts": sorted(set(self.annulus_charts))}


def lift_to_sphere(annulus: RevolutionAnnulus, *, n_meridian: int = 400,
                   n_parallel: int = 25, n_cap_radial: int = 20,
                   n_cap_angular: int = 40) -> SphereAtlas:
    """Gnomonic-inverse lift of the annulus and cap samples to S^3."""
    pts3, charts, meridian = annulus.sample_points(n_meridian, n_parallel)
    lifted = gnomonic_inverse_many(pts3)
    params = annulus.params
    rr = np.linspace(1.0, params.cap_outer_radius, n_cap_radial)
    aa = np.linspace(0.0, 2 * math.pi, n_cap_angular, endpoint=False)
    grid_r, grid_a = np.meshgrid(rr, aa, indexing="ij")
    xs = (grid_r * np.cos(grid_a)).ravel()
    ys = (grid_r * np.sin(grid_a)).ravel()
    top = gnomonic_inverse_many(np.stack([xs, ys, np.ones_like(xs)], axis=1))
    bottom = gnomonic_inverse_many(np.stack([xs, ys, -np.ones_like(xs)], axis=1))
    # cap invariants: the lifts land in the totally geodesic spheres x0 = +-x3
    if np.max(np.abs(top[:, 0] - top[:, 3])) > 1e-12:
        raise AssertionError("top cap left the x0 = x3 equator")
    if np.max(np.abs(bottom[:, 0] + bottom[:, 3])) > 1e-12:
        raise AssertionError("bottom cap left the x0 = -x3 equator")
    return SphereAtlas(annulus_points=lifted, annulus_charts=charts,
                       annulus_meridian=meridian, cap_top=top, cap_bottom=bottom,
                       params=params, annulus=annulus)


# --- verification ----------------------------------------------------------------

def _lift_patch(fn, us, vs, step: float):
    """Finite-difference fundamental forms of a lifted patch (u, v) -> S^3.

    Returns (det II, scale of II) arrays; central differences of the
    parametrization, normal by the generalized cross product.
    """
    us = np.asarray(us, dtype=float)
    vs = np.asarray(vs, dtype=float)
    def F(u, v):
        return fn(u, v)
    f0 = F(us, vs)
    fu = (F(us + step, vs) - F(us - step, vs)) / (2 * step)
    fv = (F(us, vs + step) - F(us, vs - step)) / (2 * step)
    fuu = (F(us + step, vs) - 2 * f0 + F(us - step, vs)) / step**2
    fvv = (F(us, vs + step) - 2 * f0 + F(us, vs - step)) / step**2
    fuv = (F(us + step, vs + step) - F(us + step, vs - step)
           - F(us - step, vs + step) + F(us - step, vs - step)) / (4 * step**2)
    det2 = np.empty(len(us))
    scale = np.empty(len(us))
    for k in range(len(us)):
        n = cross4(f0[k], fu[k], fv[k])
        nn = np.linalg.norm(n)
        if nn == 0:
            det2[k], scale[k] = 0.0, 0.0
            continue
        n /= nn
        e = float(fuu[k] @ n)
        f = float(fuv[k] @ n)
        g = float(fvv[k] @ n)
        det2[k] = e * g - f * f
        scale[k] = max(abs(e), abs(f), abs(g))
    return det2, scale


@dataclass(frozen=True)
class SphereReport:
    curvature: CurvatureCertificate
    extrinsic_max_det: float
    extrinsic_tol: float
    extrinsic_ok: bool
    caps_second_form_max: float
    caps_ok: bool
    joint_orders_checked: int
    joint_max_mismatch: float
    joint_ok: bool
    mirror_max_error: float
    mirror_ok: bool
    meridian_simple: bool
    chart_sign_checks: int

    @property
    def passed(self) -> bool:
        return (self.curvature.passed and self.extrinsic_ok and self.caps_ok
                and self.joint_ok and self.mirror_ok and self.meridian_simple)

    def to_dict(self):
        return {"curvature": self.curvature.to_dict(),
                "extrinsic": {"max_det": self.extrinsic_max_det,
                              "tol": self.extrinsic_tol, "ok": self.extrinsic_ok},
                "caps": {"max_second_form": self.caps_second_form_max, "ok": self.caps_ok},
                "joints": {"orders": self.joint_orders_checked,
                           "max_mismatch": self.joint_max_mismatch, "ok": self.joint_ok},
                "mirror": {"max_error": self.mirror_max_error, "ok": self.mirror_ok},
                "meridian_simple": self.meridian_simple,
                "chart_sign_checks": self.chart_sign_checks,
                "passed": self.passed}


def _fd_weights(order: int, offsets: np.ndarray) -> np.ndarray:
    """Weights reproducing the ``order``-th derivative on the given offsets.

    Offsets should be O(1) (e.g. integer multiples of the step, with the
    step divided out afterwards); a Vandermonde system in absolute offsets
    would be hopelessly ill-conditioned.
    """
    n = len(offsets)
    if order >= n:
        raise ValueError("need more stencil points than the derivative order")
    v = np.vander(np.asarray(offsets, dtype=float), n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(v, rhs)


def _joint_mismatch(annulus: RevolutionAnnulus, top: bool, orders: int,
                    step: float) -> float:
    """One-sided derivative disagreement of the lifted meridian at a joint.

    The meridian curve through the joint circle is parametrized by the
    radial coordinate on both sides: the annulus side via z = +-g(R), the
    cap side lying in the plane z = +-1.  The cap curve is analytic across
    R = 1, so the disagreement of the one-sided m-th derivatives equals the
    m-th derivative at R = 1 of the *difference* of the two lifted curves
    (which vanishes identically on the cap side).  Differencing first
    cancels the O(1) analytic background that would otherwise drown a
    double-precision fourth-derivative estimate, then central stencils on
    the difference give the mismatch directly.
    """
    g = annulus.profile.flat_join
    zsign = 1.0 if top else -1.0
    offs = np.arange(-4.0, 5.0)
    rr = 1.0 + offs * step
    ann_pts = gnomonic_inverse_many(
        np.stack([rr, np.zeros_like(rr), zsign * g.g(rr)], axis=1))
    cap_pts = gnomonic_inverse_many(
        np.stack([rr, np.zeros_like(rr), zsign * np.ones_like(rr)], axis=1))
    delta = ann_pts - cap_pts
    worst = 0.0
    for m in range(1, orders + 1):
        w = _fd_weights(m, offs) / step**m
        worst = max(worst, float(np.max(np.abs(w @ delta))))
    return worst


def verify_smooth_saddle_sphere(atlas: SphereAtlas, *, fd_step: float = 1e-4,
                                joint_step: float = 8e-3, joint_orders: int = 4,
                                joint_tol: float = 1e-5,
                                extrinsic_tol_rel: float = 1e-6,
                                chart_checks: int = 24) -> SphereReport:
    """Certify the lifted sphere: saddle sign, geodesic caps, smooth joints.

    The extrinsic sign at annulus samples is computed from finite-difference
    fundamental forms of the lifted parametrization; a subsample is also
    pushed through honest gnomonic graph charts (rotate the sample to the
    chart center, solve for the graph, read the Hessian sign) to confirm
    the curvature-sign correspondence on which the construction rests.
    """
    annulus = atlas.annulus
    profile = annulus.profile

    # (a) extrinsic sign <= 0 at all lifted annulus samples
    dets, scales = [], []
    for chart, zmin, zmax in (("waist+blend", -profile.z2, profile.z2),):
        zz = np.linspace(zmin, zmax, 600)
        phis = np.linspace(0.0, 2 * math.pi, 8, endpoint=False)
        for phi in phis:
            def patch(u, v, phi=phi):
                r = profile.radius(u)
                return gnomonic_inverse_many(
                    np.stack([r * np.cos(v + phi), r * np.sin(v + phi), u], axis=1))
            d, s = _lift_patch(patch, zz, np.zeros_like(zz), fd_step)
            dets.append(d)
            scales.append(s)
    r_lo = float(profile.joint.radius(profile.z2))
    rr = np.linspace(r_lo, 1.0 - 1e-9, 600)
    for top in (True, False):
        zsign = 1.0 if top else -1.0
        for phi in np.linspace(0.0, 2 * math.pi, 8, endpoint=False):
            def patch(u, v, phi=phi, zsign=zsign):
                z = zsign * profile.flat_join.g(u)
                return gnomonic_inverse_many(
                    np.stack([u * np.cos(v + phi), u * np.sin(v + phi), z], axis=1))
            d, s = _lift_patch(patch, rr, np.zeros_like(rr), fd_step)
            dets.append(d)
            scales.append(s)
    dets = np.concatenate(dets)
    scales = np.concatenate(scales)
    tol_abs = extrinsic_tol_rel * max(float(np.max(scales)) ** 2, 1e-30)
    extrinsic_ok = bool(np.max(dets) <= tol_abs)

    # curvature-sign correspondence spot check through actual graph charts
    sign_checks = _chart_sign_spot_checks(profile, chart_checks, dets_tol=tol_abs)

    # (b) caps are exactly totally geodesic: zero Hessian -> zero second form
    cap_vals = []
    for hconst in (1.0, -1.0):
        hp = Poly2.const(hconst)
        for pt in [(1.2, 0.0), (2.0, 1.0), (1.5, -1.5), (2.5, 0.3)]:
            fo = fundamental_forms(hp, pt, "spherical")
            cap_vals.extend([abs(fo.e), abs(fo.f), abs(fo.g)])
    caps_max = float(max(cap_vals))
    caps_ok = caps_max == 0.0

    # (c) joint smoothness to the requested order
    jm = max(_joint_mismatch(annulus, True, joint_orders, joint_step),
             _joint_mismatch(annulus, False, joint_orders, joint_step))
    joint_ok = bool(jm <= joint_tol)

    # mirror symmetry: the meridian is even in z, and the lift of a height
    # negation is exactly the x3 flip of the lift (checked on a batch)
    zz = np.linspace(-profile.z2, profile.z2, 801)
    mirror_err = float(np.max(np.abs(profile.radius(zz) - profile.radius(-zz))))
    probe = np.stack([profile.radius(zz) * np.cos(zz * 7),
                      profile.radius(zz) * np.sin(zz * 7), zz], axis=1)
    flipped = gnomonic_inverse_many(probe * np.array([1.0, 1.0, -1.0]))
    direct = gnomonic_inverse_many(probe) * np.array([1.0, 1.0, 1.0, -1.0])
    mirror_err = max(mirror_err, float(np.max(np.abs(flipped - direct))))
    mirror_ok = mirror_err <= 1e-12

    return SphereReport(curvature=annulus.certify_curvature(),
                        extrinsic_max_det=float(np.max(dets)),
                        extrinsic_tol=tol_abs, extrinsic_ok=extrinsic_ok,
                        caps_second_form_max=caps_max, caps_ok=caps_ok,
                        joint_orders_checked=joint_orders,
                        joint_max_mismatch=jm, joint_ok=joint_ok,
                        mirror_max_error=mirror_err, mirror_ok=mirror_ok,
                        meridian_simple=annulus.meridian_is_simple(),
                        chart_sign_checks=sign_checks)


def _rotation_to_origin(p: np.ndarray) -> np.ndarray:
    """SO(4) matrix taking the unit vector p to (1, 0, 0, 0)."""
    basis = [p]
    for e in np.eye(4):
        v = e - sum((e @ b) * b for b in basis)
        n = np.linalg.norm(v)
        if n > 1e-9:
            basis.append(v / n)
    q = np.array(basis[:4])
    if np.linalg.det(q) < 0:
        q[3] = -q[3]
    return q


def _chart_sign_spot_checks(profile: MeridianProfile, count: int,
                            dets_tol: float) -> int:
    """Push meridian samples through honest gnomonic graph charts.

    Rotate each sample to the chart center, solve the lifted surface
    locally as a graph over its tangent plane, and check that the Hessian
    determinant sign there is <= 0 (within the same tolerance used for the
    finite-difference second form).  Returns the number of points checked;
    raises AssertionError on a sign violation.
    """
    zz = np.linspace(-profile.z1, profile.z1, count)
    checked = 0
    for z0 in zz:
        r0 = float(profile.radius(np.array([z0]))[0])

        def surf(u, v):
            r = profile.radius(np.atleast_1d(u))
            return gnomonic_inverse_many(
                np.stack([r * np.cos(np.atleast_1d(v)),
                          r * np.sin(np.atleast_1d(v)),
                          np.atleast_1d(u)], axis=1))[0]

        p0 = surf(z0, 0.0)
        q = _rotation_to_origin(p0)
        d = 1e-4
        # chart image of the rotated surface around the sample
        def chart(u, v):
            pt = q @ surf(z0 + u, v)
            return pt[1:] / pt[0]

        c0 = chart(0.0, 0.0)
        tu = (chart(d, 0.0) - chart(-d, 0.0)) / (2 * d)
        tv = (chart(0.0, d) - chart(0.0, -d)) / (2 * d)
        nrm = np.cross(tu, tv)
        nrm /= np.linalg.norm(nrm)
        b1 = tu / np.linalg.norm(tu)
        b2 = np.cross(nrm, b1)
        # height of the surface over its tangent plane, as a function of (u, v)
        def height(u, v):
            w = chart(u, v) - c0
            return float(w @ nrm)

        r = (height(d, 0) - 2 * height(0, 0) + height(-d, 0)) / d**2
        s = (height(d, d) - height(d, -d) - height(-d, d) + height(-d, -d)) / (4 * d**2)
        t = (height(0, d) - 2 * height(0, 0) + height(0, -d)) / d**2
        # Hessian in (u, v) parameters; its determinant sign matches the
        # graph Hessian sign up to the positive Jacobian factor
        jac = np.array([[float(tu @ b1), float(tv @ b1)],
                        [float(tu @ b2), float(tv @ b2)]])
        det_uv = r * t - s * s
        det_graph = det_uv / np.linalg.det(jac) ** 2
        scale = max(abs(r), abs(s), abs(t), 1e-30)
        if det_graph > 1e-5 * scale**2:
            raise AssertionError(
                f"chart Hessian sign positive at meridian z={z0}: det={det_graph}")
        checked += 1
    return checked
