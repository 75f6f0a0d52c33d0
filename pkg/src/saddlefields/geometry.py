"""Gnomonic chart, graph immersions and shape data in R^3 and S^3.

The chart is the totally geodesic projection (x0,x1,x2,x3) -> (x1,x2,x3)/x0
from the open hemisphere x0 > 0 of the unit 3-sphere onto R^3; it takes
geodesics to straight lines, so graphs z = h(x,y) in the chart correspond
to surfaces in S^3 whose saddle/convex character matches the Euclidean one.

For a graph ``psi(x,y) = (1, x, y, h) / sqrt(1 + x^2 + y^2 + h^2)`` in S^3
the first fundamental form is ``I = M / (1+x^2+y^2+h^2)^2`` with the
polynomial matrix M below, and the second fundamental form is a positive
multiple of the Hessian of h.  Principal directions therefore solve a
quadratic whose coefficients only need the shape operator up to a positive
scalar, which is why most field code works with the polynomial "shape
numerator" B = Hess(h) * adj(M) instead of II * I^{-1} itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DegenerateMatrix, HemisphereViolation, UmbilicPoint
from .poly import Jet2, JetEvaluator, Poly2, X, Y

AMBIENTS = ("euclidean", "spherical")


def _check_ambient(ambient: str):
    if ambient not in AMBIENTS:
        raise ValueError(f"ambient must be one of {AMBIENTS}, got {ambient!r}")


# --- points of R^4 / S^3 -------------------------------------------------

@dataclass(frozen=True)
class Point4:
    x0: float
    x1: float
    x2: float
    x3: float

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x0, self.x1, self.x2, self.x3], dtype=float)

    @classmethod
    def from_array(cls, a) -> "Point4":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def norm(self) -> float:
        return float(np.linalg.norm(self.array))

    def on_sphere(self, tol: float = 1e-12) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol

    def require_on_sphere(self, tol: float = 1e-12) -> "Point4":
        if not self.on_sphere(tol):
            raise ValueError(f"point is off the unit sphere: |x|^2 = {self.norm()**2}")
        return self


def gnomonic(p) -> np.ndarray:
    """Chart image (x1,x2,x3)/x0 of a hemisphere point."""
    a = p.array if isinstance(p, Point4) else np.asarray(p, dtype=float)
    if a[0] <= 0:
        raise HemisphereViolation(f"x0 = {a[0]} <= 0")
    return a[1:] / a[0]


def gnomonic_many(points: np.ndarray) -> np.ndarray:
    """Vectorized chart image of an (N, 4) array of hemisphere points."""
    points = np.asarray(points, dtype=float)
    if np.any(points[:, 0] <= 0):
        raise HemisphereViolation("some points have x0 <= 0")
    return points[:, 1:] / points[:, :1]


def gnomonic_inverse(q) -> Point4:
    """Unit-normalized lift (1, q)/sqrt(1+|q|^2) of a chart point."""
    q = np.asarray(q, dtype=float)
    w = math.sqrt(1.0 + float(q @ q))
    return Point4(1.0 / w, q[0] / w, q[1] / w, q[2] / w)


def gnomonic_inverse_many(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    w = np.sqrt(1.0 + np.sum(points**2, axis=1, keepdims=True))
    return np.hstack([1.0 / w, points / w])


def graph_immersion(h: Poly2, pt) -> Point4:
    """Point of S^3 over ``pt`` on the graph z = h(x, y) in the chart."""
    x, y = float(pt[0]), float(pt[1])
    return gnomonic_inverse(np.array([x, y, float(h(x, y))]))


def cross4(a, b, c) -> np.ndarray:
    """Vector orthogonal to a, b, c in R^4, oriented so det(a,b,c,out) > 0."""
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    eye = np.eye(4)
    return np.array([np.linalg.det(np.array([a, b, c, eye[i]])) for i in range(4)])


# --- fundamental forms ----------------------------------------------------

@dataclass(frozen=True)
class FundamentalForms:
    """E, F, G / e, f, g of a graph immersion at one point."""

    E: float
    F: float
    G: float
    e: float
    f: float
    g: float
    ambient: str

    def __post_init__(self):
        if self.det_first <= 0:
            raise ValueError("EG - F^2 <= 0: not an immersion")

    @property
    def det_first(self) -> float:
        return self.E * self.G - self.F**2

    @property
    def det_second(self) -> float:
        return self.e * self.g - self.f**2


def _spherical_M_value(j: Jet2, x: float, y: float):
    h, p, q = float(j.f), float(j.fx), float(j.fy)
    m11 = (h - p * x) ** 2 + (1 + p**2) * (1 + y**2)
    m12 = p * (q * (1 + x**2 + y**2) - h * y) - x * (h * q + y)
    m22 = (h - q * y) ** 2 + (1 + q**2) * (1 + x**2)
    return m11, m12, m22


def fundamental_forms(h: Poly2, pt, ambient: str = "spherical") -> FundamentalForms:
    """First and second fundamental forms of the graph of h at ``pt``.

    Spherical ambient: the graph lives in S^3 via the gnomonic lift, and

        I  = M / (1 + x^2 + y^2 + h^2)^2,
        II = Hess(h) / (W * sqrt(1 + p^2 + q^2 + (x p + y q - h)^2)),

    with W^2 = 1 + x^2 + y^2 + h^2.  Euclidean ambient: the standard graph
    formulas I = id + grad h grad h^T, II = Hess(h)/sqrt(1+|grad h|^2).
    Both second forms are positive multiples of the Hessian, which is the
    curvature-sign correspondence between the two ambients.
    """
    _check_ambient(ambient)
    x, y = float(pt[0]), float(pt[1])
    j = JetEvaluator(h).at((x, y))
    p, q = float(j.fx), float(j.fy)
    r, s, t = float(j.fxx), float(j.fxy), float(j.fyy)
    if ambient == "euclidean":
        E = 1 + p**2
        F = p * q
        G = 1 + q**2
        c2 = 1.0 / math.sqrt(1 + p**2 + q**2)
        return FundamentalForms(E, F, G, c2 * r, c2 * s, c2 * t, ambient)
    hv = float(j.f)
    w2 = 1 + x**2 + y**2 + hv**2
    m11, m12, m22 = _spherical_M_value(j, x, y)
    c1 = 1.0 / w2**2
    v2 = 1 + p**2 + q**2 + (x * p + y * q - hv) ** 2
    c2 = 1.0 / (math.sqrt(w2) * math.sqrt(v2))
    return FundamentalForms(c1 * m11, c1 * m12, c1 * m22,
                            c2 * r, c2 * s, c2 * t, ambient)


def extrinsic_curvature_sign(forms: FundamentalForms, tol: float = 0.0) -> int:
    """Sign of eg - f^2, i.e. of the product of principal curvatures."""
    d = forms.det_second
    if abs(d) <= tol:
        return 0
    return 1 if d > 0 else -1


# --- the polynomial shape numerator --------------------------------------

def first_form_polys(h: Poly2, ambient: str = "spherical"):
    """Denominator-free first-form matrix (M11, M12, M22) as polynomials."""
    _check_ambient(ambient)
    p = h.diff("x")
    q = h.diff("y")
    if ambient == "euclidean":
        return (1 + p * p, p * q, 1 + q * q)
    one = Poly2.const(1)
    m11 = (h - p * X) ** 2 + (one + p * p) * (one + Y * Y)
    m12 = p * (q * (one + X * X + Y * Y) - h * Y) - X * (h * q + Y)
    m22 = (h - q * Y) ** 2 + (one + q * q) * (one + X * X)
    return m11, m12, m22


class ShapeNumerator:
    """B = Hess(h) * adj(M): the shape operator cleared of positive factors.

    B equals II * I^{-1} times the strictly positive scalar returned by
    ``positive_scale``; the principal-direction equation is homogeneous in
    the shape operator, so B can stand in for it everywhere, and its
    polynomial entries admit the exact divisions needed to extend the cross
    field across umbilic segments.
    """

    def __init__(self, h: Poly2, ambient: str = "spherical"):
        _check_ambient(ambient)
        self.h = h
        self.ambient = ambient
        self.jets = JetEvaluator(h)
        r, s, t = self.jets.fxx, self.jets.fxy, self.jets.fyy
        m11, m12, m22 = first_form_polys(h, ambient)
        self.m11, self.m12, self.m22 = m11, m12, m22
        # adj(M) = [[m22, -m12], [-m12, m11]]
        self.b11 = r * m22 - s * m12
        self.b12 = s * m11 - r * m12
        self.b21 = s * m22 - t * m12
        self.b22 = t * m11 - s * m12
        self.det_m = m11 * m22 - m12 * m12

    @property
    def entries(self):
        return (self.b11, self.b12, self.b21, self.b22)

    def at(self, pt) -> np.ndarray:
        x, y = float(pt[0]), float(pt[1])
        return np.array([[float(self.b11(x, y)), float(self.b12(x, y))],
                         [float(self.b21(x, y)), float(self.b22(x, y))]])

    def at_many(self, xs, ys):
        return (self.b11.eval_many(xs, ys), self.b12.eval_many(xs, ys),
                self.b21.eval_many(xs, ys), self.b22.eval_many(xs, ys))

    def positive_scale_many(self, xs, ys) -> np.ndarray:
        """mu with II * I^{-1} = mu * B; strictly positive on the chart."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        hv, p, q, _, _, _ = self.jets.many(xs, ys)
        det_m = self.det_m.eval_many(xs, ys)
        if self.ambient == "euclidean":
            v2 = 1 + p**2 + q**2
            return 1.0 / (np.sqrt(v2) * det_m)
        w2 = 1 + xs**2 + ys**2 + hv**2
        v2 = 1 + p**2 + q**2 + (xs * p + ys * q - hv) ** 2
        return w2**2 / (np.sqrt(w2) * np.sqrt(v2) * det_m)

    def positive_scale(self, pt) -> float:
        return float(self.positive_scale_many(np.array([pt[0]]), np.array([pt[1]]))[0])


def shape_numerator(h: Poly2, ambient: str = "spherical") -> ShapeNumerator:
    return ShapeNumerator(h, ambient)


# --- principal directions from a 2x2 matrix -------------------------------

def _mod_pi(a):
    return np.mod(a, math.pi)


@dataclass(frozen=True)
class CrossSample:
    """Unordered pair of direction angles mod pi; theta1 belongs to the
    larger eigenvalue of the defining matrix."""

    theta1: float
    theta2: float
    degenerate: bool = False

    @property
    def angles(self):
        return (self.theta1, self.theta2)


def cross_angles_many(m11, m12, m21, m22, zero_tol: float = 1e-13):
    """Eigendirection angles (mod pi) of the matrices [[m11,m12],[m21,m22]].

    The principal-direction equation -m12 dx^2 + (m11-m22) dx dy + m21 dy^2
    = 0 is solved by the eigenvectors of the transposed matrix; theta1 is
    the direction of the larger eigenvalue.  Coefficients below
    ``zero_tol`` times the matrix scale are treated as zero; returns a
    degeneracy mask where all of them vanish.
    """
    m11, m12, m21, m22 = (np.asarray(v, dtype=float) for v in (m11, m12, m21, m22))
    scale = np.max(np.abs(np.stack([m11, m12, m21, m22])), axis=0)
    cut = zero_tol * np.where(scale > 0, scale, 1.0)
    a = np.where(np.abs(m12) < cut, 0.0, m12)   # eq. coefficient of dx^2 is -a
    b = np.where(np.abs(m11 - m22) < cut, 0.0, m11 - m22)
    c = np.where(np.abs(m21) < cut, 0.0, m21)
    degenerate = (a == 0) & (b == 0) & (c == 0)

    # eigen decomposition of S = [[m11, m21], [m12, m22]] (the transpose)
    tr = m11 + m22
    disc = b**2 + 4.0 * a * c
    disc = np.where((disc < 0) & (np.abs(disc) <= 16.0 * cut**2 + 1e-300), 0.0, disc)
    with np.errstate(invalid="ignore"):
        root = np.sqrt(np.maximum(disc, 0.0))
    lam1 = 0.5 * (tr + root)
    lam2 = 0.5 * (tr - root)

    def eigen_angle(lam):
        # rows of S - lam*I: (m11-lam, m21) and (m12, m22-lam)
        v1a, v1b = m21, lam - m11
        v2a, v2b = lam - m22, m12
        use_first = np.hypot(v1a, v1b) >= np.hypot(v2a, v2b)
        va = np.where(use_first, v1a, v2a)
        vb = np.where(use_first, v1b, v2b)
        return _mod_pi(np.arctan2(vb, va))

    t1 = eigen_angle(lam1)
    t2 = eigen_angle(lam2)
    # equal eigenvalues with nonzero matrix: fall back to orthogonal pair
    tie = (root <= cut) & ~degenerate
    if np.any(tie):
        t2 = np.where(tie, _mod_pi(t1 + math.pi / 2), t2)
    return t1, t2, degenerate


def cross_from_matrix(m, zero_tol: float = 1e-13) -> CrossSample:
    """CrossSample from one 2x2 matrix; raises DegenerateMatrix."""
    m = np.asarray(m, dtype=float)
    t1, t2, deg = cross_angles_many(m[..., 0, 0].ravel(), m[..., 0, 1].ravel(),
                                    m[..., 1, 0].ravel(), m[..., 1, 1].ravel(),
                                    zero_tol)
    if bool(deg[0]):
        raise DegenerateMatrix("all principal-direction coefficients vanish")
    return CrossSample(float(t1[0]), float(t2[0]))


def principal_cross(b_matrix, zero_tol: float = 1e-13) -> CrossSample:
    """Principal cross from an evaluated shape-numerator matrix.

    Raises UmbilicPoint when the direction equation degenerates.
    """
    try:
        return cross_from_matrix(b_matrix, zero_tol)
    except DegenerateMatrix as exc:
        raise UmbilicPoint("principal directions undefined at an umbilic") from exc
