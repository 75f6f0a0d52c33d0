"""Exact bivariate polynomials and the factorizations used at umbilic segments.

Polynomials are stored sparsely as ``{(i, j): c}`` for the monomial
``c * x**i * y**j``.  Coefficients may be ``int``/``float`` or
``fractions.Fraction``; a polynomial built entirely from Fractions stays
exact through addition, multiplication, differentiation, linear
substitution and division by a linear form.  Float polynomials get a
``strip_small`` pass wherever an operation is expected to produce exact
zeros up to roundoff (e.g. after rotating a divisible polynomial).
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Tuple, Union

import numpy as np

from .errors import LowOrder, NotAPower, OrderTooLow, ZeroFunction

Coeff = Union[int, float, Fraction]

_EXACT_TYPES = (int, Fraction)


def _is_exact(c) -> bool:
    return isinstance(c, _EXACT_TYPES)


class Poly2:
    """Sparse bivariate polynomial, immutable after construction.

    Invariants: exponents are nonnegative, no duplicate ``(i, j)`` keys,
    zero coefficients removed.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        acc: dict = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for entry in items:
            if isinstance(terms, dict):
                (i, j), c = entry
            else:
                i, j, c = entry
            i = int(i)
            j = int(j)
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent in term ({i},{j})")
            key = (i, j)
            acc[key] = acc.get(key, 0) + c
        object.__setattr__(self, "_terms", {k: c for k, c in acc.items() if c != 0})

    # --- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "Poly2":
        return cls()

    @classmethod
    def const(cls, c: Coeff) -> "Poly2":
        return cls([(0, 0, c)])

    @classmethod
    def monomial(cls, i: int, j: int, c: Coeff = 1) -> "Poly2":
        return cls([(i, j, c)])

    @classmethod
    def from_literal(cls, triples: Iterable, exact: bool = False) -> "Poly2":
        """Build from ``[[i, j, c], ...]`` config literals.

        String coefficients like ``"3/7"`` always parse exactly; with
        ``exact=True`` numeric coefficients are converted to Fractions too.
        """
        terms = []
        for i, j, c in triples:
            if isinstance(c, str):
                c = Fraction(c)
            elif exact:
                c = Fraction(c)
            terms.append((i, j, c))
        return cls(terms)

    # --- inspection ---------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __iter__(self):
        return iter(sorted((i, j, c) for (i, j), c in self._terms.items()))

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(i + j for i, j in self._terms)

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self._terms.values())

    def max_abs_coeff(self) -> float:
        if not self._terms:
            return 0.0
        return max(abs(float(c)) for c in self._terms.values())

    def coeff(self, i: int, j: int) -> Coeff:
        return self._terms.get((i, j), 0)

    def x_order(self) -> int:
        """Smallest x-exponent present; 0 for the zero polynomial."""
        if not self._terms:
            return 0
        return min(i for i, _ in self._terms)

    def __eq__(self, other):
        if not isinstance(other, Poly2):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "Poly2()"
        parts = [f"({i},{j}):{c}" for (i, j), c in sorted(self._terms.items())]
        return "Poly2{" + ", ".join(parts) + "}"

    # --- arithmetic ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, numbers.Number):
            other = Poly2.const(other)
        if not isinstance(other, Poly2):
            return NotImplemented
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0) + c
        return Poly2(acc)

    __radd__ = __add__

    def __neg__(self):
        return Poly2({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, numbers.Number):
            other = Poly2.const(other)
        if not isinstance(other, Poly2):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return Poly2({k: c * other for k, c in self._terms.items()})
        if not isinstance(other, Poly2):
            return NotImplemented
        acc: dict = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                key = (i1 + i2, j1 + j2)
                acc[key] = acc.get(key, 0) + c1 * c2
        return Poly2(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = Poly2.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # --- calculus -----------------------------------------------------

    def diff(self, var: str) -> "Poly2":
        if var == "x":
            return Poly2({(i - 1, j): c * i for (i, j), c in self._terms.items() if i > 0})
        if var == "y":
            return Poly2({(i, j - 1): c * j for (i, j), c in self._terms.items() if j > 0})
        raise ValueError("var must be 'x' or 'y'")

    # --- evaluation ---------------------------------------------------

    def __call__(self, x, y):
        """Evaluate at a point; exact when coefficients and point are exact."""
        total = 0
        for (i, j), c in self._terms.items():
            total += c * x**i * y**j
        return total

    def eval_many(self, xs, ys) -> np.ndarray:
        """Vectorized float evaluation on arrays of points."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if not self._terms:
            return np.zeros(np.broadcast(xs, ys).shape)
        max_i = max(i for i, _ in self._terms)
        max_j = max(j for _, j in self._terms)
        xp = [np.ones_like(xs)]
        for _ in range(max_i):
            xp.append(xp[-1] * xs)
        yp = [np.ones_like(ys)]
        for _ in range(max_j):
            yp.append(yp[-1] * ys)
        out = np.zeros(np.broadcast(xs, ys).shape)
        for (i, j), c in self._terms.items():
            out += float(c) * xp[i] * yp[j]
        return out

    # --- transformations ----------------------------------------------

    def map_coeffs(self, fn) -> "Poly2":
        return Poly2({k: fn(c) for k, c in self._terms.items()})

    def to_float(self) -> "Poly2":
        return self.map_coeffs(float)

    def to_exact(self) -> "Poly2":
        """Convert coefficients to Fractions (binary-exact for floats)."""
        return self.map_coeffs(Fraction)

    def strip_small(self, rel_tol: float = 1e-12) -> "Poly2":
        """Drop float coefficients below ``rel_tol`` times the largest one.

        Exact (int/Fraction) coefficients are never dropped.
        """
        scale = self.max_abs_coeff()
        if scale == 0.0:
            return self
        cut = rel_tol * scale
        return Poly2({k: c for k, c in self._terms.items()
                      if _is_exact(c) or abs(c) >= cut})

    def truncate(self, max_total_degree: int) -> "Poly2":
        return Poly2({k: c for k, c in self._terms.items()
                      if k[0] + k[1] <= max_total_degree})

    def compose_linear(self, a, b, c, d) -> "Poly2":
        """Substitute ``x -> a*X + b*Y`` and ``y -> c*X + d*Y``."""
        lin1 = Poly2([(1, 0, a), (0, 1, b)])
        lin2 = Poly2([(1, 0, c), (0, 1, d)])
        if not self._terms:
            return Poly2()
        max_i = max(i for i, _ in self._terms)
        max_j = max(j for _, j in self._terms)
        p1 = [Poly2.const(1)]
        for _ in range(max_i):
            p1.append(p1[-1] * lin1)
        p2 = [Poly2.const(1)]
        for _ in range(max_j):
            p2.append(p2[-1] * lin2)
        out = Poly2()
        for (i, j), cf in self._terms.items():
            out = out + (p1[i] * p2[j]) * cf
        return out

    def in_rotated_frame(self, theta: float) -> "Poly2":
        """Express the polynomial in coordinates rotated by ``theta``.

        The new first coordinate is ``u = cos(theta)*x + sin(theta)*y``, so a
        zero set ``{u = 0}`` of the result corresponds to the line with unit
        normal ``(cos theta, sin theta)`` in the original frame.  Rotations by
        exact multiples of pi/2 use integer cos/sin and preserve exactness.
        """
        c, s = rotation_pair(theta)
        # (x, y) = (c*u - s*v, s*u + c*v)
        return self.compose_linear(c, -s, s, c)

    def shift_x_exponent(self, k: int) -> "Poly2":
        """Divide by x**k assuming every term has x-exponent >= k."""
        if any(i < k for i, _ in self._terms):
            raise ValueError(f"polynomial is not divisible by x^{k}")
        return Poly2({(i - k, j): c for (i, j), c in self._terms.items()})

    def divide_linear(self, a, b) -> Tuple["Poly2", "Poly2"]:
        """Divide by the linear form ``a*x + b*y``.

        Returns ``(quotient, remainder)`` with
        ``self == (a*x + b*y) * quotient + remainder`` where the remainder is
        univariate (in y when pivoting on x, in x otherwise).  Exact for
        exact coefficients.  Pivots on the larger of |a|, |b| for stability.
        """
        if a == 0 and b == 0:
            raise ZeroDivisionError("division by the zero form")
        if abs(float(a)) >= abs(float(b)):
            work = dict(self._terms)
            quo: dict = {}
            max_i = max((i for i, _ in work), default=0)
            for i in range(max_i, 0, -1):
                for j in [j for (ii, j) in list(work) if ii == i]:
                    cf = work.pop((i, j))
                    if cf == 0:
                        continue
                    qc = cf / a if not (_is_exact(cf) and _is_exact(a)) else Fraction(cf, 1) / Fraction(a, 1)
                    quo[(i - 1, j)] = quo.get((i - 1, j), 0) + qc
                    if b != 0:
                        key = (i - 1, j + 1)
                        work[key] = work.get(key, 0) - qc * b
            return Poly2(quo), Poly2(work)
        # pivot on y: mirror the same elimination with roles swapped
        mirrored = Poly2({(j, i): c for (i, j), c in self._terms.items()})
        q, r = mirrored.divide_linear(b, a)
        swap = lambda p: Poly2({(j, i): c for (i, j), c in p._terms.items()})
        return swap(q), swap(r)


#: convenient generators
X = Poly2.monomial(1, 0)
Y = Poly2.monomial(0, 1)


def rotation_pair(theta: float):
    """(cos, sin) for ``theta``, exact integers at multiples of pi/2."""
    k = round(theta / (math.pi / 2))
    if abs(theta - k * (math.pi / 2)) < 1e-12:
        return ((1, 0), (0, 1), (-1, 0), (0, -1))[k % 4]
    return math.cos(theta), math.sin(theta)


# --- jets ---------------------------------------------------------------

@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a bivariate function at a point."""

    f: float
    fx: float
    fy: float
    fxx: float
    fxy: float
    fyy: float

    @property
    def hessian_det(self):
        return self.fxx * self.fyy - self.fxy**2

    @property
    def grad(self):
        return np.array([float(self.fx), float(self.fy)])

    @property
    def hessian(self):
        return np.array([[float(self.fxx), float(self.fxy)],
                         [float(self.fxy), float(self.fyy)]])


class JetEvaluator:
    """Precomputed partials of one polynomial, for bulk jet evaluation."""

    def __init__(self, f: Poly2):
        self.f = f
        self.fx = f.diff("x")
        self.fy = f.diff("y")
        self.fxx = self.fx.diff("x")
        self.fxy = self.fx.diff("y")
        self.fyy = self.fy.diff("y")

    def at(self, pt) -> Jet2:
        x, y = pt
        return Jet2(self.f(x, y), self.fx(x, y), self.fy(x, y),
                    self.fxx(x, y), self.fxy(x, y), self.fyy(x, y))

    def many(self, xs, ys):
        """Six arrays (f, fx, fy, fxx, fxy, fyy) evaluated on point arrays."""
        return (self.f.eval_many(xs, ys), self.fx.eval_many(xs, ys),
                self.fy.eval_many(xs, ys), self.fxx.eval_many(xs, ys),
                self.fxy.eval_many(xs, ys), self.fyy.eval_many(xs, ys))


def evaluate_jet(f: Poly2, pt) -> Jet2:
    """Exact value + first/second partials of ``f`` at ``pt``."""
    return JetEvaluator(f).at(pt)


def hessian_det(f: Poly2, pt):
    """fxx*fyy - fxy^2 at ``pt``."""
    return evaluate_jet(f, pt).hessian_det


# --- regions and the saddle certificate ---------------------------------

@dataclass(frozen=True)
class Disk:
    """Closed disk used as the working region of all local analyses."""

    center: Tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0

    def grid(self, n: int):
        """Row-major arrays of the n x n grid points inside the disk."""
        if n < 2:
            raise ValueError("grid_n must be >= 2")
        cx, cy = self.center
        side = np.linspace(-self.radius, self.radius, n)
        gx, gy = np.meshgrid(side, side, indexing="ij")
        gx = gx.ravel() + cx
        gy = gy.ravel() + cy
        mask = (gx - cx) ** 2 + (gy - cy) ** 2 <= self.radius**2 * (1 + 1e-12)
        return gx[mask], gy[mask]

    def contains(self, pt) -> bool:
        dx = pt[0] - self.center[0]
        dy = pt[1] - self.center[1]
        return dx * dx + dy * dy <= self.radius**2 * (1 + 1e-12)


@dataclass(frozen=True)
class SaddleReport:
    passed: bool
    worst_point: Tuple[float, float]
    worst_value: float
    tol: float
    grid_n: int

    def to_dict(self):
        return {"passed": self.passed, "worst_point": list(self.worst_point),
                "worst_value": self.worst_value, "tol": self.tol,
                "grid_n": self.grid_n}


def saddle_check(f: Poly2, region: Disk, grid_n: int = 65, tol: float = 0.0) -> SaddleReport:
    """Grid certificate for fxx*fyy - fxy^2 <= tol over the region.

    Reports the worst (largest) Hessian determinant and where it occurs;
    never raises on failure.
    """
    xs, ys = region.grid(grid_n)
    jets = JetEvaluator(f)
    _, _, _, fxx, fxy, fyy = jets.many(xs, ys)
    det = fxx * fyy - fxy**2
    k = int(np.argmax(det))
    worst = float(det[k])
    return SaddleReport(passed=bool(worst <= tol),
                        worst_point=(float(xs[k]), float(ys[k])),
                        worst_value=worst, tol=tol, grid_n=grid_n)


# --- homogeneous structure at the origin ---------------------------------

def lowest_homogeneous_part(f: Poly2) -> Tuple[int, Poly2]:
    """Lowest-degree homogeneous part of ``f``; requires vanishing 1-jet.

    Raises ZeroFunction on f == 0 and LowOrder when constant or linear
    terms are present (the caller should have normalized them away).
    """
    if f.is_zero:
        raise ZeroFunction("lowest_homogeneous_part of the zero polynomial")
    m = min(i + j for (i, j) in f.terms)
    if m < 2:
        raise LowOrder(f"terms of degree {m} < 2 present; subtract the affine part first")
    omega = Poly2({(i, j): c for (i, j), c in f.terms.items() if i + j == m})
    return m, omega


@dataclass(frozen=True)
class LinearPowerFactor:
    """omega == a * (alpha*x + beta*y)**n with unit direction (alpha, beta)."""

    a: float
    direction: Tuple[float, float]
    n: int


def linear_power_factor(omega: Poly2, rel_tol: float = 1e-9) -> LinearPowerFactor:
    """Factor a homogeneous polynomial as a pure power of one linear form.

    Decides via the root structure of the dehomogenized one-variable
    polynomial; raises NotAPower when there are >= 2 distinct projective
    roots.  The direction is normalized to unit length with its first
    nonzero component positive.
    """
    if omega.is_zero:
        raise ZeroFunction("cannot factor the zero polynomial")
    degs = {i + j for (i, j) in omega.terms}
    if len(degs) != 1:
        raise ValueError("omega must be homogeneous")
    n = degs.pop()
    if n < 2:
        raise LowOrder("homogeneous degree must be >= 2")
    coeffs = [float(omega.coeff(n - k, k)) for k in range(n + 1)]  # P(t) = sum c_k t^k
    scale = max(abs(c) for c in coeffs)
    trimmed = [c if abs(c) > 1e-12 * scale else 0.0 for c in coeffs]
    d = max((k for k, c in enumerate(trimmed) if c != 0.0), default=-1)
    if d == 0:
        # omega = c0 * x^n
        return _normalized_power(float(trimmed[0]), 1.0, 0.0, n)
    if d < n:
        # an x-factor of multiplicity n-d > 0 plus other roots
        raise NotAPower("mixed x-factor and finite roots")
    cn = trimmed[n]
    t0 = -trimmed[n - 1] / (n * cn)
    # verify c_k == cn * C(n, k) * (-t0)^(n-k) for all k
    for k in range(n + 1):
        expected = cn * math.comb(n, k) * (-t0) ** (n - k)
        if abs(trimmed[k] - expected) > rel_tol * scale:
            raise NotAPower("more than one distinct projective root")
    # omega = cn * (y - t0 x)^n
    return _normalized_power(cn, -t0, 1.0, n)


def _normalized_power(a: float, alpha: float, beta: float, n: int) -> LinearPowerFactor:
    norm = math.hypot(alpha, beta)
    alpha, beta = alpha / norm, beta / norm
    a = a * norm**n
    if alpha < 0 or (alpha == 0 and beta < 0):
        alpha, beta = -alpha, -beta
        a = a * (-1) ** n
    return LinearPowerFactor(a=a, direction=(alpha, beta), n=n)


# --- factorization along an umbilic segment ------------------------------

@dataclass(frozen=True)
class SegmentFactorization:
    """h = u**n * eta in the frame where u is the segment's normal coordinate.

    ``theta`` is the angle of the segment's unit normal, ``n`` the exact
    vanishing order along the segment, and ``eta`` the cofactor expressed in
    the rotated coordinates (u, v).
    """

    theta: float
    n: int
    eta: Poly2

    def __post_init__(self):
        if self.n <= 2:
            raise OrderTooLow(f"vanishing order {self.n} <= 2")
        if not self._eta_nonzero_on_axis():
            raise ValueError("cofactor vanishes identically along the segment")

    def _eta_nonzero_on_axis(self) -> bool:
        if abs(float(self.eta(0, 0))) > 1e-12 * max(self.eta.max_abs_coeff(), 1e-300):
            return True
        return any(abs(float(self.eta(0, yv))) > 0 for yv in (0.05, -0.05, 0.1, -0.1))

    @property
    def normal(self):
        c, s = rotation_pair(self.theta)
        return np.array([float(c), float(s)])

    @property
    def tangent(self):
        c, s = rotation_pair(self.theta)
        return np.array([-float(s), float(c)])

    def reconstruct(self) -> Poly2:
        """u**n * eta, for comparison against the rotated input."""
        return Poly2.monomial(self.n, 0) * self.eta

    def to_dict(self):
        return {"theta": float(self.theta), "n": self.n,
                "eta_terms": [[i, j, float(c)] for i, j, c in self.eta]}


def segment_factorization(f: Poly2, theta: float, rel_tol: float = 1e-12) -> SegmentFactorization:
    """Factor out the maximal power of the line u = cos(theta)x + sin(theta)y.

    Rotates coordinates (exactly at axis angles, else by binomial expansion
    with float cos/sin), strips roundoff-level coefficients, and shifts the
    u-exponent; division is exact by construction.  Raises OrderTooLow when
    the order is < 3.
    """
    g = f.in_rotated_frame(theta)
    g = g.strip_small(rel_tol)
    if g.is_zero:
        raise ZeroFunction("zero polynomial has no factorization")
    n = g.x_order()
    if n < 3:
        raise OrderTooLow(f"vanishing order {n} < 3 along the candidate line")
    eta = g.shift_x_exponent(n)
    return SegmentFactorization(theta=float(theta), n=n, eta=eta)
