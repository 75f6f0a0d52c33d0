"""Umbilic charts of a triaxial ellipsoid, the Poincare-Hopf positive control.

An ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1 with a < b < c has exactly
four umbilic points, all in the xz-plane, each a lemon-type singularity of
the principal cross field with index +1/2; the indices sum to 2, the Euler
characteristic of the sphere.  Each umbilic gets a local graph chart
z = f(x, y) whose Taylor polynomial feeds the same cross-field and index
machinery used everywhere else.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Tuple

from .fields import ExtendedCrossField
from .indexing import IndexReport, line_index, poincare_hopf_sum
from .poly import Poly2


def umbilic_positions(a: float, b: float, c: float):
    """The four umbilics of the ellipsoid with semi-axes a < b < c."""
    if not a < b < c:
        raise ValueError("semi-axes must satisfy a < b < c")
    xu = a * math.sqrt((b**2 - a**2) / (c**2 - a**2))
    zu = c * math.sqrt((c**2 - b**2) / (c**2 - a**2))
    return [(sx * xu, 0.0, sz * zu) for sx in (1, -1) for sz in (1, -1)]


def _sqrt_series(v: Poly2, deg: int) -> Poly2:
    """Taylor polynomial of sqrt(1 + v) to total degree ``deg``; v(0,0)=0."""
    out = Poly2.const(1.0)
    coeff = 1.0
    power = Poly2.const(1.0)
    for k in range(1, deg + 1):
        coeff *= (0.5 - (k - 1)) / k
        power = (power * v).truncate(deg)
        out = out + coeff * power
    return out


def umbilic_chart_poly(a: float, b: float, c: float, sx: int, sz: int,
                       deg: int = 10) -> Poly2:
    """Graph chart z = f(x, y) of the ellipsoid, centered at an umbilic.

    Local coordinates put the umbilic (sx*xu, 0, sz*zu) at the origin of
    the chart; the returned polynomial is the degree-``deg`` Taylor
    expansion of sz * c * sqrt(1 - x^2/a^2 - y^2/b^2) there.
    """
    x0 = sx * a * math.sqrt((b**2 - a**2) / (c**2 - a**2))
    u0 = 1.0 - x0**2 / a**2
    # u(x0 + xi, eta) = u0 - (2 x0 xi + xi^2)/a^2 - eta^2/b^2
    du = Poly2([(1, 0, -2 * x0 / a**2), (2, 0, -1.0 / a**2), (0, 2, -1.0 / b**2)])
    v = du * (1.0 / u0)
    return _sqrt_series(v, deg) * (sz * c * math.sqrt(u0))


def umbilic_cross_indices(a: float, b: float, c: float, *, r0: float = 0.05,
                          deg: int = 10, **kwargs) -> List[Tuple[str, IndexReport]]:
    """Certified index of the principal cross at each of the four umbilics."""
    out = []
    for sx in (1, -1):
        for sz in (1, -1):
            h = umbilic_chart_poly(a, b, c, sx, sz, deg=deg)
            src = ExtendedCrossField(h, ambient="euclidean", locus=[], t=0.0)
            rep = line_index(src, (0.0, 0.0), r0, **kwargs)
            out.append((f"umbilic(sx={sx:+d},sz={sz:+d})", rep))
    return out


def poincare_hopf_ellipsoid(a: float, b: float, c: float, **kwargs):
    """(per-umbilic index reports, exact index sum) for the ellipsoid."""
    charts = umbilic_cross_indices(a, b, c, **kwargs)
    total = poincare_hopf_sum([(name, (0.0, 0.0), rep) for name, rep in charts])
    return charts, total
