"""Seeded generators of saddle polynomials for the verification suites."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .poly import Disk, Poly2, X, Y, evaluate_jet, saddle_check


def harmonic_re(n: int) -> Poly2:
    """Re (x + i y)^n."""
    out = Poly2()
    for k in range(0, n + 1, 2):
        out = out + Poly2.monomial(n - k, k, math.comb(n, k) * (-1) ** (k // 2))
    return out


def harmonic_im(n: int) -> Poly2:
    """Im (x + i y)^n."""
    out = Poly2()
    for k in range(1, n + 1, 2):
        out = out + Poly2.monomial(n - k, k, math.comb(n, k) * (-1) ** ((k - 1) // 2))
    return out


@dataclass(frozen=True)
class CatalogEntry:
    kind: str
    poly: Poly2
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {"kind": self.kind,
                "terms": [[i, j, float(c)] for i, j, c in self.poly],
                "meta": {k: (float(v) if isinstance(v, (int, float, np.floating)) else v)
                         for k, v in self.meta.items()}}


def _random_harmonic(rng) -> Poly2:
    # harmonic functions satisfy det D^2 h = -hxx^2 - hxy^2 <= 0 identically
    h = Poly2()
    degs = rng.choice(np.arange(2, 7), size=rng.integers(1, 3), replace=False)
    for n in degs:
        ar, ai = rng.uniform(-1, 1, 2)
        h = h + ar * harmonic_re(int(n)) + ai * harmonic_im(int(n))
    return h


def _random_separable(rng) -> Poly2:
    # f(x) + g(y) with f'' >= 0 and g'' <= 0 everywhere
    f = Poly2()
    g = Poly2()
    for k in (2, 4, 6):
        f = f + Poly2.monomial(k, 0, float(rng.uniform(0, 1)))
        g = g - Poly2.monomial(0, k, float(rng.uniform(0, 1)))
    return f + g


def _random_segment_form(rng) -> Poly2:
    # u^n (1 + beta v) in a rotated frame: umbilic segment of order n
    n = int(rng.integers(3, 6))
    beta = float(rng.uniform(-0.8, 0.8))
    amp = float(rng.uniform(0.2, 1.5)) * (1 if rng.uniform() < 0.5 else -1)
    base = amp * Poly2.monomial(n, 0) * (1 + beta * Y)
    theta = float(rng.uniform(0, math.pi))
    c, s = math.cos(theta), math.sin(theta)
    # substitute the rotated coordinates u = c x + s y, v = -s x + c y
    return base.compose_linear(c, s, -s, c), n, theta


def _random_rotation(rng, h: Poly2) -> Poly2:
    theta = float(rng.uniform(0, math.pi))
    c, s = math.cos(theta), math.sin(theta)
    return h.compose_linear(c, -s, s, c)


def saddle_catalog(seed: int, count: int, region: Optional[Disk] = None,
                   grid_n: int = 41) -> List[CatalogEntry]:
    """Deterministic catalog of ``count`` saddle polynomials.

    Mixes harmonic polynomials, separable convex-minus-convex forms,
    segment forms u^n * eta and random rotations of all three; every
    candidate is gated by the grid saddle certificate before admission.
    """
    region = region or Disk((0.0, 0.0), 0.8)
    rng = np.random.default_rng(seed)
    out: List[CatalogEntry] = []
    while len(out) < count:
        pick = len(out) % 4
        meta = {}
        if pick == 0:
            h = _random_harmonic(rng)
            kind = "harmonic"
        elif pick == 1:
            h = _random_separable(rng)
            kind = "separable"
        elif pick == 2:
            h, n, theta = _random_segment_form(rng)
            kind = "segment"
            meta = {"n": n, "theta": theta}
        else:
            h = _random_rotation(rng, _random_harmonic(rng) if rng.uniform() < 0.5
                                 else _random_separable(rng))
            kind = "rotated"
        if h.degree < 2:
            continue
        scale = max(h.max_abs_coeff(), 1.0)
        rep = saddle_check(h, region, grid_n=grid_n, tol=1e-8 * scale**2)
        if not rep.passed:
            continue
        out.append(CatalogEntry(kind=kind, poly=h, meta=meta))
    return out


def origin_umbilic_entries(entries: List[CatalogEntry], tol: float = 1e-9) -> List[CatalogEntry]:
    """Entries whose Hessian vanishes at the origin (an origin umbilic)."""
    out = []
    for e in entries:
        j = evaluate_jet(e.poly, (0.0, 0.0))
        scale = max(e.poly.max_abs_coeff(), 1.0)
        if max(abs(float(j.fxx)), abs(float(j.fxy)), abs(float(j.fyy))) <= tol * scale:
            out.append(e)
    return out
