"""Scenario-driven analysis runner behind the command-line interface.

A scenario is one JSON document: a polynomial, an ambient, a region, and a
list of analyses to run in order.  Reports are written as deterministic
JSON (stable key order; the wall-time field is the only nondeterministic
entry) plus CSV grids for the field exports.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import sphere as sphere_mod
from .catalog import saddle_catalog
from .ellipsoid import poincare_hopf_ellipsoid
from .errors import (AnalysisError, CertificationFailure, ConfigError,
                     NoDirectionFound, NoStabilization, SaddleFieldsError)
from .fields import (ExtendedCrossField, admissible_direction,
                     extended_grad_field, extended_z_field)
from .indexing import (index_doubling_check, homotopy_invariance_check,
                       line_index, vector_index)
from .poly import Disk, Poly2, saddle_check
from .umbilics import detect_segments, umbilic_locus

SCHEMA_ID = "saddlefields/report-v1"

ANALYSIS_KINDS = ("saddle", "umbilic", "field-grid", "index", "homotopy",
                  "doubling", "sphere-build", "ph-sum")

_FIELD_GRID_KINDS = ("principal", "z", "grad_nu", "homotopy")
_INDEX_FIELDS = ("grad_nu", "z", "principal", "hessian")


def _expect_keys(d: dict, allowed, context: str, required=()):
    if not isinstance(d, dict):
        raise ConfigError(f"{context}: expected an object, got {type(d).__name__}")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(d)
    if missing:
        raise ConfigError(f"{context}: missing keys {sorted(missing)}")


@dataclass
class Scenario:
    name: str
    function: Optional[Poly2]
    ambient: str
    region: Disk
    analyses: List[dict]
    params: dict
    out_dir: Optional[str]
    exact: bool
    seed: int

    @classmethod
    def from_dict(cls, cfg: dict, *, exact_override: Optional[bool] = None,
                  seed_override: Optional[int] = None) -> "Scenario":
        _expect_keys(cfg, ("name", "function", "ambient", "region", "analyses",
                           "params", "output"), "scenario", required=("analyses",))
        name = cfg.get("name", "scenario")
        exact = bool(exact_override) if exact_override is not None else False
        h = None
        if "function" in cfg:
            fn = cfg["function"]
            _expect_keys(fn, ("terms", "exact"), "function", required=("terms",))
            exact = bool(fn.get("exact", exact))
            if exact_override is not None:
                exact = exact_override
            h = Poly2.from_literal(fn["terms"], exact=exact)
        ambient = cfg.get("ambient", "spherical")
        if ambient not in ("spherical", "euclidean"):
            raise ConfigError(f"unknown ambient {ambient!r}")
        region_cfg = cfg.get("region", {})
        _expect_keys(region_cfg, ("center", "radius"), "region")
        region = Disk(tuple(region_cfg.get("center", (0.0, 0.0))),
                      float(region_cfg.get("radius", 1.0)))
        params = cfg.get("params", {})
        _expect_keys(params, ("grid_n", "tol", "radius", "band", "seed",
                              "t_grid", "samples", "nu_angle"), "params")
        analyses = cfg["analyses"]
        if not isinstance(analyses, list) or not analyses:
            raise ConfigError("analyses must be a nonempty list")
        for a in analyses:
            if not isinstance(a, dict) or "kind" not in a:
                raise ConfigError("each analysis needs a 'kind'")
            if a["kind"] not in ANALYSIS_KINDS:
                raise ConfigError(f"unknown analysis kind {a['kind']!r}")
        output = cfg.get("output", {})
        _expect_keys(output, ("dir",), "output")
        seed = int(seed_override if seed_override is not None
                   else params.get("seed", 0))
        return cls(name=name, function=h, ambient=ambient, region=region,
                   analyses=analyses, params=params, out_dir=output.get("dir"),
                   exact=exact, seed=seed)

    def require_function(self) -> Poly2:
        if self.function is None:
            raise ConfigError("this analysis needs a 'function' entry")
        return self.function


def _fraction_str(x: Fraction) -> str:
    return f"{int(x * 2)}/2"


# --- individual analysis runners -------------------------------------------

def _run_saddle(sc: Scenario, a: dict):
    _expect_keys(a, ("kind", "grid_n", "tol"), "saddle analysis")
    rep = saddle_check(sc.require_function(), sc.region,
                       grid_n=int(a.get("grid_n", sc.params.get("grid_n", 65))),
                       tol=float(a.get("tol", sc.params.get("tol", 0.0))))
    return rep.passed, rep.to_dict()


def _run_umbilic(sc: Scenario, a: dict):
    _expect_keys(a, ("kind", "grid_n", "tol"), "umbilic analysis")
    rep = umbilic_locus(sc.require_function(), sc.region,
                        grid_n=int(a.get("grid_n", sc.params.get("grid_n", 64))),
                        tol=float(a.get("tol", sc.params.get("tol", 1e-9))),
                        strict=False)
    return rep.classified, rep.to_dict()


def _direction_for(sc: Scenario, a: dict, locus):
    ang = a.get("nu_angle", sc.params.get("nu_angle"))
    if ang is not None:
        return np.array([math.cos(float(ang)), math.sin(float(ang))])
    return admissible_direction(sc.require_function(), locus, sc.region,
                                seed=sc.seed)


def _run_index(sc: Scenario, a: dict):
    _expect_keys(a, ("kind", "field", "radius", "expect", "nu_angle"), "index analysis")
    h = sc.require_function()
    which = a.get("field", "grad_nu")
    if which not in _INDEX_FIELDS:
        raise ConfigError(f"unknown index field {which!r}")
    r0 = float(a.get("radius", sc.params.get("radius", 0.4 * sc.region.radius)))
    locus = detect_segments(h)
    if which == "grad_nu":
        nu = _direction_for(sc, a, locus)
        fld = extended_grad_field(h, nu, locus)
        rep = line_index(fld.angles_many, (0.0, 0.0), r0)
        data = {"field": which, "nu": [float(nu[0]), float(nu[1])]}
    elif which == "z":
        fld = extended_z_field(h, locus)
        rep = vector_index(fld, (0.0, 0.0), r0)
        data = {"field": which}
    else:
        t = 0.0 if which == "principal" else 1.0
        src = ExtendedCrossField(h, ambient=sc.ambient, locus=locus, t=t,
                                 region_radius=sc.region.radius)
        rep = line_index(src, (0.0, 0.0), r0)
        data = {"field": which}
    data.update(rep.to_dict())
    ok = rep.certified
    if "expect" in a:
        ok = ok and data["index"] == a["expect"]
        data["expect"] = a["expect"]
    return ok, data


def _run_homotopy(sc: Scenario, a: dict):
    _expect_keys(a, ("kind", "t_grid", "radius"), "homotopy analysis")
    h = sc.require_function()
    t_grid = a.get("t_grid", sc.params.get("t_grid", [0.0, 0.25, 0.5, 0.75, 1.0]))
    r0 = float(a.get("radius", sc.params.get("radius", 0.4 * sc.region.radius)))
    rep = homotopy_invariance_check(h, t_grid, r0=r0, ambient=sc.ambient)
    return rep.constant, rep.to_dict()


def _run_doubling(sc: Scenario, a: dict):
    _expect_keys(a, ("kind", "radius"), "doubling analysis")
    h = sc.require_function()
    r0 = float(a.get("radius", sc.params.get("radius", 0.4 * sc.region.radius)))
    rep = index_doubling_check(h, r0=r0)
    return rep.holds, rep.to_dict()


def _run_sphere_build(sc: Scenario, a: dict, out_dir: Path):
    _expect_keys(a, ("kind", "params", "write_atlas"), "sphere-build analysis")
    overrides = a.get("params", {})
    _expect_keys(overrides, ("flat_scale", "blend_center", "blend_halfwidth",
                             "cap_outer_radius", "curvature_tol"), "sphere params")
    params = sphere_mod.AnnulusParams(**{**sphere_mod.DEFAULT_PARAMS.to_dict(),
                                         **overrides})
    annulus, cert = sphere_mod.assemble_saddle_annulus(params)
    atlas = sphere_mod.lift_to_sphere(annulus)
    rep = sphere_mod.verify_smooth_saddle_sphere(atlas)
    if a.get("write_atlas", True):
        write_atlas_files(atlas, out_dir)
    return rep.passed, {"certificate": cert.to_dict(), "verification": rep.to_dict(),
                        "manifest": atlas.manifest()}


def _run_ph_sum(sc: Scenario, a: dict):
    _expect_keys(a, ("kind", "semi_axes", "radius", "expect"), "ph-sum analysis")
    axes = a.get("semi_axes", [1.0, 1.5, 2.0])
    if len(axes) != 3:
        raise ConfigError("semi_axes must have three entries")
    kwargs = {}
    if "radius" in a:
        kwargs["r0"] = float(a["radius"])
    charts, total = poincare_hopf_ellipsoid(*[float(v) for v in axes], **kwargs)
    expect = Fraction(a.get("expect", 2))
    data = {"semi_axes": [float(v) for v in axes],
            "indices": {name: rep.to_dict() for name, rep in charts},
            "sum": _fraction_str(total)}
    return total == expect and all(r.certified for _, r in charts), data


def export_field_grid(h: Poly2, ambient: str, region: Disk, n: int, which: str,
                      path, *, t: float = 0.5, nu=None, seed: int = 0) -> int:
    """Write an n x n field grid as CSV rows ``x,y,theta1,theta2,flag``.

    Rows are emitted row-major in x then y.  Evaluation problems are
    recorded in the flag column ('degenerate', or the error name) without
    aborting the grid; samples inside a segment band carry 'extended'.
    """
    if n < 2:
        raise ConfigError("grid size must be >= 2")
    if which not in _FIELD_GRID_KINDS:
        raise ConfigError(f"unknown field kind {which!r}")
    locus = detect_segments(h)
    xs = np.linspace(region.center[0] - region.radius,
                     region.center[0] + region.radius, n)
    ys = np.linspace(region.center[1] - region.radius,
                     region.center[1] + region.radius, n)
    gx, gy = [a.ravel() for a in np.meshgrid(xs, ys, indexing="ij")]
    rows: List[str] = []
    if which in ("principal", "homotopy"):
        tval = {"principal": 0.0, "homotopy": float(t)}[which]
        src = ExtendedCrossField(h, ambient=ambient, locus=locus, t=tval,
                                 region_radius=region.radius)
        t1, t2, degen = src.cross_many(gx, gy)
        band = src.in_band(gx, gy)
        for k in range(len(gx)):
            if degen[k]:
                rows.append(f"{float(gx[k])!r},{float(gy[k])!r},,,degenerate")
            else:
                flag = "extended" if band[k] else "ok"
                rows.append(f"{float(gx[k])!r},{float(gy[k])!r},"
                            f"{float(t1[k])!r},{float(t2[k])!r},{flag}")
    else:
        if which == "grad_nu":
            if nu is None:
                nu = admissible_direction(h, locus, region, seed=seed)
            fld = extended_grad_field(h, nu, locus)
        else:
            fld = extended_z_field(h, locus)
        v = fld.vectors_many(gx, gy)
        norms = np.hypot(v[:, 0], v[:, 1])
        ang = np.mod(np.arctan2(v[:, 1], v[:, 0]), math.pi)
        scale = max(float(np.max(norms)), 1e-300)
        for k in range(len(gx)):
            if norms[k] <= 1e-14 * scale:
                rows.append(f"{float(gx[k])!r},{float(gy[k])!r},,,degenerate")
            else:
                rows.append(f"{float(gx[k])!r},{float(gy[k])!r},{float(ang[k])!r},,ok")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("x,y,theta1,theta2,flag\n" + "\n".join(rows) + "\n")
    return len(rows)


def _run_field_grid(sc: Scenario, a: dict, out_dir: Path):
    _expect_keys(a, ("kind", "which", "n", "t", "nu_angle", "file"), "field-grid analysis")
    h = sc.require_function()
    which = a.get("which", "principal")
    n = int(a.get("n", sc.params.get("grid_n", 16)))
    fname = a.get("file", f"grid_{which}.csv")
    nu = None
    ang = a.get("nu_angle", sc.params.get("nu_angle"))
    if ang is not None:
        nu = np.array([math.cos(float(ang)), math.sin(float(ang))])
    count = export_field_grid(h, sc.ambient, sc.region, n, which,
                              out_dir / fname, t=float(a.get("t", 0.5)),
                              nu=nu, seed=sc.seed)
    return True, {"which": which, "rows": count, "file": fname}


def write_atlas_files(atlas, out_dir: Path):
    """JSON manifest plus CSV sample tables (x0..x3, chart id, K sign)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "atlas_manifest.json").write_text(
        json.dumps(atlas.manifest(), indent=2, sort_keys=True) + "\n")
    profile = atlas.annulus.profile
    lines = ["x0,x1,x2,x3,chart,k_sign"]
    for k in range(len(atlas.annulus_points)):
        p = atlas.annulus_points[k]
        chart = atlas.annulus_charts[k]
        r, z = atlas.annulus_meridian[k]
        if chart.startswith("joint"):
            kv = float(profile.flat_join.curvature(np.array([min(r, 1.0 - 1e-12)]))[0])
        else:
            kv = float(profile.height_chart_curvature(np.array([z]))[0])
        sign = 0 if abs(kv) <= 1e-12 else (1 if kv > 0 else -1)
        lines.append(f"{float(p[0])!r},{float(p[1])!r},{float(p[2])!r},"
                     f"{float(p[3])!r},{chart},{sign}")
    for name, pts in (("cap_top", atlas.cap_top), ("cap_bottom", atlas.cap_bottom)):
        for p in pts:
            lines.append(f"{float(p[0])!r},{float(p[1])!r},{float(p[2])!r},"
                         f"{float(p[3])!r},{name},0")
    (out_dir / "atlas_samples.csv").write_text("\n".join(lines) + "\n")


_RUNNERS = {
    "saddle": _run_saddle,
    "umbilic": _run_umbilic,
    "index": _run_index,
    "homotopy": _run_homotopy,
    "doubling": _run_doubling,
    "ph-sum": _run_ph_sum,
}


def run_scenario(config, out_dir=None, *, seed: Optional[int] = None,
                 exact: Optional[bool] = None) -> dict:
    """Execute a scenario dict or JSON file; returns the report dict.

    Writes ``report.json`` (and any analysis artifacts) under the output
    directory.  The report's ``all_passed`` reflects every analysis
    assertion; ``status`` per analysis is pass/fail/error.
    """
    if isinstance(config, (str, Path)):
        try:
            cfg = json.loads(Path(config).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"scenario file not found: {config}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"scenario is not valid JSON: {exc}") from exc
    else:
        cfg = config
    sc = Scenario.from_dict(cfg, exact_override=exact, seed_override=seed)
    out = Path(out_dir or sc.out_dir or "out")
    out.mkdir(parents=True, exist_ok=True)
    t_start = time.monotonic()
    results = []
    non_stabilized = False
    for a in sc.analyses:
        kind = a["kind"]
        entry = {"kind": kind}
        try:
            if kind == "field-grid":
                ok, data = _run_field_grid(sc, a, out)
            elif kind == "sphere-build":
                ok, data = _run_sphere_build(sc, a, out)
            else:
                ok, data = _RUNNERS[kind](sc, a)
            entry["status"] = "pass" if ok else "fail"
            entry["data"] = data
        except ConfigError:
            raise
        except (NoStabilization, CertificationFailure, NoDirectionFound) as exc:
            non_stabilized = True
            entry["status"] = "error"
            entry["error"] = {"type": type(exc).__name__, "message": str(exc)}
        except SaddleFieldsError as exc:
            entry["status"] = "error"
            entry["error"] = {"type": type(exc).__name__, "message": str(exc)}
        results.append(entry)
    report = {
        "schema": SCHEMA_ID,
        "name": sc.name,
        "seed": sc.seed,
        "exact": sc.exact,
        "analyses": results,
        "all_passed": all(r["status"] == "pass" for r in results),
        "non_stabilized": non_stabilized,
    }
    payload = dict(report)
    payload["wall_time_s"] = time.monotonic() - t_start
    (out / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return report


def write_catalog(seed: int, count: int, out_dir) -> Path:
    """CLI backend for the seeded catalog: writes catalog.json."""
    entries = saddle_catalog(int(seed), int(count))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"schema": "saddlefields/catalog-v1", "seed": int(seed),
           "count": int(count), "entries": [e.to_dict() for e in entries]}
    path = out / "catalog.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
