"""Geodesics between subharmonic potentials via rooftop envelopes.

The geodesic ``u_t`` joining ``u0`` and ``u1`` is built by Legendre duality in
the constant ``C``::

    u_t = sup_C  P(u0, u1 - C) + C t,        P(u0, u1 - C) = inf_t  u_t - C t.

Only ``t = log|zeta|`` is discretized: geodesics are rotation invariant in the
annulus variable, so a slab is a family of grid fields indexed by ``t``.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from pshlab.envelope import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    EnvelopeError,
    EnvelopeReport,
    monotone_convex_envelope,
    rooftop,
    sh_envelope,
    toric_rooftop,
)
from pshlab.grid import Field, Grid2, _raw_field, laplacian, shifted

log = logging.getLogger(__name__)

__all__ = [
    "BarrierSpec",
    "GeodesicSlab",
    "HcmaReport",
    "barrier",
    "boundary_trace_error",
    "build_c_grid",
    "chord",
    "chord_slab",
    "geodesic_dr",
    "hcma_residual",
    "kiselman_defect",
    "refine_c",
    "rooftop_from_slab",
    "sandwich_violation",
    "t_convexity_violation",
    "t_lipschitz_check",
    "toric_geodesic",
]


class BarrierError(ValueError):
    pass


def chord(u0: Field, u1: Field, t: float) -> Field:
    """``(1 - t) u0 + t u1``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return u0 * (1.0 - t) + u1 * t


def _sup_dist(u0: Field, u1: Field) -> float:
    return (u0 - u1).sup_norm()


@dataclass(frozen=True)
class BarrierSpec:
    """Subgeodesic barrier family.

    ``max_two``: ``max(u0 - M t, u1 - M (1 - t))``.
    ``max_three_zero_bv``: adds the branch ``u0 + u1``; needs ``u0, u1 <= 0``
    vanishing on the boundary.
    ``lipschitz_defining``: ``max(V_t, u0 + A rho + C t)`` with the defining
    function ``rho = |z|^2 - 1`` of the unit disk; ``params = (A, C)``.
    """

    kind: str = "max_two"
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("max_two", "max_three_zero_bv", "lipschitz_defining"):
            raise BarrierError(f"unknown barrier kind {self.kind!r}")
        if self.kind == "lipschitz_defining" and len(self.params) != 2:
            raise BarrierError("lipschitz_defining takes parameters (A, C)")


def _first_bad(mask: np.ndarray, grid: Grid2) -> str:
    i, j = np.argwhere(mask)[0]
    return f"node (row {i}, col {j}) at ({grid.x[i, j]:.6g}, {grid.y[i, j]:.6g})"


def barrier(spec: BarrierSpec, u0: Field, u1: Field, t: float, *, check_tol: float = 1e-9) -> Field:
    """Pointwise maximum of the subgeodesic branches of ``spec`` at ``t``."""
    g = u0.grid
    M = _sup_dist(u0, u1)
    out = (u0 - M * t).maximum(u1 - M * (1.0 - t))
    if spec.kind == "max_two":
        return out
    if spec.kind == "max_three_zero_bv":
        for name, u in (("u0", u0), ("u1", u1)):
            pos = g.active & (u.values > check_tol)
            if pos.any():
                raise BarrierError(f"{name} must be <= 0; violated at {_first_bad(pos, g)}")
            bv = g.boundary & (np.abs(u.values) > check_tol)
            if bv.any():
                raise BarrierError(f"{name} must vanish on the boundary; violated at {_first_bad(bv, g)}")
        return out.maximum(u0 + u1)
    A, C = spec.params
    if A < 0:
        raise BarrierError("A must be nonnegative")
    bd = g.boundary & (np.abs(u1.values - u0.values - C) > check_tol)
    if bd.any():
        raise BarrierError(f"u1 - u0 must equal C={C} on the boundary; violated at {_first_bad(bd, g)}")
    rho = Field(g, np.where(g.active, np.abs(g.z_eval) ** 2 - 1.0, np.nan))
    branch = u0 + A * rho
    # below the chord at t = 1 (and hence for all t) iff u0 + A rho + C <= u1
    high = g.active & (branch.values + C > u1.values + check_tol)
    if high.any():
        raise BarrierError(f"A={A} too small: u0 + A rho + C > u1 at {_first_bad(high, g)}")
    return out.maximum(branch + C * t)


# ---------------------------------------------------------------- the slab

@dataclass(frozen=True, eq=False)
class GeodesicSlab:
    """Geodesic planes on a uniform ``t`` grid together with their DR data.

    ``rooftops[j]`` holds ``P(u0, u1 - C_grid[j])`` on all nodes; it is
    ``None`` for slabs read back from disk.
    """

    t_grid: np.ndarray
    planes: tuple[Field, ...]
    C_grid: np.ndarray
    delta_C: float
    u0: Field
    u1: Field
    stats: tuple[dict, ...] = ()
    rooftops: np.ndarray | None = field(default=None, repr=False)
    input_defect: tuple[float, float] = (0.0, 0.0)
    tol: float = DEFAULT_TOL

    @property
    def grid(self) -> Grid2:
        return self.u0.grid

    @property
    def M(self) -> float:
        return _sup_dist(self.u0, self.u1)

    @property
    def n_t(self) -> int:
        return int(self.t_grid.size)

    def stack(self) -> np.ndarray:
        """Planes as an array of shape ``(n_t, ny, nx)``."""
        return np.stack([p.values for p in self.planes])

    def plane_at(self, t: float) -> Field:
        """``max_C P^C + C t`` at an arbitrary ``t`` (endpoints give the inputs)."""
        if t <= 0.0:
            return self.u0
        if t >= 1.0:
            return self.u1
        if self.rooftops is None:
            raise ValueError("slab carries no rooftop data")
        vals = np.max(self.rooftops + (self.C_grid * t)[:, None, None], axis=0)
        return Field(self.grid, vals)

    def manifest(self) -> dict:
        return {
            "t_grid": [float(t) for t in self.t_grid],
            "C_grid": [float(c) for c in self.C_grid],
            "delta_C": float(self.delta_C),
            "M": self.M,
            "tol": self.tol,
            "input_defect": [float(d) for d in self.input_defect],
            "stats": list(self.stats),
            "domain": {"kind": self.grid.domain.kind, "params": list(self.grid.domain.params)},
            "n_per_axis": self.grid.nx,
        }

    def save(self, directory: str | os.PathLike) -> Path:
        """Write ``plane_###.csv`` per ``t`` plus ``manifest.json``."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for k, p in enumerate(self.planes):
            (d / f"plane_{k:03d}.csv").write_text(p.to_csv())
        (d / "manifest.json").write_text(json.dumps(self.manifest(), sort_keys=True, indent=2))
        return d

    @classmethod
    def load(cls, directory: str | os.PathLike, grid: Grid2) -> "GeodesicSlab":
        """Read a saved slab back onto ``grid`` (without rooftop data)."""
        d = Path(directory)
        man = json.loads((d / "manifest.json").read_text())
        planes = []
        for k in range(len(man["t_grid"])):
            data = np.loadtxt(d / f"plane_{k:03d}.csv", delimiter=",", skiprows=1, ndmin=2)
            vals = np.full(grid.shape, np.nan)
            for x, y, v in data:
                vals[grid.lattice_index(x, y)] = v
            planes.append(Field(grid, vals))
        return cls(
            np.asarray(man["t_grid"]), tuple(planes), np.asarray(man["C_grid"]), man["delta_C"],
            planes[0], planes[-1], tuple(man["stats"]), None, tuple(man["input_defect"]), man["tol"],
        )


def build_c_grid(d_min: float, d_max: float, n_C: int) -> tuple[np.ndarray, float]:
    """Uniform grid ``[d_min - dC, d_max + dC]`` with ``n_C`` values.

    The step ``dC = (d_max - d_min) / (n_C - 3)`` puts ``d_min`` and ``d_max``
    on the grid; a degenerate range gives the single value ``d_min``.
    """
    if n_C < 4:
        raise ValueError("n_C must be >= 4")
    span = d_max - d_min
    if span <= 1e-14 * (1.0 + abs(d_min) + abs(d_max)):
        return np.array([d_min]), 0.0
    dC = span / (n_C - 3)
    return d_min - dC + dC * np.arange(n_C), dC


def refine_c(n_C: int) -> int:
    """Node count whose C grid halves the step and contains the old grid."""
    return 2 * (n_C - 3) + 3


def geodesic_dr(
    u0: Field,
    u1: Field,
    n_t: int = 21,
    n_C: int = 81,
    tol: float = DEFAULT_TOL,
    *,
    max_iter: int = DEFAULT_MAX_ITER,
    jobs: int = 1,
    project_inputs: bool = True,
) -> GeodesicSlab:
    """Geodesic slab from the supremum over ``C`` of ``P(u0, u1 - C) + C t``.

    With ``project_inputs`` the endpoints are first replaced by their discrete
    envelopes (a no-op up to ``tol`` for discretely subharmonic data); the
    sup-norm changes are recorded in ``input_defect``.
    """
    if u0.grid is not u1.grid:
        raise ValueError("geodesic endpoints must share a grid")
    if n_t < 2:
        raise ValueError("n_t must be >= 2")
    defect = (0.0, 0.0)
    if project_inputs:
        reps = [sh_envelope(u, tol, max_iter) for u in (u0, u1)]
        for r in reps:
            if not r.converged:
                raise EnvelopeError("endpoint projection failed", r)
        defect = tuple((r.envelope - u).sup_norm() for r, u in zip(reps, (u0, u1)))
        u0, u1 = reps[0].envelope, reps[1].envelope
    g = u0.grid
    diff = (u1 - u0).values[g.active]
    C_grid, dC = build_c_grid(float(diff.min()), float(diff.max()), n_C)

    def solve_chunk(cs: np.ndarray) -> list[EnvelopeReport]:
        out, contact = [], None
        for C in cs:
            rep = rooftop(u0, u1 - C, tol, max_iter, init_contact=contact)
            if not rep.converged:
                raise EnvelopeError(f"rooftop at C={C:.6g} did not converge", rep)
            contact = rep.contact_mask
            out.append(rep)
        return out

    jobs = max(1, min(int(jobs), C_grid.size))
    chunks = np.array_split(C_grid, jobs)
    if jobs == 1:
        reports = solve_chunk(C_grid)
    else:
        with ThreadPoolExecutor(jobs) as ex:
            reports = [r for part in ex.map(solve_chunk, chunks) for r in part]

    roofs = np.stack([r.envelope.values for r in reports])
    t_grid = np.linspace(0.0, 1.0, n_t)
    planes = [u0]
    for t in t_grid[1:-1]:
        planes.append(Field(g, np.max(roofs + (C_grid * t)[:, None, None], axis=0)))
    planes.append(u1)
    stats = tuple(
        {"C": float(C), "iterations": r.iterations, "final_update": float(r.final_update), "converged": r.converged}
        for C, r in zip(C_grid, reports)
    )
    return GeodesicSlab(t_grid, tuple(planes), C_grid, dC, u0, u1, stats, roofs, defect, tol)


def chord_slab(u0: Field, u1: Field, n_t: int = 21) -> GeodesicSlab:
    """Slab of chords ``(1 - t) u0 + t u1``; a subgeodesic, rarely a geodesic."""
    t_grid = np.linspace(0.0, 1.0, n_t)
    planes = tuple(chord(u0, u1, float(t)) for t in t_grid)
    return GeodesicSlab(t_grid, planes, np.array([]), 0.0, u0, u1)


def toric_geodesic(u0_s, u1_s, s, t_grid, n_C: int = 2001) -> tuple[np.ndarray, np.ndarray]:
    """Geodesic of radial data by the same supremum over ``C`` with 1D hulls.

    ``u0_s`` and ``u1_s`` are nondecreasing profiles on the ``s = log r`` grid
    ``s``. Returns ``(planes, C_grid)`` with ``planes`` of shape ``(len(t_grid), len(s))``.
    """
    a = monotone_convex_envelope(u0_s, s)
    b = monotone_convex_envelope(u1_s, s)
    d = b - a
    C_grid, _ = build_c_grid(float(d.min()), float(d.max()), n_C)
    roofs = np.stack([toric_rooftop(a, b - C, s) for C in C_grid])
    t_grid = np.asarray(t_grid, dtype=float)
    planes = np.max(roofs[None] + C_grid[None, :, None] * t_grid[:, None, None], axis=1)
    planes[t_grid <= 0.0] = a
    planes[t_grid >= 1.0] = b
    return planes, C_grid


# ------------------------------------------------------------ inverse side

def _inf_over_t(roofs: np.ndarray, C_grid: np.ndarray, C: float) -> np.ndarray:
    """Exact ``inf_{t in [0,1]} max_j roofs[j] + (C_j - C) t`` per node.

    The objective is convex piecewise linear in ``t``, so its minimum sits at
    ``t = 0``, ``t = 1`` or at a crossing of two lines with adjacent slopes.
    """
    b = C_grid - C
    cand = [np.zeros(roofs.shape[1:]), np.ones(roofs.shape[1:])]
    if C_grid.size > 1:
        with np.errstate(invalid="ignore", divide="ignore"):
            cross = (roofs[:-1] - roofs[1:]) / (b[1:] - b[:-1])[:, None, None]
        cand.extend(np.clip(cross, 0.0, 1.0))
    best = None
    for t in cand:
        val = np.max(roofs + b[:, None, None] * t[None], axis=0)
        best = val if best is None else np.fmin(best, val)
    return best


def rooftop_from_slab(slab: GeodesicSlab, C: float, *, exact: bool | None = None) -> Field:
    """``inf_t u_t - C t`` at every node.

    ``exact=True`` minimises over all ``t`` in ``[0, 1]`` using the slab's
    rooftop data; ``exact=False`` takes the minimum over the stored t-planes
    only. The default is exact when rooftop data is present.
    """
    if exact is None:
        exact = slab.rooftops is not None
    g = slab.grid
    if exact:
        if slab.rooftops is None:
            raise ValueError("exact infimum needs rooftop data")
        vals = _inf_over_t(slab.rooftops, slab.C_grid, C)
        # endpoints are the inputs themselves, the limits of the t-family
        vals = np.fmin(vals, np.fmin(slab.u0.values, slab.u1.values - C))
    else:
        st = slab.stack()
        vals = np.min(st - (C * slab.t_grid)[:, None, None], axis=0)
    return Field(g, vals)


# ------------------------------------------------------------- diagnostics

def sandwich_violation(slab: GeodesicSlab) -> tuple[float, float]:
    """Largest excess of ``V_t`` over a plane and of a plane over the chord."""
    lo = hi = -np.inf
    spec = BarrierSpec("max_two")
    m = slab.grid.active
    for t, p in zip(slab.t_grid, slab.planes):
        v = barrier(spec, slab.u0, slab.u1, float(t)).values
        c = chord(slab.u0, slab.u1, float(t)).values
        lo = max(lo, float(np.max((v - p.values)[m])))
        hi = max(hi, float(np.max((p.values - c)[m])))
    return lo, hi


def t_convexity_violation(slab: GeodesicSlab) -> float:
    """``max(0, -min)`` of second differences in ``t`` over all nodes."""
    st = slab.stack()[:, slab.grid.active]
    if st.shape[0] < 3:
        return 0.0
    d2 = st[2:] + st[:-2] - 2 * st[1:-1]
    return float(max(0.0, -np.min(d2)))


def t_lipschitz_check(slab: GeodesicSlab) -> tuple[float, float]:
    """``(max |u_t - u_s| / |t - s|, M)`` over all plane pairs and nodes."""
    st = slab.stack()[:, slab.grid.active]
    t = slab.t_grid
    ratio = 0.0
    for a in range(t.size):
        for b in range(a + 1, t.size):
            r = float(np.max(np.abs(st[b] - st[a]))) / (t[b] - t[a])
            ratio = max(ratio, r)
    return ratio, slab.M


def boundary_trace_error(slab: GeodesicSlab) -> float:
    """Max over boundary nodes and ``t`` of ``|u_t - ((1 - t) u0 + t u1)|``."""
    bd = slab.grid.boundary
    err = 0.0
    for t, p in zip(slab.t_grid, slab.planes):
        c = chord(slab.u0, slab.u1, float(t)).values
        err = max(err, float(np.max(np.abs(p.values - c)[bd])))
    return err


@dataclass(frozen=True, eq=False)
class HcmaReport:
    """Complex Hessian determinant of a slab in the ``(z, log zeta)`` chart.

    ``values[k]`` belongs to ``t_grid[k + 1]``; NaN where undefined or masked.
    """

    values: np.ndarray
    laplacian_min: float
    t_grid: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.nanmax(np.abs(self.values)))

    @property
    def signed_min(self) -> float:
        return float(np.nanmin(self.values))

    def summary(self) -> dict:
        return {"max_abs": self.max_abs, "signed_min": self.signed_min, "laplacian_min": self.laplacian_min}


def hcma_residual(slab: GeodesicSlab, radius: float | None = None) -> HcmaReport:
    """``(1/16)(Lap_z u * u_tt - u_xt^2 - u_yt^2)`` at interior nodes and ``t``.

    Centered differences throughout. ``radius`` restricts the report to nodes
    with ``|z| <= radius``.
    """
    if slab.n_t < 5:
        raise ValueError("hcma_residual needs n_t >= 5")
    g = slab.grid
    h = g.spacing
    dt = float(slab.t_grid[1] - slab.t_grid[0])
    st = slab.stack()
    mask = g.interior.copy()
    if radius is not None:
        mask &= g.radius() <= radius + 1e-12
    out = np.full((slab.n_t - 2,) + g.shape, np.nan)
    lap_min = np.inf
    for k in range(1, slab.n_t - 1):
        lap = laplacian(slab.planes[k]).values
        utt = (st[k + 1] + st[k - 1] - 2 * st[k]) / dt**2
        dnext, dprev = st[k + 1], st[k - 1]
        uxt = (shifted(dnext, (1, 0)) - shifted(dnext, (-1, 0)) - shifted(dprev, (1, 0)) + shifted(dprev, (-1, 0))) / (4 * h * dt)
        uyt = (shifted(dnext, (0, 1)) - shifted(dnext, (0, -1)) - shifted(dprev, (0, 1)) + shifted(dprev, (0, -1))) / (4 * h * dt)
        det = (lap * utt - uxt**2 - uyt**2) / 16.0
        out[k - 1][mask] = det[mask]
        lap_min = min(lap_min, float(np.min(lap[mask])))
    return HcmaReport(out, lap_min, slab.t_grid)


def kiselman_defect(slab: GeodesicSlab, C: float, *, exact: bool | None = None) -> float:
    """``max(0, -min Laplacian)`` of ``rooftop_from_slab(slab, C)``, unscaled."""
    f = rooftop_from_slab(slab, C, exact=exact)
    lap = _raw_field(slab.grid, laplacian(f).values).values[slab.grid.interior]
    return float(max(0.0, -np.min(lap)))
