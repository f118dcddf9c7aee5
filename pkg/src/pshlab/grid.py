"""Uniform square lattices on planar model domains, fields, and finite differences."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

INTERIOR, BOUNDARY, EXTERIOR = 0, 1, 2

_BOUNDARY_EPS = 1e-12


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Domain:
    """Continuous model domain: ``disk``, ``rectangle`` or ``annulus_radial``.

    ``params`` holds the radius for a disk, ``(r_in, r_out)`` for the annulus
    and the half-widths ``(a, b)`` for the rectangle ``[-a, a] x [-b, b]``.
    """

    kind: str
    params: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if self.kind not in ("disk", "rectangle", "annulus_radial"):
            raise GridError(f"unknown domain {self.kind!r}")

    @property
    def half_width(self) -> float:
        if self.kind == "disk":
            return float(self.params[0])
        if self.kind == "annulus_radial":
            return float(self.params[1])
        return float(max(self.params[0], self.params[-1]))

    @classmethod
    def parse(cls, text: str) -> "Domain":
        """Parse ``"disk(1)"``, ``"rectangle"``, ``"annulus_radial(0.3, 1)"``."""
        text = text.strip()
        if "(" in text:
            name, rest = text.split("(", 1)
            args = [a for a in rest.rstrip(")").split(",") if a.strip()]
            params = tuple(float(a) for a in args)
        else:
            name, params = text, ()
        name = name.strip()
        defaults = {"disk": (1.0,), "rectangle": (1.0, 1.0), "annulus_radial": (0.5, 1.0)}
        if name not in defaults:
            raise GridError(f"unknown domain {name!r}")
        if name == "rectangle" and len(params) == 1:
            params = (params[0], params[0])
        return cls(name, params or defaults[name])


@dataclass(frozen=True, eq=False)
class Grid2:
    nx: int
    ny: int
    spacing: float
    origin: tuple[float, float]
    node_class: np.ndarray
    domain: Domain
    # coordinates at which boundary data is evaluated (radially projected on
    # curved boundaries); equal to node coordinates elsewhere
    eval_x: np.ndarray = field(repr=False)
    eval_y: np.ndarray = field(repr=False)

    @cached_property
    def x(self) -> np.ndarray:
        xs = self.origin[0] + self.spacing * np.arange(self.nx)
        return np.broadcast_to(xs[None, :], self.shape)

    @cached_property
    def y(self) -> np.ndarray:
        ys = self.origin[1] + self.spacing * np.arange(self.ny)
        return np.broadcast_to(ys[:, None], self.shape)

    @property
    def z(self) -> np.ndarray:
        return self.x + 1j * self.y

    @property
    def z_eval(self) -> np.ndarray:
        return self.eval_x + 1j * self.eval_y

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @cached_property
    def interior(self) -> np.ndarray:
        return self.node_class == INTERIOR

    @cached_property
    def boundary(self) -> np.ndarray:
        return self.node_class == BOUNDARY

    @cached_property
    def active(self) -> np.ndarray:
        """Interior or boundary nodes (where field values are finite)."""
        return self.node_class != EXTERIOR

    @cached_property
    def interior_index(self) -> np.ndarray:
        """Flat indices of interior nodes, in row-major order."""
        return np.flatnonzero(self.interior.ravel())

    @cached_property
    def neighbor_mean_operator(self) -> sp.csr_matrix:
        """Sparse (n_interior x n_nodes) matrix of 4-neighbour averages."""
        idx = self.interior_index
        rows, cols = [], []
        for shift in (-1, 1, -self.nx, self.nx):
            rows.append(np.arange(idx.size))
            cols.append(idx + shift)
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        data = np.full(rows.size, 0.25)
        return sp.csr_matrix((data, (rows, cols)), shape=(idx.size, self.nx * self.ny))

    def radius(self) -> np.ndarray:
        return np.hypot(self.x, self.y)

    def lattice_index(self, x: float, y: float) -> tuple[int, int]:
        """(row, col) of the node nearest to ``(x, y)``."""
        j = int(round((x - self.origin[0]) / self.spacing))
        i = int(round((y - self.origin[1]) / self.spacing))
        return i, j


def build_grid(domain: Domain | str, n_per_axis: int, boundary_layer: str = "nearest") -> Grid2:
    """Square lattice with ``n_per_axis`` nodes across the domain's bounding box.

    ``boundary_layer`` selects the boundary nodes of curved domains:
    ``"nearest"`` takes nodes within half a spacing of a boundary circle (on
    either side), ``"band"`` the closed band of width one spacing inside it,
    and ``"stencil"`` the closed-domain nodes with an exterior neighbour.
    Evaluation coordinates of boundary nodes are projected radially onto the
    nearest boundary circle. Interior nodes adjacent to the exterior are
    always demoted to boundary nodes.
    """
    if isinstance(domain, str):
        domain = Domain.parse(domain)
    if boundary_layer not in ("stencil", "band", "nearest"):
        raise GridError(f"unknown boundary layer rule {boundary_layer!r}")
    if n_per_axis < 8:
        raise GridError(f"n_per_axis must be >= 8, got {n_per_axis}")
    w = domain.half_width
    spacing = 2.0 * w / (n_per_axis - 1)
    coords = -w + spacing * np.arange(n_per_axis)
    x, y = np.meshgrid(coords, coords)
    ex, ey = x.copy(), y.copy()
    cls = np.full(x.shape, EXTERIOR, dtype=np.int8)

    if domain.kind == "rectangle":
        a, b = domain.params[0], domain.params[-1]
        inside = (np.abs(x) <= a + _BOUNDARY_EPS) & (np.abs(y) <= b + _BOUNDARY_EPS)
        inner = (np.abs(x) < a - spacing + _BOUNDARY_EPS) & (np.abs(y) < b - spacing + _BOUNDARY_EPS)
        cls[inside] = BOUNDARY
        cls[inner] = INTERIOR
    else:
        r = np.hypot(x, y)
        if domain.kind == "disk":
            r_in, r_out = 0.0, domain.params[0]
        else:
            r_in, r_out = domain.params
        eps = _BOUNDARY_EPS
        if boundary_layer == "nearest":
            # boundary = nodes within half a spacing of a boundary circle
            out, inn = r_out + 0.5 * spacing, r_in - 0.5 * spacing
            core_out, core_in = r_out - 0.5 * spacing, r_in + 0.5 * spacing
        else:
            out, inn = r_out, r_in
            gap = spacing if boundary_layer == "band" else 0.0
            core_out, core_in = r_out - gap, r_in + gap
        solid = r_in == 0
        inside = (r <= out + eps) & ((r >= inn - eps) | solid)
        inner = (r < core_out - eps) & ((r > core_in + eps) | solid)
        if boundary_layer == "stencil":
            inner = (r <= r_out + eps) & ((r >= r_in - eps) | solid)
        cls[inside] = BOUNDARY
        cls[inner] = INTERIOR

    # a stencil must never reach an exterior node
    pad = np.pad(cls, 1, constant_values=EXTERIOR)
    nbr_ext = np.zeros(cls.shape, bool)
    for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        nbr_ext |= pad[1 + di:1 + di + cls.shape[0], 1 + dj:1 + dj + cls.shape[1]] == EXTERIOR
    demote = (cls == INTERIOR) & nbr_ext
    cls[demote] = BOUNDARY

    if domain.kind != "rectangle":
        bd = cls == BOUNDARY
        with np.errstate(invalid="ignore", divide="ignore"):
            near_outer = np.abs(r - r_out) <= np.abs(r - r_in) if r_in > 0 else np.ones_like(r, bool)
            target = np.where(near_outer, r_out, r_in)
            scale = np.where(r > 0, target / r, 1.0)
        ex = np.where(bd, x * scale, x)
        ey = np.where(bd, y * scale, y)
    if not np.any(cls == INTERIOR):
        raise GridError("grid has no interior nodes")
    for arr in (cls, ex, ey):
        arr.setflags(write=False)
    return Grid2(n_per_axis, n_per_axis, spacing, (-w, -w), cls, domain, ex, ey)


@dataclass(frozen=True, eq=False)
class Field:
    """Real values on grid nodes; exterior nodes hold NaN."""

    grid: Grid2
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridError(f"field shape {v.shape} != grid shape {self.grid.shape}")
        v[~self.grid.active] = np.nan
        if not np.all(np.isfinite(v[self.grid.active])):
            raise GridError("field has non-finite values on interior or boundary nodes")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def _binary(self, other, op):
        if isinstance(other, Field):
            if other.grid is not self.grid:
                raise GridError("fields live on different grids")
            other = other.values
        return Field(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def minimum(self, other: "Field") -> "Field":
        return self._binary(other, np.minimum)

    def maximum(self, other: "Field") -> "Field":
        return self._binary(other, np.maximum)

    def sup_norm(self, mask: np.ndarray | None = None) -> float:
        m = self.grid.active if mask is None else mask & self.grid.active
        return float(np.max(np.abs(self.values[m]))) if np.any(m) else 0.0

    def min(self) -> float:
        return float(np.nanmin(self.values))

    def max(self) -> float:
        return float(np.nanmax(self.values))

    def at(self, x: float, y: float) -> float:
        i, j = self.grid.lattice_index(x, y)
        return float(self.values[i, j])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        g = self.grid
        for i, j in zip(*np.nonzero(g.active)):
            w.writerow([repr(float(g.x[i, j])), repr(float(g.y[i, j])), repr(float(self.values[i, j]))])
        return buf.getvalue()


# ---------------------------------------------------------------- generators

def _gen_constant(z, c):
    return np.full(z.shape, c, dtype=float)


def _gen_radial_log(z, a, b, floor=-1.0):
    r = np.abs(z)
    with np.errstate(divide="ignore"):
        return np.maximum(a * np.log(r) + b, floor)


def _gen_holder_cusp(z, alpha, x0=0.0, y0=0.0):
    return -np.abs(z - complex(x0, y0)) ** alpha


def _gen_smooth_bump(z, cx, cy, width, height):
    return height * np.exp(-np.abs(z - complex(cx, cy)) ** 2 / width**2)


def _gen_toric_sample(z, *exponents):
    r = np.abs(z)
    return sum(r**p for p in exponents)


def _gen_linear(z, a, b, c=0.0):
    return a * z.real + b * z.imag + c


def _gen_quadratic(z, axx, axy, ayy, ax=0.0, ay=0.0, c=0.0):
    x, y = z.real, z.imag
    return axx * x * x + axy * x * y + ayy * y * y + ax * x + ay * y + c


def _gen_cone(z, slope, offset, cap=0.0):
    return np.minimum(cap, slope * np.abs(z) + offset)


# name -> (callable, (min params, max params), parameter names)
GENERATORS: dict[str, tuple[Callable, tuple[int, int], str]] = {
    "constant": (_gen_constant, (1, 1), "c"),
    "radial_log": (_gen_radial_log, (2, 3), "a, b, floor=-1: max(a log|z| + b, floor)"),
    "holder_cusp": (_gen_holder_cusp, (1, 3), "alpha, x0=0, y0=0: -|z - z0|^alpha"),
    "smooth_bump": (_gen_smooth_bump, (4, 4), "cx, cy, width, height: height exp(-|z-c|^2/width^2)"),
    "toric_sample": (_gen_toric_sample, (1, 16), "p1, p2, ...: sum |z|^p_k"),
    "linear": (_gen_linear, (2, 3), "a, b, c=0: a x + b y + c"),
    "quadratic": (_gen_quadratic, (3, 6), "axx, axy, ayy, ax=0, ay=0, c=0"),
    "cone": (_gen_cone, (2, 3), "slope, offset, cap=0: min(cap, slope |z| + offset)"),
}


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.name not in GENERATORS:
            raise GridError(f"unknown generator {self.name!r}")
        lo, hi = GENERATORS[self.name][1]
        if not lo <= len(self.params) <= hi:
            raise GridError(f"generator {self.name!r} takes {lo}..{hi} parameters, got {len(self.params)}")
        if self.name == "holder_cusp" and not 0.0 < self.params[0] <= 1.0:
            raise GridError("holder_cusp exponent must lie in (0, 1]")

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.asarray(GENERATORS[self.name][0](z, *self.params), dtype=float)

    @classmethod
    def parse(cls, text: str) -> "GeneratorSpec":
        """Parse ``"radial_log(1, 0, -1)"`` style expressions."""
        text = text.strip()
        if "(" in text:
            name, rest = text.split("(", 1)
            if not rest.endswith(")"):
                raise GridError(f"malformed generator {text!r}")
            args = [a for a in rest[:-1].split(",") if a.strip()]
            try:
                params = tuple(float(a) for a in args)
            except ValueError as exc:
                raise GridError(f"malformed generator {text!r}") from exc
        else:
            name, params = text, ()
        return cls(name.strip(), params)


def make_field(grid: Grid2, spec: GeneratorSpec | str) -> Field:
    if isinstance(spec, str):
        spec = GeneratorSpec.parse(spec)
    vals = np.full(grid.shape, np.nan)
    m = grid.active
    vals[m] = spec(grid.z_eval[m])
    return Field(grid, vals)


# --------------------------------------------------------- finite differences

def _shift(v: np.ndarray, di: int, dj: int) -> np.ndarray:
    """out[i, j] = v[i + di, j + dj], NaN outside the array."""
    out = np.full(v.shape, np.nan)
    ny, nx = v.shape
    src_i = slice(max(di, 0), ny + min(di, 0))
    dst_i = slice(max(-di, 0), ny + min(-di, 0))
    src_j = slice(max(dj, 0), nx + min(dj, 0))
    dst_j = slice(max(-dj, 0), nx + min(-dj, 0))
    out[dst_i, dst_j] = v[src_i, src_j]
    return out


def shifted(values: np.ndarray, k: Sequence[int]) -> np.ndarray:
    """Values at ``p + k`` for lattice vector ``k = (kx, ky)``."""
    return _shift(values, int(k[1]), int(k[0]))


def laplacian(f: Field) -> Field:
    """5-point Laplacian at interior nodes; NaN elsewhere."""
    g = f.grid
    v = f.values
    lap = (shifted(v, (1, 0)) + shifted(v, (-1, 0)) + shifted(v, (0, 1)) + shifted(v, (0, -1)) - 4 * v)
    lap /= g.spacing**2
    lap[~g.interior] = np.nan
    return _raw_field(g, lap)


def second_difference(f: Field, k: Sequence[int]) -> Field:
    """``u(p + k) + u(p - k) - 2 u(p)`` where both shifts are non-exterior."""
    v = f.values
    d = shifted(v, k) + shifted(v, (-k[0], -k[1])) - 2 * v
    return _raw_field(f.grid, d)


def _raw_field(grid: Grid2, values: np.ndarray) -> Field:
    # fields of derived quantities may be NaN on some active nodes
    obj = object.__new__(Field)
    values = np.asarray(values, dtype=float)
    values.setflags(write=False)
    object.__setattr__(obj, "grid", grid)
    object.__setattr__(obj, "values", values)
    return obj
