"""Analytic-disk functionals on the unit disk.

For a closed analytic disk ``f`` with ``f(0) = z``, the boundary average of
``h o f`` dominates the envelope ``P(h)(z)``. Minimising over a finite family
of disks therefore gives a certified upper bound of the envelope.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.ndimage import distance_transform_edt

from pshlab.grid import Field, GeneratorSpec

__all__ = [
    "AnalyticDisk",
    "DiskError",
    "DiskFamily",
    "affine_disk",
    "blaschke_disk",
    "boundary_average",
    "family_disks",
    "field_evaluator",
    "moebius",
    "poletsky_bound",
    "second_diff_disk",
    "second_diff_sweep",
    "twist_disk",
]

DEFAULT_SAMPLES = 256
_MARGIN = 1e-9

Evaluable = Union[Callable[[np.ndarray], np.ndarray], GeneratorSpec, Field, str]


class DiskError(ValueError):
    pass


def moebius(w, a: complex):
    """Disk automorphism ``(w - a) / (1 - conj(a) w)``; its inverse is ``moebius(., -a)``."""
    w = np.asarray(w, dtype=complex)
    return (w - a) / (1.0 - np.conj(a) * w)


def _circle(m: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(m) / m)


@dataclass(frozen=True, eq=False)
class AnalyticDisk:
    """Samples of ``f`` on the unit circle plus its center ``f(0)``."""

    kind: str
    params: tuple
    boundary_samples: np.ndarray = field(repr=False)
    center: complex
    domain_radius: float = 1.0

    def __post_init__(self):
        s = np.asarray(self.boundary_samples, dtype=complex)
        s.setflags(write=False)
        object.__setattr__(self, "boundary_samples", s)
        if np.max(np.abs(s)) > self.domain_radius + _MARGIN:
            raise DiskError(f"{self.kind} disk {self.params} leaves the domain")

    @property
    def m(self) -> int:
        return int(self.boundary_samples.size)


def affine_disk(center: complex, radius: float, direction: float = 0.0, m: int = DEFAULT_SAMPLES,
                domain_radius: float = 1.0) -> AnalyticDisk:
    """``f(w) = center + radius e^{i direction} w``."""
    s = center + radius * np.exp(1j * direction) * _circle(m)
    return AnalyticDisk("affine", (complex(center), float(radius), float(direction)), s, complex(center), domain_radius)


def blaschke_disk(center: complex, r: float, direction: float = 0.0, m: int = DEFAULT_SAMPLES) -> AnalyticDisk:
    """``f(w) = phi_{-center}(r e^{i direction} w)``, so ``f(0) = center``."""
    if not 0.0 <= r <= 1.0:
        raise DiskError("Blaschke disk radius must lie in [0, 1]")
    s = moebius(r * np.exp(1j * direction) * _circle(m), -center)
    return AnalyticDisk("blaschke", (complex(center), float(r), float(direction)), s, complex(center))


def twist_disk(f: AnalyticDisk, a: complex) -> AnalyticDisk:
    """Compose ``f`` with the automorphism ``phi_a``."""
    if abs(a) >= 1.0:
        raise DiskError("twist point must satisfy |a| < 1")
    if a == 0:
        return f
    s = moebius(f.boundary_samples, a)
    return AnalyticDisk("moebius_twist", (f, complex(a)), s, complex(moebius(f.center, a)), f.domain_radius)


# ------------------------------------------------------------ evaluation

def field_evaluator(f: Field) -> Callable[[np.ndarray], np.ndarray]:
    """Bilinear interpolation of a grid field; exterior nodes take the nearest active value."""
    g = f.grid
    v = np.asarray(f.values, dtype=float)
    known = np.isfinite(v)
    _, (ii, jj) = distance_transform_edt(~known, return_indices=True)
    filled = v[ii, jj]
    xs = g.origin[0] + g.spacing * np.arange(g.nx)
    ys = g.origin[1] + g.spacing * np.arange(g.ny)
    interp = RegularGridInterpolator((ys, xs), filled, bounds_error=False, fill_value=None)

    def ev(z):
        z = np.asarray(z, dtype=complex)
        pts = np.stack([z.imag.ravel(), z.real.ravel()], axis=-1)
        return interp(pts).reshape(z.shape)

    return ev


def _evaluator(h: Evaluable) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(h, str):
        h = GeneratorSpec.parse(h)
    if isinstance(h, Field):
        return field_evaluator(h)
    return h


def boundary_average(f: AnalyticDisk, h: Evaluable) -> float:
    """``(1/m) sum_k h(f(e^{i theta_k}))``."""
    ev = _evaluator(h)
    return float(np.mean(ev(f.boundary_samples)))


# --------------------------------------------------------------- families

@dataclass(frozen=True)
class DiskFamily:
    """Affine disks plus rotated Blaschke disks on geometric radius grids.

    ``n_radii`` counts the degenerate radius 0.
    """

    n_radii: int = 16
    n_rotations: int = 16
    m: int = DEFAULT_SAMPLES
    min_ratio: float = 1e-3
    affine: bool = True
    blaschke: bool = True

    def radii(self, r_max: float) -> np.ndarray:
        if r_max <= 0:
            return np.array([0.0])
        return np.concatenate([[0.0], r_max * np.geomspace(self.min_ratio, 1.0, self.n_radii - 1)])


def family_disks(z: complex, family: DiskFamily = DiskFamily(), domain_radius: float = 1.0) -> list[AnalyticDisk]:
    """Admissible disks centered at ``z``; the degenerate disk comes first."""
    z = complex(z)
    if abs(z) >= domain_radius:
        raise DiskError("disk centers must be interior points")
    disks = [affine_disk(z, 0.0, 0.0, family.m, domain_radius)]
    if family.affine:
        r_max = domain_radius - abs(z)
        for r in family.radii(r_max)[1:]:
            disks.append(affine_disk(z, r, 0.0, family.m, domain_radius))
    if family.blaschke and domain_radius == 1.0:
        for r in family.radii(1.0)[1:]:
            for k in range(family.n_rotations):
                disks.append(blaschke_disk(z, r, 2 * np.pi * k / family.n_rotations, family.m))
    return disks


def _averages(disks: list[AnalyticDisk], ev) -> np.ndarray:
    pts = np.stack([d.boundary_samples for d in disks])
    return np.mean(ev(pts), axis=1)


def poletsky_bound(h: Evaluable, z: complex, family: DiskFamily = DiskFamily(), domain_radius: float = 1.0,
                   *, return_disk: bool = False):
    """Smallest boundary average over the family of disks centered at ``z``."""
    ev = _evaluator(h)
    disks = family_disks(z, family, domain_radius)
    avg = _averages(disks, ev)
    k = int(np.argmin(avg))
    return (float(avg[k]), disks[k]) if return_disk else float(avg[k])


def second_diff_disk(h: Evaluable, z: complex, a: complex, family: DiskFamily = DiskFamily()) -> float:
    """Bound at ``phi_a(z)`` plus bound at ``phi_{-a}(z)`` minus twice the bound at ``z``.

    The families at ``phi_{+-a}(z)`` are the base family at ``z`` twisted by ``+-a``.
    """
    if abs(a) > 0.5:
        raise DiskError("second_diff_disk needs |a| <= 1/2")
    ev = _evaluator(h)
    base = family_disks(z, family)
    b0 = float(np.min(_averages(base, ev)))
    b_plus = float(np.min(_averages([twist_disk(f, a) for f in base], ev)))
    b_minus = float(np.min(_averages([twist_disk(f, -a) for f in base], ev)))
    return b_plus + b_minus - 2.0 * b0


def second_diff_sweep(h: Evaluable, z: complex, amplitudes, direction: complex = 1.0,
                      family: DiskFamily = DiskFamily()) -> tuple[np.ndarray, np.ndarray, float]:
    """Second differences for ``a = s * direction``; returns ``(s, values, exponent)``.

    The exponent is the least-squares slope of ``log |value|`` against ``log s``.
    """
    s = np.asarray(amplitudes, dtype=float)
    u = complex(direction) / abs(direction)
    vals = np.array([second_diff_disk(h, z, si * u, family) for si in s])
    with np.errstate(divide="ignore"):
        slope = float(np.polyfit(np.log(s), np.log(np.abs(vals)), 1)[0]) if np.all(vals != 0) else np.inf
    return s, vals, slope
