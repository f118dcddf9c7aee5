"""Empirical regularity meters for fields and geodesic slabs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pshlab.envelope import DEFAULT_TOL, sh_envelope
from pshlab.geodesic import GeodesicSlab, geodesic_dr
from pshlab.grid import Field, build_grid, make_field, second_difference, shifted

__all__ = [
    "C11Table",
    "HolderFit",
    "RegularityError",
    "c11_scan",
    "default_lags",
    "eta",
    "eta_example_check",
    "holder_fit",
    "holder_geodesic_experiment",
    "lag_moduli",
]

_DIRECTIONS = ((1, 0), (0, 1), (1, 1), (1, -1))


class RegularityError(ValueError):
    pass


def default_lags(steps=(1, 2, 4, 8)) -> list[tuple[int, int]]:
    """Dyadic lattice lags along both axes and both diagonals."""
    return [(s * dx, s * dy) for dx, dy in _DIRECTIONS for s in steps]


def lag_moduli(f: Field, lags, min_pairs: int = 100, interior_only: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """``(|k| spacing, max |u(p + k) - u(p)|)`` for each lag ``k``.

    With ``interior_only`` both ends of a pair must be interior nodes, which
    keeps the snapped boundary values out of the moduli.
    """
    v = f.values
    if interior_only:
        v = np.where(f.grid.interior, v, np.nan)
    r, w = [], []
    for k in lags:
        d = shifted(v, k) - v
        ok = np.isfinite(d)
        if ok.sum() < min_pairs:
            raise RegularityError(f"lag {tuple(k)} has only {int(ok.sum())} valid pairs")
        r.append(np.hypot(*k) * f.grid.spacing)
        w.append(float(np.max(np.abs(d[ok]))))
    return np.asarray(r), np.asarray(w)


@dataclass(frozen=True)
class HolderFit:
    exponent: float
    constant: float
    residual: float
    radii: np.ndarray = field(repr=False)
    moduli: np.ndarray = field(repr=False)

    def table(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.radii, self.moduli)]


def _direction_class(k) -> tuple[int, int]:
    g = int(np.gcd(abs(k[0]), abs(k[1])))
    a, b = k[0] // g, k[1] // g
    if a < 0 or (a == 0 and b < 0):
        a, b = -a, -b
    return a, b


def holder_fit(f: Field, lags=None, min_pairs: int = 100, interior_only: bool = True) -> HolderFit:
    """Fit ``omega(r) = C r^beta`` to worst-case moduli by least squares in log-log.

    Lags sharing a direction share an intercept; the exponent is common.
    A field with vanishing moduli returns ``beta = inf``.
    """
    lags = default_lags() if lags is None else [tuple(k) for k in lags]
    if len(lags) < 4:
        raise RegularityError("holder_fit needs at least 4 lags")
    r, w = lag_moduli(f, lags, min_pairs, interior_only)
    scale = max(1.0, float(np.nanmax(np.abs(f.values))))
    keep = w > 1e-13 * scale
    if not keep.any():
        return HolderFit(np.inf, 0.0, 0.0, r, w)
    classes = [_direction_class(k) for k in lags]
    groups = sorted({c for c, kp in zip(classes, keep) if kp})
    X = np.zeros((int(keep.sum()), 1 + len(groups)))
    X[:, 0] = np.log(r[keep])
    for row, c in enumerate(c for c, kp in zip(classes, keep) if kp):
        X[row, 1 + groups.index(c)] = 1.0
    y = np.log(w[keep])
    if np.unique(X[:, 0]).size < 2:
        raise RegularityError("holder_fit needs lags of at least two lengths")
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    res = y - X @ coef
    beta = float(coef[0])
    const = float(np.exp(np.max(coef[1:])))
    return HolderFit(beta, const, float(np.sqrt(np.mean(res**2))), r, w)


# ----------------------------------------------------------------- C^{1,1}

@dataclass(frozen=True)
class C11Table:
    radii: tuple[float, ...]
    values: tuple[float, ...]
    lower: tuple[float, ...]  # min of axis-summed second differences (Laplacian times h^2)
    domain_radius: float

    def ratio(self, i: int = 0, j: int = -1) -> tuple[float, float]:
        """``(value_j / value_i, (dist_i / dist_j)^2)`` with ``dist = R - K``."""
        di = self.domain_radius - self.radii[i]
        dj = self.domain_radius - self.radii[j]
        return self.values[j] / self.values[i], (di / dj) ** 2

    def rows(self) -> list[dict]:
        return [{"K": k, "value": v, "axis_sum_min": lo} for k, v, lo in zip(self.radii, self.values, self.lower)]


def _field_list(obj) -> list[Field]:
    if isinstance(obj, GeodesicSlab):
        return list(obj.planes[1:-1])
    if isinstance(obj, Field):
        return [obj]
    return list(obj)


def c11_scan(obj, K_radii, steps=(1, 2, 4)) -> C11Table:
    """Max of ``|second difference| / (|k| spacing)^2`` over nodes with ``|z| <= K``.

    ``obj`` is a field, a slab (its interior planes) or a list of fields; the
    axis lags ``(s, 0)`` and ``(0, s)`` for ``s`` in ``steps`` are scanned.
    """
    fields = _field_list(obj)
    g = fields[0].grid
    R = g.domain.half_width
    r = g.radius()
    h = g.spacing
    vals, lows = [], []
    for K in K_radii:
        if K >= R - 2 * h:
            raise RegularityError(f"K radius {K} too close to the boundary")
        inK = g.interior & (r <= K + 1e-12)
        best, low = 0.0, np.inf
        for f in fields:
            for s in steps:
                for k in ((s, 0), (0, s)):
                    d = second_difference(f, k).values[inK]
                    d = d[np.isfinite(d)]
                    if d.size:
                        best = max(best, float(np.max(np.abs(d))) / (s * h) ** 2)
            axis = second_difference(f, (1, 0)).values + second_difference(f, (0, 1)).values
            a = axis[inK]
            low = min(low, float(np.min(a[np.isfinite(a)])))
        vals.append(best)
        lows.append(low)
    return C11Table(tuple(float(k) for k in K_radii), tuple(vals), tuple(lows), R)


# -------------------------------------------------------- closed-form witness

def eta(z1, z2, alpha: float):
    """``-(2 - 2 Re z1)^(alpha/2)`` on the unit ball of C^2."""
    z1 = np.asarray(z1, dtype=complex)
    return -np.maximum(2.0 - 2.0 * z1.real, 0.0) ** (alpha / 2)


def _sphere(rng, n):
    v = rng.standard_normal((n, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v[:, 0] + 1j * v[:, 1], v[:, 2] + 1j * v[:, 3]


def _ball(rng, n, radius):
    z1, z2 = _sphere(rng, n)
    rad = radius * rng.uniform(0, 1, n) ** 0.25
    return z1 * rad, z2 * rad


def _fd_complex_hessian(fun, p: np.ndarray, h: float) -> np.ndarray:
    """2x2 complex Hessian ``d^2 f / dz_j d conj(z_k)`` by centered differences in R^4."""
    p = np.asarray(p, dtype=float)
    Hr = np.zeros((4, 4))
    E = np.eye(4) * h
    f0 = fun(p)
    for a in range(4):
        for b in range(a, 4):
            if a == b:
                Hr[a, a] = (fun(p + E[a]) - 2 * f0 + fun(p - E[a])) / h**2
            else:
                Hr[a, b] = Hr[b, a] = (
                    fun(p + E[a] + E[b]) - fun(p + E[a] - E[b]) - fun(p - E[a] + E[b]) + fun(p - E[a] - E[b])
                ) / (4 * h**2)
    # coordinates (x1, y1, x2, y2)
    H = np.zeros((2, 2), complex)
    for j in range(2):
        for k in range(2):
            xj, yj, xk, yk = 2 * j, 2 * j + 1, 2 * k, 2 * k + 1
            H[j, k] = 0.25 * (Hr[xj, xk] + Hr[yj, yk] + 1j * (Hr[xj, yk] - Hr[yj, xk]))
    return H


def eta_example_check(alpha: float, n_samples: int = 1000, seed: int = 0, fd_step: float = 1e-4,
                      fd_radius: float = 0.5, n_fd: int = 50) -> dict:
    """Boundary identity, closed-form Hessian sign and rank, and a finite-difference cross-check.

    The finite-difference Hessian is taken in a random unitary frame so that
    the rank-one structure is not aligned with the coordinates.
    """
    if not 0.0 < alpha < 2.0:
        raise RegularityError("alpha must lie in (0, 2)")
    if n_samples < 100:
        raise RegularityError("need at least 100 samples")
    rng = np.random.default_rng(seed)
    z1, z2 = _sphere(rng, n_samples)
    lhs = eta(z1, z2, alpha)
    rhs = -np.sqrt(np.abs(z1 - 1.0) ** 2 + np.abs(z2) ** 2) ** alpha
    boundary_err = float(np.max(np.abs(lhs - rhs)))

    w1, w2 = _ball(rng, n_samples, 1.0 - 1e-6)
    q = 2.0 - 2.0 * w1.real
    h11 = (alpha / 2) * (1 - alpha / 2) * q ** (alpha / 2 - 2)
    # all other entries vanish identically, hence det = h11 * 0 - 0
    det_closed = h11 * 0.0 - 0.0

    Q, _ = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))

    def fun_rot(p):
        w = Q @ np.array([p[0] + 1j * p[1], p[2] + 1j * p[3]])
        return float(eta(w[0], w[1], alpha))

    a1, a2 = _ball(rng, n_fd, fd_radius)
    fd_det, fd_min_eig, fd_h11_err = 0.0, np.inf, 0.0
    for u1, u2 in zip(a1, a2):
        # pull the sample back so that Q maps it to (u1, u2)
        v = Q.conj().T @ np.array([u1, u2])
        p = np.array([v[0].real, v[0].imag, v[1].real, v[1].imag])
        H = _fd_complex_hessian(fun_rot, p, fd_step)
        fd_det = max(fd_det, abs(float(np.linalg.det(H).real)))
        fd_min_eig = min(fd_min_eig, float(np.min(np.linalg.eigvalsh((H + H.conj().T) / 2))))
        # trace is invariant under the unitary frame change
        exact = (alpha / 2) * (1 - alpha / 2) * (2 - 2 * u1.real) ** (alpha / 2 - 2)
        fd_h11_err = max(fd_h11_err, abs(float(np.trace(H).real) - exact))
    return {
        "alpha": alpha,
        "boundary_identity_error": boundary_err,
        "at_pole": float(eta(1.0, 0.0, alpha)),
        "hessian_entry_min": float(np.min(h11)),
        "hessian_entry_nonnegative": bool(np.all(h11 >= 0)),
        "det_closed_form_max": float(np.max(np.abs(det_closed))),
        "det_fd_max": fd_det,
        "fd_min_eigenvalue": fd_min_eig,
        "fd_trace_error": fd_h11_err,
    }


# ------------------------------------------------------ geodesic experiment

def holder_geodesic_experiment(alpha: float = 1.0, n: int = 101, n_t: int = 21, n_C: int = 81,
                               scenario: str = "cusp", shift: float = 0.5, tol: float = DEFAULT_TOL,
                               jobs: int = 1) -> dict:
    """Hölder exponents of the interior planes of a geodesic on the unit disk.

    ``"cusp"``: ``u0 = P(-|z - 1|^alpha)``, ``u1 = 0``.
    ``"lipschitz"``: ``u0 = |z|^2 - 1``, ``u1 = u0 + shift``.
    """
    if not 0.0 < alpha <= 1.0:
        raise RegularityError("alpha must lie in (0, 1]")
    g = build_grid("disk(1)", n)
    if scenario == "cusp":
        u0 = sh_envelope(make_field(g, f"holder_cusp({alpha}, 1, 0)"), tol).envelope
        u1 = make_field(g, "constant(0)")
    elif scenario == "lipschitz":
        u0 = make_field(g, "toric_sample(2)") - 1.0
        u1 = u0 + shift
    else:
        raise RegularityError(f"unknown scenario {scenario!r}")
    slab = geodesic_dr(u0, u1, n_t, n_C, tol, jobs=jobs)
    fits = [holder_fit(p) for p in slab.planes[1:-1]]
    exps = [f.exponent for f in fits]
    return {
        "alpha": alpha,
        "scenario": scenario,
        "n": n,
        "t": [float(t) for t in slab.t_grid[1:-1]],
        "exponents": exps,
        "min_exponent": float(min(exps)),
        "max_exponent": float(max(exps)),
        "endpoint_exponent": holder_fit(slab.u0).exponent,
        "delta_C": slab.delta_C,
    }
