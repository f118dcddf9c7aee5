"""Largest subharmonic minorants on grids, rooftop envelopes and 1D convex envelopes.

All envelopes here are the unique fixed point of the monotone map
``u <- min(h, mean_neighbours(u) + c)`` on the constrained nodes, with the
remaining nodes pinned to ``h``.  Two solvers reach that fixed point:

* ``"policy"`` -- policy (Howard) iteration: freeze the contact set, solve the
  linear Dirichlet problem on the free set, update the contact set, repeat.
  Terminates after finitely many steps at the exact discrete fixed point.
* ``"sweep"`` -- alternating red/black Gauss-Seidel passes started from ``h``;
  monotone decreasing, so it converges to the same fixed point from above.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.ndimage import distance_transform_edt

from pshlab.grid import Field, Grid2, laplacian

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10**6


class EnvelopeError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class ObstacleSolution:
    u: np.ndarray  # full node vector
    iterations: int
    final_update: float
    converged: bool
    contact: np.ndarray  # bool per constrained node


def _fixed_point_residual(W, c, h, idx, u):
    new = np.minimum(h[idx], W @ u + c)
    return float(np.max(np.abs(new - u[idx]))) if idx.size else 0.0


def solve_obstacle(
    W: sp.csr_matrix,
    c: np.ndarray,
    h: np.ndarray,
    idx: np.ndarray,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    method: str = "policy",
    init_contact: np.ndarray | None = None,
    colors: list[np.ndarray] | None = None,
) -> ObstacleSolution:
    """Largest ``u <= h`` with ``u[idx] <= W u + c``; other nodes equal ``h``.

    ``W`` is a nonnegative (len(idx) x n) matrix with unit row sums and zero
    diagonal on the constrained block.  ``colors`` partitions ``range(len(idx))``
    into classes without internal couplings, used by the sweep solver.
    """
    h = np.asarray(h, dtype=float)
    idx = np.asarray(idx)
    c = np.broadcast_to(np.asarray(c, dtype=float), (idx.size,))
    if method == "policy":
        sol = _policy_iteration(W, c, h, idx, tol, min(max_iter, 10_000), init_contact)
        if sol.converged:
            return sol
        log.warning("policy iteration stalled (update %.3g); continuing with sweeps", sol.final_update)
        return _sweeps(W, c, h, idx, tol, max_iter, colors, start=sol.u, done=sol.iterations)
    if method == "sweep":
        return _sweeps(W, c, h, idx, tol, max_iter, colors)
    raise ValueError(f"unknown method {method!r}")


def _policy_iteration(W, c, h, idx, tol, max_iter, init_contact):
    n = h.size
    m = idx.size
    hc = h[idx]
    is_con = np.zeros(n, bool)
    is_con[idx] = True
    Wc = W[:, idx].tocsr()
    W_rest = W[:, np.flatnonzero(~is_con)]
    b0 = W_rest @ h[~is_con] + c
    scale = 1.0 + float(np.max(np.abs(h))) if n else 1.0
    eps = 1e-13 * scale

    u = h.copy()
    if init_contact is None:
        contact = W @ u + c >= hc - eps
    else:
        contact = np.asarray(init_contact, bool).copy()
    it = 0
    for it in range(1, max_iter + 1):
        if not contact.any() and W_rest.nnz == 0:
            # a closed model needs at least one contact node to be solvable
            contact[np.argmin(hc - (W @ u + c))] = True
        free = np.flatnonzero(~contact)
        uc = hc.copy()
        if free.size:
            cont = np.flatnonzero(contact)
            A = sp.identity(free.size, format="csr") - Wc[free][:, free]
            rhs = b0[free] + Wc[free][:, cont] @ hc[cont]
            uc[free] = spla.spsolve(A.tocsc(), rhs) if free.size > 1 else rhs / A.toarray()[0, 0]
        u[idx] = uc
        new_contact = W @ u + c >= hc - eps
        if np.array_equal(new_contact, contact):
            break
        contact = new_contact
    res = _fixed_point_residual(W, c, h, idx, u)
    return ObstacleSolution(u, it, res, res <= tol, np.asarray(contact))


def _sweeps(W, c, h, idx, tol, max_iter, colors, start=None, done=0):
    m = idx.size
    if colors is None:
        colors = [np.array([k]) for k in range(m)]
    rows = [W[cl] for cl in colors]
    u = h.copy() if start is None else np.minimum(start, h)
    hc = h[idx]
    update = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        update = 0.0
        order = range(len(colors)) if it % 2 else range(len(colors) - 1, -1, -1)
        for k in order:
            cl = colors[k]
            new = np.minimum(hc[cl], rows[k] @ u + c[cl])
            nodes = idx[cl]
            d = float(np.max(np.abs(new - u[nodes])))
            update = max(update, d)
            u[nodes] = new
        if update <= tol:
            break
    contact = np.abs(u[idx] - hc) <= 10 * tol
    return ObstacleSolution(u, done + it, update, update <= tol, contact)


# ------------------------------------------------------------------ grid API

@dataclass(frozen=True, eq=False)
class EnvelopeReport:
    envelope: Field
    iterations: int
    final_update: float
    contact_mask: np.ndarray
    converged: bool
    tol: float = DEFAULT_TOL

    @property
    def contact_fraction(self) -> float:
        g = self.envelope.grid
        return float(np.mean(self.contact_mask[g.interior]))

    def sidecar(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_update": self.final_update,
            "contact_fraction": self.contact_fraction,
            "converged": self.converged,
            "tol": self.tol,
        }

    def to_json(self) -> str:
        return json.dumps(self.sidecar(), sort_keys=True, indent=2)


def _grid_colors(grid: Grid2) -> list[np.ndarray]:
    idx = grid.interior_index
    i, j = np.divmod(idx, grid.nx)
    parity = (i + j) % 2
    return [np.flatnonzero(parity == 0), np.flatnonzero(parity == 1)]


_COARSE_MIN = 41


def _coarse_contact_guess(h: Field, tol: float) -> np.ndarray | None:
    """Contact set of the envelope on the twice-coarser lattice, prolonged."""
    g = h.grid
    if g.nx % 2 == 0 or g.ny != g.nx:
        return None
    from pshlab.grid import build_grid

    try:
        cg = build_grid(g.domain, (g.nx + 1) // 2)
    except ValueError:
        return None
    fv = np.asarray(h.values, dtype=float)
    known = np.isfinite(fv)
    # coarse band nodes may sit outside the fine domain: borrow the nearest fine value
    _, (ii, jj) = distance_transform_edt(~known, return_indices=True)
    sub = fv[ii, jj][::2, ::2]
    vals = np.where(cg.active, sub, np.nan)
    coarse = sh_envelope(Field(cg, vals), tol)
    fine = np.repeat(np.repeat(coarse.contact_mask, 2, axis=0), 2, axis=1)[: g.ny, : g.nx]
    return fine & g.interior


def sh_envelope(
    h: Field,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    *,
    method: str = "policy",
    init_contact: np.ndarray | None = None,
    raise_on_failure: bool = False,
) -> EnvelopeReport:
    """Largest discretely subharmonic grid function below ``h``.

    Boundary nodes keep the value of ``h``.  ``init_contact`` (a boolean node
    mask) warm-starts the policy solver, e.g. with the contact set of a nearby
    obstacle.
    """
    g = h.grid
    idx = g.interior_index
    hv = np.where(g.active, h.values, 0.0).ravel()
    if init_contact is None and method == "policy" and g.nx >= _COARSE_MIN:
        init_contact = _coarse_contact_guess(h, tol)
    init = None if init_contact is None else np.asarray(init_contact).ravel()[idx]
    sol = solve_obstacle(
        g.neighbor_mean_operator, 0.0, hv, idx, tol=tol, max_iter=max_iter,
        method=method, init_contact=init, colors=_grid_colors(g),
    )
    env = Field(g, sol.u.reshape(g.shape))
    contact = np.zeros(g.shape, bool)
    contact[g.active] = np.abs(env.values - h.values)[g.active] <= 10 * tol
    rep = EnvelopeReport(env, sol.iterations, sol.final_update, contact, sol.converged, tol)
    if raise_on_failure and not rep.converged:
        raise EnvelopeError(f"envelope did not converge: final update {sol.final_update:.3g}", rep)
    return rep


def rooftop(u: Field, v: Field, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER, **kw) -> EnvelopeReport:
    """Largest subharmonic minorant of ``min(u, v)``."""
    if u.grid is not v.grid:
        raise ValueError("rooftop needs fields on a shared grid")
    return sh_envelope(u.minimum(v), tol, max_iter, **kw)


def subharmonicity_defect(f: Field) -> float:
    """``max(0, -min Laplacian)`` over interior nodes, times spacing squared."""
    lap = laplacian(f).values
    g = f.grid
    return float(max(0.0, -np.min(lap[g.interior]))) * g.spacing**2


# -------------------------------------------------------- 1D convex envelopes

def lower_hull(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull vertices (monotone chain, s increasing)."""
    hull: list[int] = []
    for k in range(s.size):
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # drop j if it lies on or above the segment i -> k
            cross = (s[j] - s[i]) * (y[k] - y[i]) - (y[j] - y[i]) * (s[k] - s[i])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(k)
    return np.asarray(hull)


def convex_envelope_1d(samples, abscissae=None) -> np.ndarray:
    """Greatest convex minorant of the samples, evaluated at the same abscissae."""
    y = np.asarray(samples, dtype=float)
    if y.size < 2:
        raise ValueError("need at least two samples")
    if not np.all(np.isfinite(y)):
        raise ValueError("samples must be finite")
    s = np.arange(y.size, dtype=float) if abscissae is None else np.asarray(abscissae, dtype=float)
    hull = lower_hull(s, y)
    out = np.interp(s, s[hull], y[hull])
    out[hull] = y[hull]
    return out


def toric_rooftop(u0, u1, abscissae=None) -> np.ndarray:
    """Greatest convex nondecreasing minorant of ``min(u0, u1)`` on an s-grid.

    Inputs are the log-images ``s -> u(e^s)`` of radial psh functions and
    must be nondecreasing.
    """
    a = np.asarray(u0, dtype=float)
    b = np.asarray(u1, dtype=float)
    for name, arr in (("u0", a), ("u1", b)):
        if np.any(np.diff(arr) < -1e-12 * (1 + np.max(np.abs(arr)))):
            raise ValueError(f"{name} is not nondecreasing")
    return monotone_convex_envelope(np.minimum(a, b), abscissae)


def monotone_convex_envelope(samples, abscissae=None) -> np.ndarray:
    """Greatest convex nondecreasing minorant.

    Flattening the hull left of its minimum is the same as clipping its
    slopes at zero from below.
    """
    hull = convex_envelope_1d(samples, abscissae)
    return np.minimum.accumulate(hull[::-1])[::-1]


def radial_profile_envelope(profile, r_min: float, r_max: float = 1.0, n_s: int = 2001):
    """1D oracle for radial obstacles on a disk.

    Radial subharmonic functions bounded near the origin are exactly the
    convex nondecreasing functions of ``s = log r``; the envelope of a radial
    obstacle is therefore the monotone convex envelope of ``s -> profile(e^s)``
    on ``[log r_min, log r_max]``.  Returns ``(s, values)``.
    """
    s = np.linspace(np.log(r_min), np.log(r_max), n_s)
    return s, monotone_convex_envelope(profile(np.exp(s)), s)
