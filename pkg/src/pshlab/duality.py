"""Envelopes over polyhedral cones on graphs and their Jensen-measure duals.

A cone model is a connected graph with a set of constrained nodes and a
nonnegative slack ``c``. Its cone consists of the node functions with

    u(x) <= mean_{y ~ x} u(y) + c(x)        for every constrained node x.

The envelope ``P(h)(x) = max{u(x) : u in cone, u <= h}`` is a linear program.
Its dual, ``min h.mu + c.lam`` subject to ``mu + A^T lam = e_x``, returns a
measure ``mu`` and an offset ``b = c.lam`` with ``u(x) <= sum mu u + b`` for
every cone member: a Jensen pair at ``x``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from pshlab.envelope import EnvelopeError, solve_obstacle
from pshlab.simplex import LPResult, SimplexError, solve_lp

__all__ = [
    "ConeError",
    "ConeModel",
    "JensenCertificate",
    "continuity_modulus",
    "cone_members",
    "edwards_gap",
    "jensen_lp",
    "path_model",
    "primal_envelope",
    "random_cone",
]


class ConeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConeModel:
    """Finite graph cone; ``slack`` is indexed like ``constrained_nodes``."""

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    constrained: np.ndarray
    slack: np.ndarray
    kind: str

    def __post_init__(self):
        con = np.zeros(self.n_nodes, bool)
        con[np.asarray(self.constrained, dtype=int)] = True
        object.__setattr__(self, "constrained", np.flatnonzero(con))
        slack = np.broadcast_to(np.asarray(self.slack, dtype=float), (self.constrained.size,)).copy()
        object.__setattr__(self, "slack", slack)
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        self.validate()

    # -- structure

    @property
    def adjacency(self) -> sp.csr_matrix:
        e = np.array(self.edges, dtype=int).reshape(-1, 2)
        data = np.ones(2 * len(e))
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        adj = sp.csr_matrix((data, (rows, cols)), shape=(self.n_nodes, self.n_nodes))
        adj.data[:] = 1.0  # collapse duplicate edges
        return adj

    @property
    def mean_operator(self) -> sp.csr_matrix:
        """Rows of neighbour averages at the constrained nodes."""
        adj = self.adjacency
        deg = np.asarray(adj.sum(axis=1)).ravel()
        W = sp.diags(1.0 / deg) @ adj
        return W.tocsr()[self.constrained]

    @property
    def constraint_matrix(self) -> np.ndarray:
        """Dense ``A`` with ``(A u)(x) = u(x) - mean_{y~x} u(y)`` on constrained rows."""
        A = -self.mean_operator.toarray()
        A[np.arange(self.constrained.size), self.constrained] += 1.0
        return A

    def validate(self) -> None:
        n = self.n_nodes
        if n < 2:
            raise ConeError("a cone model needs at least two nodes")
        for a, b in self.edges:
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise ConeError(f"bad edge ({a}, {b})")
        n_comp, _ = connected_components(self.adjacency, directed=False)
        if n_comp != 1:
            raise ConeError("graph must be connected")
        if np.any(self.slack < 0):
            raise ConeError("slack must be nonnegative")
        if self.kind == "local":
            if self.constrained.size >= n:
                raise ConeError("local kind needs an unconstrained node")
        elif self.kind == "compact":
            if self.constrained.size != n:
                raise ConeError("compact kind constrains every node")
            # with zero slack only constants are admissible: the kernel is 1-dimensional
            rank = np.linalg.matrix_rank(self.constraint_matrix)
            if rank != n - 1:
                raise ConeError("compact constraint kernel is not the constants")
        else:
            raise ConeError(f"unknown cone kind {self.kind!r}")

    def contains(self, u: np.ndarray, tol: float = 1e-9) -> bool:
        return bool(np.all(self.constraint_matrix @ np.asarray(u, float) <= self.slack + tol))

    # -- I/O

    def to_dict(self) -> dict:
        return {
            "nodes": self.n_nodes,
            "edges": [list(e) for e in self.edges],
            "constrained": [int(i) for i in self.constrained],
            "slack": [float(s) for s in self.slack],
            "kind": self.kind,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ConeModel":
        nodes = d["nodes"]
        n = nodes if isinstance(nodes, int) else len(nodes)
        kind = d.get("kind", "local")
        constrained = d.get("constrained", list(range(n)) if kind == "compact" else None)
        if constrained is None:
            raise ConeError("local cone description needs a constrained set")
        return cls(n, tuple(tuple(e) for e in d["edges"]), np.asarray(constrained, int), np.asarray(d.get("slack", 0.0)), kind)

    @classmethod
    def from_json(cls, text: str) -> "ConeModel":
        return cls.from_dict(json.loads(text))


def path_model(slack: float = 0.0) -> ConeModel:
    """Three-node path ``L - M - R`` with only ``M`` constrained."""
    return ConeModel(3, ((0, 1), (1, 2)), np.array([1]), np.array([slack]), "local")


def random_cone(
    rng: np.random.Generator,
    n_nodes: int,
    kind: str = "local",
    slack: float | tuple[float, float] = 0.0,
    unconstrained_fraction: float = 0.2,
    extra_edges: float = 1.0,
) -> ConeModel:
    """Random connected graph: a random tree plus ``extra_edges * n`` chords.

    ``slack`` is a constant or a ``(low, high)`` range for uniform draws.
    """
    perm = rng.permutation(n_nodes)
    edges = set()
    for k in range(1, n_nodes):
        a, b = int(perm[k]), int(perm[rng.integers(k)])
        edges.add((min(a, b), max(a, b)))
    for _ in range(int(extra_edges * n_nodes)):
        a, b = (int(v) for v in rng.choice(n_nodes, 2, replace=False))
        edges.add((min(a, b), max(a, b)))
    if kind == "compact":
        constrained = np.arange(n_nodes)
    else:
        n_free = max(1, int(round(unconstrained_fraction * n_nodes)))
        constrained = np.sort(rng.permutation(n_nodes)[n_free:])
    if isinstance(slack, tuple):
        c = rng.uniform(slack[0], slack[1], constrained.size)
    else:
        c = np.full(constrained.size, float(slack))
    return ConeModel(n_nodes, tuple(sorted(edges)), constrained, c, kind)


# ------------------------------------------------------------------ primal

def primal_envelope(cone: ConeModel, h: np.ndarray, tol: float = 1e-12, max_iter: int = 10**6) -> np.ndarray:
    """Largest cone member below ``h``."""
    h = np.asarray(h, dtype=float)
    if h.shape != (cone.n_nodes,) or not np.all(np.isfinite(h)):
        raise ConeError("h must be a finite vector over the nodes")
    sol = solve_obstacle(cone.mean_operator, cone.slack, h, cone.constrained, tol=tol, max_iter=max_iter)
    if not sol.converged:
        raise EnvelopeError(f"primal envelope did not converge (update {sol.final_update:.3g})")
    return sol.u


def cone_members(cone: ConeModel, rng: np.random.Generator, count: int, scale: float = 1.0) -> np.ndarray:
    """Random cone members: envelopes of random vectors, shape ``(count, n)``."""
    return np.stack([primal_envelope(cone, scale * rng.standard_normal(cone.n_nodes)) for _ in range(count)])


# -------------------------------------------------------------------- dual

@dataclass(frozen=True)
class JensenCertificate:
    barycenter: int
    mu: np.ndarray
    b: float
    objective: float  # sum mu h
    primal: float
    lam: np.ndarray
    dual_envelope: np.ndarray  # LP duals: the envelope itself

    @property
    def gap(self) -> float:
        return self.objective + self.b - self.primal

    def check(self, members: np.ndarray, tol: float = 1e-9) -> float:
        """Largest violation of ``u(x) <= sum mu u + b`` over member rows."""
        members = np.atleast_2d(members)
        viol = members[:, self.barycenter] - (members @ self.mu + self.b)
        return float(max(0.0, viol.max()))

    def to_dict(self) -> dict:
        return {
            "barycenter": self.barycenter,
            "mu": [float(v) for v in self.mu],
            "b": self.b,
            "objective": self.objective,
            "primal": self.primal,
            "gap": self.gap,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def jensen_lp(cone: ConeModel, h: np.ndarray, x: int, *, primal: np.ndarray | None = None, tol: float = 1e-9) -> JensenCertificate:
    """Optimal Jensen pair at ``x`` for the obstacle ``h``.

    Solves ``min h.mu + c.lam`` over ``mu, lam >= 0`` with ``mu + A^T lam = e_x``.
    Summing the rows gives ``sum mu = 1`` because ``A`` has zero row sums.
    """
    h = np.asarray(h, dtype=float)
    n = cone.n_nodes
    if not 0 <= x < n:
        raise ConeError(f"barycenter {x} out of range")
    A = cone.constraint_matrix
    cost = np.concatenate([h, cone.slack])
    A_eq = np.hstack([np.eye(n), A.T])
    rhs = np.zeros(n)
    rhs[x] = 1.0
    res: LPResult = solve_lp(cost, A_eq, rhs, tol=tol)
    if res.status != "optimal":
        raise SimplexError(f"Jensen LP at node {x} is {res.status}")
    mu = np.clip(res.x[:n], 0.0, None)
    lam = np.clip(res.x[n:], 0.0, None)
    if primal is None:
        primal = primal_envelope(cone, h)
    return JensenCertificate(
        int(x), mu, float(cone.slack @ lam), float(h @ mu), float(primal[x]), lam, res.y,
    )


def edwards_gap(cone: ConeModel, h: np.ndarray, nodes=None) -> float:
    """``max_x |P(h)(x) - (sum mu h + b)|`` over ``nodes`` (default all)."""
    primal = primal_envelope(cone, h)
    nodes = range(cone.n_nodes) if nodes is None else nodes
    return max(abs(jensen_lp(cone, h, x, primal=primal).gap) for x in nodes)


def continuity_modulus(cone: ConeModel, h1: np.ndarray, h2: np.ndarray) -> tuple[float, float]:
    """``(||P(h1) - P(h2)||_inf, ||h1 - h2||_inf)``; the first never exceeds the second."""
    p1 = primal_envelope(cone, h1)
    p2 = primal_envelope(cone, h2)
    return float(np.max(np.abs(p1 - p2))), float(np.max(np.abs(np.asarray(h1) - np.asarray(h2))))
