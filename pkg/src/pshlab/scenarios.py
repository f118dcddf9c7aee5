"""Built-in scenarios: each builds its inputs, runs a pipeline and declares checks."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from pshlab import disks, duality, geodesic, regularity
from pshlab.envelope import radial_profile_envelope, rooftop, sh_envelope, toric_rooftop
from pshlab.grid import Field, GeneratorSpec, Grid2, build_grid, laplacian, make_field

log = logging.getLogger(__name__)

RADIAL_PAIR = ("constant(0)", "radial_log(1, 0, -1)")
SMOOTH_PAIR = ("toric_sample(4)", "toric_sample(2, 2)")


class ScenarioError(ValueError):
    """Bad scenario name or parameters."""


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    bound: float
    relation: str = "<="  # value <relation> bound
    scalable: bool = True  # whether --tol-scale widens the bound

    @property
    def passed(self) -> bool:
        if np.isnan(self.value):
            return False
        return self.value <= self.bound if self.relation == "<=" else self.value >= self.bound

    def to_dict(self) -> dict:
        return {"name": self.name, "value": float(self.value), "bound": float(self.bound),
                "relation": self.relation, "passed": self.passed}

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value:.6g} {self.relation} {self.bound:.6g}"


@dataclass
class RunContext:
    jobs: int = 1
    seed: int = 0
    tol_scale: float = 1.0


@dataclass
class ScenarioResult:
    name: str
    params: dict
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    tables: dict[str, list[dict]] = field(default_factory=dict)
    fields: dict[str, Field] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def report(self) -> dict:
        return {
            "scenario": self.name,
            "params": {k: _jsonable(v) for k, v in self.params.items()},
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "data": _jsonable(self.data),
        }


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


class _Builder:
    """Collects checks, applying the tolerance scale to scalable bounds."""

    def __init__(self, result: ScenarioResult, ctx: RunContext):
        self.result = result
        self.ctx = ctx

    def le(self, name, value, bound, scalable=True):
        b = bound * self.ctx.tol_scale if scalable else bound
        self.result.checks.append(Check(name, float(value), float(b), "<=", scalable))

    def ge(self, name, value, bound, scalable=False):
        self.result.checks.append(Check(name, float(value), float(bound), ">=", scalable))


# ------------------------------------------------------------------ helpers

_ORIGIN_RATIO = 1e-2


def _radial_oracle_values(grid: Grid2, s: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Interpolate an s-grid profile at every active node (origin takes the left end)."""
    r = np.abs(grid.z_eval)
    out = np.full(grid.shape, np.nan)
    m = grid.active
    with np.errstate(divide="ignore"):
        sr = np.log(np.where(r > 0, r, np.exp(s[0])))
    out[m] = np.interp(sr[m], s, vals)
    return out


def radial_oracle_error(env: Field, profile: Callable[[np.ndarray], np.ndarray], n_s: int = 2001) -> float:
    """Sup gap between a 2D envelope and the 1D hull oracle of a radial obstacle."""
    g = env.grid
    # start well inside the first ring so the origin sees the r -> 0 limit
    s, o = radial_profile_envelope(profile, g.spacing * _ORIGIN_RATIO, g.domain.half_width, n_s)
    return float(np.max(np.abs(env.values - _radial_oracle_values(g, s, o))[g.active]))


def _profile(spec: str) -> Callable[[np.ndarray], np.ndarray]:
    gen = GeneratorSpec.parse(spec)
    return lambda r: gen(np.asarray(r, dtype=complex))


def _pair(grid: Grid2, specs) -> tuple[Field, Field]:
    return make_field(grid, specs[0]), make_field(grid, specs[1])


def _slab_invariants(b: _Builder, slab: geodesic.GeodesicSlab, prefix: str) -> None:
    lo, hi = geodesic.sandwich_violation(slab)
    b.le(f"{prefix}sandwich_lower", lo, 1e-9)
    b.le(f"{prefix}sandwich_upper", hi, 1e-9)
    b.le(f"{prefix}t_convexity", geodesic.t_convexity_violation(slab), 1e-8)
    ratio, M = geodesic.t_lipschitz_check(slab)
    b.le(f"{prefix}t_lipschitz", ratio, M + 2 * slab.delta_C, scalable=False)
    b.result.data[f"{prefix}M"] = M
    b.result.data[f"{prefix}delta_C"] = slab.delta_C
    b.result.data[f"{prefix}input_defect"] = list(slab.input_defect)


def _radial_slab_gap(slab: geodesic.GeodesicSlab, n_s: int, n_C: int) -> float:
    g = slab.grid
    s = np.linspace(np.log(g.spacing), 0.0, n_s)
    r = np.exp(s)
    p0 = _profile(RADIAL_PAIR[0])(r)
    p1 = _profile(RADIAL_PAIR[1])(r)
    planes, _ = geodesic.toric_geodesic(p0, p1, s, slab.t_grid, n_C)
    gap = 0.0
    for k, p in enumerate(slab.planes):
        o = _radial_oracle_values(g, s, planes[k])
        gap = max(gap, float(np.max(np.abs(p.values - o)[g.active])))
    return gap


# ---------------------------------------------------------------- scenarios

def run_envelope(p: dict, ctx: RunContext) -> ScenarioResult:
    res = ScenarioResult("envelope", p)
    b = _Builder(res, ctx)
    errs = []
    for n in (p["n"], p["n_fine"]):
        g = build_grid(p["domain"], n)
        h = make_field(g, p["obstacle"])
        rep = sh_envelope(h, p["tol"])
        b.ge(f"converged_n{n}", float(rep.converged), 1.0)
        bd = float(np.max(np.abs(rep.envelope.values - h.values)[g.boundary]))
        b.le(f"boundary_identity_n{n}", bd, p["boundary_tol"])
        b.le(f"below_obstacle_n{n}", float(np.max((rep.envelope.values - h.values)[g.active])), 1e-12)
        err = radial_oracle_error(rep.envelope, _profile(p["obstacle"]), p["n_s"])
        errs.append(err)
        res.data[f"n{n}"] = rep.sidecar()
        if n == p["n"]:
            res.fields["envelope"] = rep.envelope
    b.le(f"radial_oracle_n{p['n']}", errs[0], p["radial_tol"])
    b.ge("radial_refinement_factor", errs[0] / max(errs[1], 1e-300), p["improve"])
    res.data["radial_errors"] = errs
    # boundary identity for non-radial obstacles
    g = build_grid(p["domain"], p["n"])
    for spec in p["extra_obstacles"].split(";"):
        spec = spec.strip()
        if not spec:
            continue
        h = make_field(g, spec)
        env = sh_envelope(h, p["tol"]).envelope
        bd = float(np.max(np.abs(env.values - h.values)[g.boundary]))
        b.le(f"boundary_identity[{spec}]", bd, p["boundary_tol"])
    cap = sh_envelope(make_field(g, "quadratic(-1, 0, -1)"), p["tol"]).envelope
    b.le("superharmonic_cap_constant", float(np.max(np.abs(cap.values + 1.0)[g.active])), 1e-8)
    return res


def run_rooftop(p: dict, ctx: RunContext) -> ScenarioResult:
    res = ScenarioResult("rooftop", p)
    b = _Builder(res, ctx)
    g = build_grid("disk(1)", p["n"])
    u, v = make_field(g, p["u"]), make_field(g, p["v"])
    rep = rooftop(u, v, p["tol"])
    env = rep.envelope
    mn = u.minimum(v)
    b.le("boundary_identity", float(np.max(np.abs(env.values - mn.values)[g.boundary])), 1e-12)
    b.le("below_min", float(np.max((env.values - mn.values)[g.active])), 1e-12)
    s = np.linspace(np.log(g.spacing * _ORIGIN_RATIO), 0.0, p["n_s"])
    r = np.exp(s)
    oracle = toric_rooftop(_profile(p["u"])(r), _profile(p["v"])(r), s)
    err = float(np.max(np.abs(env.values - _radial_oracle_values(g, s, oracle))[g.active]))
    b.le("radial_oracle", err, p["radial_tol"])
    same = rooftop(u, u, p["tol"]).envelope - sh_envelope(u, p["tol"]).envelope
    b.le("rooftop_u_u_equals_envelope", same.sup_norm(), 1e-12)
    res.data["envelope"] = rep.sidecar()
    res.fields["rooftop"] = env
    return res


def _radial_slab(p: dict, ctx: RunContext, n_C=None) -> geodesic.GeodesicSlab:
    g = build_grid("disk(1)", p["n"])
    u0, u1 = _pair(g, RADIAL_PAIR)
    return geodesic.geodesic_dr(u0, u1, p["n_t"], n_C or p["n_C"], p["tol"], jobs=ctx.jobs)


def run_geodesic(p: dict, ctx: RunContext) -> ScenarioResult:
    res = ScenarioResult("geodesic", p)
    b = _Builder(res, ctx)
    slab = _radial_slab(p, ctx)
    _slab_invariants(b, slab, "")
    b.le("radial_oracle_gap", _radial_slab_gap(slab, p["n_s"], p["oracle_n_C"]), p["oracle_tol"])
    fine = _radial_slab(p, ctx, geodesic.refine_c(p["n_C"]))
    drop = max(float(np.max((a.values - c.values)[slab.grid.active])) for a, c in zip(slab.planes, fine.planes))
    b.le("refine_C_monotone", drop, 1e-9)
    res.data["boundary_trace_error"] = geodesic.boundary_trace_error(slab)
    res.tables["planes_at_origin"] = [
        {"t": float(t), "value": pl.at(0.0, 0.0)} for t, pl in zip(slab.t_grid, slab.planes)
    ]
    res.data["stats"] = list(slab.stats)
    res.fields["plane_mid"] = slab.planes[slab.n_t // 2]
    return res


def run_dr_roundtrip(p: dict, ctx: RunContext) -> ScenarioResult:
    res = ScenarioResult("dr_roundtrip", p)
    b = _Builder(res, ctx)
    slab = _radial_slab(p, ctx)
    g = slab.grid
    _slab_invariants(b, slab, "")
    cs = np.linspace(slab.C_grid[0], slab.C_grid[-1], p["n_C_checks"])
    tol_rt = slab.delta_C + p["roundtrip_slack"]
    kis_bound = 10 * p["tol"] / g.spacing**2
    rows = []
    for k, C in enumerate(cs):
        direct = rooftop(slab.u0, slab.u1 - C, p["tol"]).envelope
        exact = geodesic.rooftop_from_slab(slab, C, exact=True)
        grid_min = geodesic.rooftop_from_slab(slab, C, exact=False)
        ge, gg = (exact - direct).sup_norm(), (grid_min - direct).sup_norm()
        b.le(f"roundtrip_C{k}", ge, tol_rt)
        b.le(f"roundtrip_tgrid_C{k}", gg, tol_rt)
        lap = laplacian(exact).values[g.interior]
        b.ge(f"kiselman_C{k}", float(np.min(lap)), -kis_bound)
        lap_grid = float(np.min(laplacian(grid_min).values[g.interior]))
        rows.append({"C": float(C), "gap_exact": ge, "gap_tgrid": gg, "min_laplacian": float(np.min(lap)),
                     "min_laplacian_tgrid": lap_grid})
    res.tables["roundtrip"] = rows
    P = rooftop(slab.u0, slab.u1, p["tol"]).envelope
    b.le("P_u0_u1_vs_inf_t", (geodesic.rooftop_from_slab(slab, 0.0, exact=True) - P).sup_norm(), p["roundtrip_slack"])
    b.le("P_u0_u1_vs_min_tgrid", (geodesic.rooftop_from_slab(slab, 0.0, exact=False) - P).sup_norm(), p["roundtrip_slack"])
    res.data["delta_C"] = slab.delta_C
    return res


def run_boundary_trace(p: dict, ctx: RunContext) -> ScenarioResult:
    res = ScenarioResult("boundary_trace", p)
    b = _Builder(res, ctx)
    devs = []
    n, n_C = p["n"], p["n_C"]
    for level in range(2):
        g = build_grid("disk(1)", n)
        u0, u1 = _pair(g, (p["u0"], p["u1"]))
        slab = geodesic.geodesic_dr(u0, u1, p["n_t"], n_C, p["tol"], jobs=ctx.jobs)
        dev = geodesic.boundary_trace_error(slab)
        b.le(f"trace_n{n}", dev, slab.delta_C + 2 * g.spacing)
        res.tables.setdefault("refinement", []).append(
            {"n": n, "n_C": n_C, "spacing": g.spacing, "delta_C": slab.delta_C, "deviation": dev})
        devs.append(dev)
        n, n_C = 2 * n - 1, geodesic.refine_c(n_C)
    b.ge("refinement_factor", devs[0] / max(devs[1], 1e-300), p["improve"])
    g = build_grid("disk(1)", p["n"])
    slab = geodesic.geodesic_dr(*_pair(g, RADIAL_PAIR), p["n_t"], p["n_C"], p["tol"], jobs=ctx.jobs)
    b.le("trace_radial_pair", geodesic.boundary_trace_error(slab), slab.delta_C + 2 * g.spacing)
    # diagnostic: t-convexity of the boundary traces
    st = slab.stack()[:, g.boundary]
    res.data["boundary_t_convexity_min"] = float(np.min(st[2:] + st[:-2] - 2 * st[1:-1]))
    return res


def run_hcma(p: dict, ctx: RunContext) -> ScenarioResult:
    res = ScenarioResult("hcma", p)
    b = _Builder(res, ctx)
    n_C = p["n_C"]
    rows = []
    for n in p["levels"]:
        n = int(n)
        g = build_grid("disk(1)", n)
        u0, u1 = _pair(g, (p["u0"], p["u1"]))
        slab = geodesic.geodesic_dr(u0, u1, p["n_t"], n_C, p["tol"], jobs=ctx.jobs)
        rep = geodesic.hcma_residual(slab, p["radius"])
        rows.append({"n": n, "n_C": n_C, **rep.summary()})
        n_C = geodesic.refine_c(n_C)
    res.tables["refinement"] = rows
    vals = [r["max_abs"] for r in rows]
    dec = min(a - c for a, c in zip(vals[:-1], vals[1:]))
    b.ge("residual_monotone_decrease", dec, 0.0)
    # the chord of (0, |z|^2 - 1) is a subgeodesic with a negative determinant
    g = build_grid("disk(1)", int(p["levels"][0]))
    cs = geodesic.chord_slab(make_field(g, "constant(0)"), make_field(g, "toric_sample(2)") - 1.0, p["n_t"])
    chord_rep = geodesic.hcma_residual(cs)
    b.le("chord_negative_det", chord_rep.signed_min, -0.01, scalable=False)
    res.data["chord"] = chord_rep.summary()
    return res


def run_edwards(p: dict, ctx: RunContext) -> ScenarioResult:
    res = ScenarioResult("edwards", p)
    b = _Builder(res, ctx)
    rng = np.random.default_rng(ctx.seed)
    rows, worst = [], 0.0
    worst_cert, worst_bdry, worst_concave = 0.0, 0.0, 0.0
    for k in range(p["instances"]):
        n = int(rng.integers(p["min_nodes"], p["max_nodes"] + 1))
        kind = "local" if k % 2 == 0 else "compact"
        slack = 0.0 if kind == "local" else (0.0, p["max_slack"])
        cone = duality.random_cone(rng, n, kind, slack, p["unconstrained_fraction"])
        h = rng.standard_normal(n)
        primal = duality.primal_envelope(cone, h)
        gaps, certs = [], []
        for x in range(n):
            cert = duality.jensen_lp(cone, h, x, primal=primal)
            gaps.append(abs(cert.gap))
            certs.append(cert)
        gap = max(gaps)
        worst = max(worst, gap)
        if k < p["certificate_instances"]:
            members = duality.cone_members(cone, rng, p["members"])
            worst_cert = max(worst_cert, max(c.check(members) for c in certs))
        if kind == "local":
            free = np.setdiff1d(np.arange(n), cone.constrained)
            for x in free:
                c = certs[x]
                e = np.zeros(n)
                e[x] = 1.0
                worst_bdry = max(worst_bdry, float(np.max(np.abs(c.mu - e))), abs(c.b))
        else:
            h2 = rng.standard_normal(n)
            mid = duality.primal_envelope(cone, (h + h2) / 2)
            avg = 0.5 * (primal + duality.primal_envelope(cone, h2))
            worst_concave = max(worst_concave, float(np.max(avg - mid)))
        rows.append({"instance": k, "kind": kind, "nodes": n, "gap": gap})
    b.le("max_gap", worst, p["gap_tol"])
    b.le("certificate_violation", worst_cert, 1e-9)
    b.le("boundary_barycenter_point_mass", worst_bdry, 1e-9)
    b.le("concavity_violation", worst_concave, 1e-9)
    cyc = duality.ConeModel(8, tuple((i, (i + 1) % 8) for i in range(8)), np.arange(8), np.full(8, 0.3), "compact")
    b.le("compact_8_cycle_gap", duality.edwards_gap(cyc, rng.standard_normal(8)), p["gap_tol"])
    res.tables["instances"] = rows
    return res


def run_poletsky(p: dict, ctx: RunContext) -> ScenarioResult:
    res = ScenarioResult("poletsky", p)
    b = _Builder(res, ctx)
    g = build_grid("disk(1)", p["n"])
    fam = disks.DiskFamily(m=p["m"])
    pts = np.linspace(-p["sample_radius"], p["sample_radius"], p["sample_count"])
    nodes = []
    for x in pts:
        for y in pts:
            if x * x + y * y <= p["sample_radius"] ** 2 + 1e-12:
                i, j = g.lattice_index(x, y)
                if g.interior[i, j]:
                    nodes.append((i, j))
    rows = []

    def compare(spec):
        gen = GeneratorSpec.parse(spec)
        env = sh_envelope(make_field(g, gen), p["tol"]).envelope
        lo, hi = np.inf, 0.0
        for i, j in nodes:
            bound = disks.poletsky_bound(gen, complex(g.z[i, j]), fam)
            d = bound - env.values[i, j]
            lo = min(lo, d)
            hi = max(hi, abs(d))
            rows.append({"obstacle": spec, "x": float(g.x[i, j]), "y": float(g.y[i, j]), "bound": bound,
                         "envelope": float(env.values[i, j])})
        return lo, hi, env

    for spec in p["obstacles"].split(";"):
        spec = spec.strip()
        lo, _, env = compare(spec)
        b.ge(f"bound_above_envelope[{spec}]", lo, -1e-9)
    for spec in p["subharmonic"].split(";"):
        spec = spec.strip()
        gen = GeneratorSpec.parse(spec)
        err = max(abs(disks.poletsky_bound(gen, complex(g.z[i, j]), fam) - float(gen(g.z[i, j]))) for i, j in nodes)
        b.le(f"equality_subharmonic[{spec}]", err, 1e-8)
    gen = GeneratorSpec.parse(p["radial_obstacle"])
    env0 = sh_envelope(make_field(g, gen), p["tol"]).envelope.at(0.0, 0.0)
    b.le("radial_gap_at_origin", abs(disks.poletsky_bound(gen, 0j, fam) - env0), 5e-2)
    cap = disks.poletsky_bound("quadratic(-1, 0, -1)", 0j, fam)
    b.le("superharmonic_cap_value", abs(cap + 1.0), 1e-12)
    res.tables["samples"] = rows
    return res


def run_holder(p: dict, ctx: RunContext) -> ScenarioResult:
    res = ScenarioResult("holder", p)
    b = _Builder(res, ctx)
    g = build_grid("disk(1)", p["n"])
    for beta in p["calibration"]:
        f = Field(g, np.where(g.active, np.abs(g.z_eval.real) ** beta, np.nan))
        fit = regularity.holder_fit(f)
        b.le(f"calibration_beta{beta:g}", abs(fit.exponent - beta), 0.03)
        res.tables[f"moduli_beta{beta:g}"] = [{"lag": a, "modulus": w} for a, w in fit.table()]
    cusp = regularity.holder_geodesic_experiment(p["alpha"], p["n"], p["n_t"], p["n_C"], "cusp", tol=p["tol"], jobs=ctx.jobs)
    b.ge(f"cusp_alpha{p['alpha']:g}_min_exponent", cusp["min_exponent"], p["cusp_min"])
    b.le(f"cusp_alpha{p['alpha']:g}_max_exponent", cusp["max_exponent"], 1.0, scalable=False)
    lip = regularity.holder_geodesic_experiment(1.0, p["n"], p["n_t"], p["n_C"], "lipschitz", p["shift"], p["tol"], ctx.jobs)
    b.ge("lipschitz_min_exponent", lip["min_exponent"], p["lipschitz_min"])
    res.data["cusp"] = cusp
    res.data["lipschitz"] = lip
    if p["report_alpha_one"]:
        res.data["cusp_alpha1"] = regularity.holder_geodesic_experiment(1.0, p["n"], p["n_t"], p["n_C"], "cusp", tol=p["tol"], jobs=ctx.jobs)
    return res


def run_c11(p: dict, ctx: RunContext) -> ScenarioResult:
    res = ScenarioResult("c11", p)
    b = _Builder(res, ctx)
    g = build_grid("disk(1)", p["n"])
    K = tuple(p["K_radii"])
    slab = geodesic.geodesic_dr(*_pair(g, (p["u0"], p["u1"])), p["n_t"], p["n_C"], p["tol"], jobs=ctx.jobs)
    tables = {"slab": regularity.c11_scan(slab, K)}
    rt = rooftop(make_field(g, p["roof_u"]), make_field(g, p["roof_v"]), p["tol"])
    tables["rooftop"] = regularity.c11_scan(rt.envelope, K)
    for name, tab in tables.items():
        b.le(f"{name}_finite", float(max(tab.values)), p["finite_cap"], scalable=False)
        ratio, dist_ratio = tab.ratio(0, -1)
        b.le(f"{name}_dist_ratio", ratio, p["safety"] * dist_ratio, scalable=False)
        b.ge(f"{name}_axis_sum_lower", float(min(tab.lower)), -1e-8)
        res.tables[f"c11_{name}"] = tab.rows()
    s, vals, slope = disks.second_diff_sweep(p["disk_obstacle"], p["disk_z"], np.linspace(0.02, 0.2, 10))
    b.ge("disk_sweep_exponent", slope, 1.9)
    res.tables["disk_sweep"] = [{"a": float(a), "second_difference": float(v)} for a, v in zip(s, vals)]
    amps = np.linspace(0.02, 0.2, 4)
    q = {}
    for z in (0.0, 0.5, 0.8):
        q[z] = max(abs(disks.second_diff_disk(p["scaling_obstacle"], z, a)) / a**2 for a in amps)
    for z in (0.5, 0.8):
        b.le(f"disk_scaling_z{z:g}", q[z], 3 * q[0.0] / (1 - z * z) ** 2, scalable=False)
    res.data["disk_scaling"] = {str(k): v for k, v in q.items()}
    return res


def run_eta_example(p: dict, ctx: RunContext) -> ScenarioResult:
    res = ScenarioResult("eta_example", p)
    b = _Builder(res, ctx)
    for a in p["alphas"]:
        rep = regularity.eta_example_check(a, p["samples"], ctx.seed)
        b.le(f"boundary_identity_alpha{a:g}", rep["boundary_identity_error"], 1e-12)
        b.le(f"det_fd_alpha{a:g}", rep["det_fd_max"], 1e-6)
        b.ge(f"hessian_entry_nonneg_alpha{a:g}", rep["hessian_entry_min"], 0.0)
        b.le(f"det_closed_form_alpha{a:g}", rep["det_closed_form_max"], 0.0, scalable=False)
        b.le(f"pole_value_alpha{a:g}", abs(rep["at_pole"]), 0.0, scalable=False)
        res.data[f"alpha{a:g}"] = rep
    return res


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    defaults: dict
    func: Callable[[dict, RunContext], ScenarioResult]


_RADIAL = {"n": 101, "n_t": 21, "n_C": 81, "tol": 1e-10}

SCENARIOS: dict[str, Scenario] = {
    s.name: s
    for s in [
        Scenario("envelope", "subharmonic envelope: boundary identity and radial 1D oracle with refinement",
                 {"domain": "disk(1)", "n": 101, "n_fine": 201, "obstacle": "cone(4, -3, 0)", "tol": 1e-10,
                  "n_s": 2001, "radial_tol": 2e-2, "improve": 1.5, "boundary_tol": 1e-12,
                  "extra_obstacles": "holder_cusp(0.5, 1, 0); smooth_bump(0.2, 0.1, 0.4, 1)"}, run_envelope),
        Scenario("rooftop", "rooftop envelope of two radial potentials against the toric 1D oracle",
                 {"n": 101, "u": "radial_log(1, 0, -1)", "v": "quadratic(1, 0, 1, 0, 0, -0.9)", "tol": 1e-10, "n_s": 2001,
                  "radial_tol": 2e-2}, run_rooftop),
        Scenario("geodesic", "geodesic of the radial pair: sandwich, convexity, Lipschitz, 1D oracle",
                 {**_RADIAL, "n_s": 2001, "oracle_n_C": 401, "oracle_tol": 3e-2}, run_geodesic),
        Scenario("dr_roundtrip", "inverse transform of the slab against direct rooftops, Kiselman check",
                 {**_RADIAL, "n_C_checks": 5, "roundtrip_slack": 5e-3}, run_dr_roundtrip),
        Scenario("boundary_trace", "linear boundary trace of geodesics under refinement",
                 {"n": 51, "n_t": 21, "n_C": 81, "tol": 1e-10, "u0": "constant(0)", "u1": "linear(1, 0)",
                  "improve": 1.5}, run_boundary_trace),
        Scenario("hcma", "complex Monge-Ampere residual of geodesic slabs under refinement",
                 {"levels": (51.0, 101.0, 201.0), "n_t": 21, "n_C": 81, "tol": 1e-10, "u0": SMOOTH_PAIR[0],
                  "u1": SMOOTH_PAIR[1], "radius": 0.8}, run_hcma),
        Scenario("edwards", "Jensen-measure LP duality on random graph cones",
                 {"instances": 50, "min_nodes": 5, "max_nodes": 60, "max_slack": 0.5,
                  "unconstrained_fraction": 0.2, "certificate_instances": 10, "members": 100,
                  "gap_tol": 1e-7}, run_edwards),
        Scenario("poletsky", "analytic-disk upper bounds against grid envelopes",
                 {"n": 101, "m": 256, "tol": 1e-10, "sample_radius": 0.9, "sample_count": 9,
                  "obstacles": "cone(4, -3, 0); quadratic(-1, 0, -1)",
                  "subharmonic": "toric_sample(2); linear(1, 0.5); quadratic(1, 0, 1, 0.2, 0, 0)",
                  "radial_obstacle": "cone(4, -3, 0)"}, run_poletsky),
        Scenario("holder", "Hölder exponent calibration and geodesic regularity experiments",
                 {**_RADIAL, "calibration": (0.3, 0.5, 1.0), "alpha": 0.5, "cusp_min": 0.2, "shift": 0.5,
                  "lipschitz_min": 0.9, "report_alpha_one": True}, run_holder),
        Scenario("c11", "second-difference bounds on compact subdisks and twisted disk functionals",
                 {**_RADIAL, "K_radii": (0.5, 0.8), "u0": SMOOTH_PAIR[0], "u1": SMOOTH_PAIR[1],
                  "roof_u": "toric_sample(2)", "roof_v": "quadratic(0.5, 0, 0.5, 0.3, 0, 0.1)",
                  "finite_cap": 1e6, "safety": 2.0, "disk_obstacle": "smooth_bump(0.3, 0, 0.4, 1)",
                  "disk_z": 0.2, "scaling_obstacle": "toric_sample(2)"}, run_c11),
        Scenario("eta_example", "closed-form maximal function on the ball in C^2",
                 {"alphas": (0.25, 0.5, 1.0, 1.5), "samples": 1000}, run_eta_example),
    ]
}


def coerce_params(name: str, overrides: dict[str, str] | None = None) -> dict:
    """Defaults of scenario ``name`` updated with string ``overrides``."""
    if name not in SCENARIOS:
        raise ScenarioError(_unknown(name))
    params = dict(SCENARIOS[name].defaults)
    for key, text in (overrides or {}).items():
        if key not in params:
            raise ScenarioError(f"scenario {name!r} has no parameter {key!r}; known: {', '.join(sorted(params))}")
        default = params[key]
        try:
            if isinstance(default, bool):
                low = str(text).strip().lower()
                if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                    raise ValueError(text)
                params[key] = low in ("1", "true", "yes", "on")
            elif isinstance(default, int):
                params[key] = int(text)
            elif isinstance(default, float):
                params[key] = float(text)
            elif isinstance(default, tuple):
                params[key] = tuple(float(v) for v in str(text).split(",") if v.strip())
            else:
                params[key] = str(text)
        except ValueError as exc:
            raise ScenarioError(f"bad value {text!r} for {name}.{key}") from exc
    _validate_specs(params)
    return params


def _validate_specs(params: dict) -> None:
    # every generator-like string must parse before any work starts
    for key, v in params.items():
        if not isinstance(v, str) or key == "domain":
            continue
        for part in v.split(";"):
            part = part.strip()
            if part:
                GeneratorSpec.parse(part)


def _unknown(name: str) -> str:
    import difflib

    close = difflib.get_close_matches(name, SCENARIOS, n=1)
    hint = f"; did you mean {close[0]!r}?" if close else ""
    return f"unknown scenario {name!r}{hint}"


def run_scenario(name: str, overrides: dict[str, str] | None = None, ctx: RunContext | None = None) -> ScenarioResult:
    params = coerce_params(name, overrides)
    ctx = ctx or RunContext()
    t0 = time.perf_counter()
    res = SCENARIOS[name].func(params, ctx)
    log.info("scenario %s finished in %.2f s", name, time.perf_counter() - t0)
    return res
