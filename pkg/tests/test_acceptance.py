"""Acceptance criteria: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import sys
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import pytest

from pshlab.scenarios import Check, run_scenario


@lru_cache(maxsize=None)
def _run(name):
    t0 = time.perf_counter()
    res = run_scenario(name)
    return res, time.perf_counter() - t0


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    scenarios: tuple[str, ...]
    select: Callable[[str], bool]
    budget: float | None = None  # seconds, single CPU

    def evaluate(self) -> tuple[bool, str]:
        checks: list[Check] = []
        elapsed = 0.0
        for name in self.scenarios:
            res, dt = _run(name)
            elapsed += dt
            checks += [c for c in res.checks if self.select(c.name)]
        if not checks:
            return False, "no matching checks"
        failed = [c for c in checks if not c.passed]
        ok = not failed
        detail = "; ".join(c.line().split(" ", 1)[1] for c in (failed or checks)[:3])
        if len(checks) > 3 and not failed:
            detail += f"; ... {len(checks)} checks"
        if self.budget is not None:
            ok = ok and elapsed <= self.budget
            detail += f" [{elapsed:.1f} s of {self.budget:g} s]"
        return ok, detail


def _prefix(*names):
    return lambda n: n.startswith(names)


CRITERIA = [
    Criterion(1, "Jensen-measure duality on random graph cones", ("edwards",), _prefix("max_gap", "compact_8_cycle"), 10),
    Criterion(2, "DR round trip against direct rooftops", ("dr_roundtrip",), _prefix("roundtrip_tgrid_", "P_u0_u1_vs_min_tgrid"), 60),
    Criterion(3, "sandwich bounds and t-convexity of slabs", ("geodesic", "dr_roundtrip"), _prefix("sandwich_", "t_convexity")),
    Criterion(4, "Lipschitz bound in t", ("geodesic", "dr_roundtrip"), _prefix("t_lipschitz")),
    Criterion(5, "linear boundary trace with refinement", ("boundary_trace",), _prefix("trace_n", "refinement_factor")),
    Criterion(6, "boundary identity of envelopes", ("envelope",), _prefix("boundary_identity")),
    Criterion(7, "radial 1D oracle agreement with refinement", ("envelope",), _prefix("radial_oracle", "radial_refinement"), 30),
    Criterion(8, "Monge-Ampere residual decay and chord detection", ("hcma",), _prefix("residual_monotone", "chord_negative"), 120),
    Criterion(9, "analytic-disk bounds against grid envelopes", ("poletsky",), _prefix("bound_above", "equality_subharmonic", "radial_gap"), 20),
    Criterion(10, "Hölder exponents of synthetic fields and geodesics", ("holder",), _prefix("calibration_", "cusp_alpha0.5_min", "lipschitz_min"), 90),
    Criterion(11, "second differences on compact subdisks", ("c11",), _prefix("slab_", "rooftop_", "disk_sweep"), 120),
    Criterion(12, "closed-form maximal function on the ball", ("eta_example",), lambda n: True, 5),
    Criterion(13, "Kiselman minimum principle on slab minima", ("dr_roundtrip",), _prefix("kiselman_")),
]


def _line(c: Criterion) -> tuple[bool, str]:
    ok, detail = c.evaluate()
    return ok, f"{'PASS' if ok else 'FAIL'} criterion {c.number:2d} {c.title}: {detail}"


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"criterion_{c.number:02d}" for c in CRITERIA])
def test_criterion(crit, capsys):
    ok, line = _line(crit)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_line(c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
