"""Numerical laboratory for plurisubharmonic envelopes, rooftop envelopes and geodesics."""

from pshlab.envelope import EnvelopeReport, rooftop, sh_envelope
from pshlab.geodesic import GeodesicSlab, geodesic_dr
from pshlab.grid import Domain, Field, GeneratorSpec, Grid2, build_grid, laplacian, make_field, second_difference

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "EnvelopeReport",
    "Field",
    "GeneratorSpec",
    "GeodesicSlab",
    "Grid2",
    "build_grid",
    "geodesic_dr",
    "laplacian",
    "make_field",
    "rooftop",
    "second_difference",
    "sh_envelope",
]
