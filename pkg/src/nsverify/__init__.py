"""Scaling-symmetry calculus and numerical verification for incompressible Navier-Stokes fields."""

from .fieldkit import AnalyticField, embed, evaluate, from_fourier, gallery, gallery_names
from .gridops import Grid, SampledField, poisson_solve, sample
from .scalecalc import WeightAssignment, check_invariance, parse, weight
from .scaling import ScalingLaw, measure_exponent, predict_exponents, table1
from .verifier import VerificationReport, run_suite

__version__ = "0.1.0"
