"""Zeros of randomized derivatives of random polynomials, iterated."""
from .errors import (BadManifest, BadSpec, Degenerate, NoConvergence, OffCircle, PoleHit,
                     SizeExceeded)
from .metrics import (EmpiricalMeasure, MetricReport, TestFunction, bump_family, circular_w1,
                      log_potential_integral, sliced_w1, small_value_tail)
from .numerics import DEFAULT_TOL, RootSolveReport, Status, ToleranceConfig, eigenvalues_dense
from .operator import (IterationTrace, ScheduleSpec, Variant, beta_zero_step,
                       circular_randomized_derivative, iterate, randomized_derivative)
from .rmt import MinorProblem, UnitaryMatrix, coupled_check, haar_unitary, minor_spectrum
from .sampling import MeasureSpec, RngStream, WeightVector, sample_gamma_weights, sample_points

__version__ = "0.1.0"
