"""Numerical laboratory for two measure-theoretic constructions.

One half of the package discretizes the centered Gaussian field measure
with resolvent covariance on periodic lattices and locates its support
thresholds (smoothing exponent, envelope exponent, operator-norm bound) by
exact mode sums, alongside a divergence probe showing samples carry no
locally integrable density.  The other half realizes the invariant measure
on the compactified line through its finite torus shadows: exact rational
frequency algebra, Haar sampling and integration of character sums, support
cylinders, and the rescaling action with its ergodicity check.
"""

from ._kernels import NUMBA_ENABLED
from .bohr import (
    ArcSet,
    CylFunction,
    ErgodicityReport,
    GlobalTrigPoly,
    PushforwardReport,
    TorusPoint,
    act_scale,
    character_gram,
    ergodicity_suite,
    evaluate,
    evaluate_point,
    haar_sample,
    integrate_exact,
    integrate_mc,
    is_invariant,
    pushforward_check,
    transport_to_refinement,
    zn_probability,
)
from .errors import DependentSetError, MeasureLabError
from .gaussian import (
    CovarianceParams,
    covariance_exact,
    hs_frobenius_sq,
    kernel_at_zero,
    lattice_kernel,
    pair,
    sample_field,
    sample_stack,
    variance_exact,
)
from .lattice import (
    Field,
    LatticeSpec,
    Multiplier,
    apply_envelope,
    apply_multiplier,
    dft_forward,
    dft_inverse,
    l2_norm_sq,
    make_lattice,
    momentum,
)
from .rational import (
    FrequencyVector,
    IndependentSet,
    SymbolBasis,
    decompose,
    frequency,
    integer_relation,
    make_independent_set,
    rank_over_Q,
    refinement_matrix,
    scale,
)
from .rng import RngState
from .scans import (
    ScanResult,
    SlopeFit,
    fit_log_slope,
    hs_scan,
    ir_scan,
    signed_measure_probe,
    threshold_cross,
    uv_scan,
)

__version__ = "0.1.0"
