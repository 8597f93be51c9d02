"""Numerical experiments on weighted inequalities for the maximal function.

Piecewise-power functions and weights, exact maximal functions, weight
constants by supremum search, weighted Lorentz norms, closed-form bounds and
delta sweeps.
"""

from ._kernels import backend, set_backend
from .errors import *  # noqa: F401,F403
from .funcspace import (
    Interval,
    PiecewisePower,
    Rect,
    StepFunction,
    average,
    format_descriptor,
    integrate,
    integrate_range,
    load_descriptor,
    parse_descriptor,
    power,
    product,
    restrict,
    superlevel,
)
from .lab import (
    SweepConfig,
    SweepReport,
    falsify_double_ainfty,
    fit_exponent,
    run_sweep,
    sweep_buckley,
    sweep_dual,
    sweep_step_weight,
)
from .lorentz import (
    DistributionFunction,
    LorentzParams,
    distribution,
    distribution_function,
    lorentz_norm,
    profile_norm,
    weak_norm,
)
from .maximal import (
    GridSpec,
    MaximalResult,
    dual_T_at,
    maximal_at,
    maximal_bruteforce,
    maximal_centered_at,
    maximal_many,
    maximal_profile,
    strong_maximal_separable,
    weighted_centered_Mp_at,
)
from .theory import (
    BoundInputs,
    Lemma5Instance,
    buckley_bound,
    dual_bound,
    lemma5_check,
    main_theorem_bound,
    mixed_bound_lorentz,
    strong_bound,
)
from .weights import (
    ConstantEstimate,
    SearchConfig,
    a1_two_weight,
    ainfty_fujii_wilson,
    ap_constant,
    ap_two_weight,
    calibrate_rh_constant,
    fujii_wilson_cube,
    openness_check,
    reverse_holder_check,
    rh_exponent,
    strong_ainfty_separable,
    strong_constants_separable,
)

__version__ = "0.1.0"
