"""Speed-independent bounds for competitive reaction-diffusion traveling waves."""

from .barrier import (
    BarrierTriple,
    Bounds,
    HypothesisBox,
    check_hypothesis_H,
    chi,
    lower_barrier,
    lv_box,
    nbmp_bounds,
    upper_barrier,
)
from .model import LVSystem, enumerate_equilibria, evaluate_kinetics, load_preset, load_system, residual
from .nonexistence import check_nonexistence, sigma4_threshold
from .tangent import (
    TwoSpeciesParams,
    baseline_lower_bound,
    classify_case,
    hyperbola_slope,
    hyperbola_v,
    improved_lower_bound,
    tangent_lambda2,
)
from .verify import compare_bounds, containment_oracle, verify_bounds
from .waves import Grid, SolverConfig, WaveProfile, initial_guess, refine, solve_wave

__version__ = "0.1.0"
