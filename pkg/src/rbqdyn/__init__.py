"""Random-batch and exact N-body quantum dynamics on periodic grids.

Propagates the exact N-particle dynamics and its random-batch approximation
from a shared initial state, reduces both to single-particle density matrices,
and compares them through trace-norm and Wigner-space metrics against the
closed-form error bounds.
"""

from .batching import BatchSchedule, PairPartition, indicator, pair_frequency, shuffle
from .bounds import BoundInputs, commutator_lemma_check, naive_trace_rhs, theorem_rhs
from .density import (
    DensityMatrix1,
    EnsembleAccumulator,
    ensemble_mean,
    reduce_one,
    reduce_one_symmetrized,
    trace_distance,
)
from .grid import GridSpec, OperatorMatrix, make_grid, weyl_quantize
from .harness import (
    RunConfig,
    SweepRow,
    run_convergence_sweep,
    run_cost_bench,
    run_hbar_sweep,
    verify_suite,
)
from .potential import PotentialConstants, PotentialSpec, interaction_diagonal, potential_constants
from .propagator import (
    EvolveReport,
    WaveFunctionN,
    evolve_full,
    evolve_rb,
    exact_evolve_oracle,
    gaussian_product_state,
    load_state,
    save_state,
    strang_step,
    symmetrize,
)
from .wigner import (
    SymbolDictionary,
    WignerGrid,
    default_dictionary,
    dhbar_lower_bound,
    dual_norm_lower_bound,
    wigner,
)

__version__ = "0.1.0"
