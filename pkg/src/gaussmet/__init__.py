"""gaussmet: precision limits of Gaussian probes in passive linear optics.

Computes the quantum Fisher information of arbitrary Gaussian states sent
through parameterized beam-splitter/phase-shifter circuits, synthesizes the
probe and homodyne measurement that reach the universal ceiling
8 |g|^2 nbar (nbar + 1), and validates the bound chain numerically.
"""

__version__ = "0.1.0"

from .circuit_model import (
    GeneratorSpectrum,
    ParamCircuit,
    PhaseSpaceLift,
    corpus_names,
    generator,
    load_corpus,
    parse_circuit,
    phase_space_lift,
    unitary_at,
)
from .gaussian_core import (
    GaussianState,
    apply_rotation,
    bloch_messiah,
    canonical_decomposition,
    characteristic_function,
    convex_weight,
    mean_photon_number,
    new_state,
    pure_core,
    purity,
    random_state,
    state_from_json,
    state_to_json,
    symplectic_form,
    vacuum,
    williamson,
)
from .measurement_sim import (
    EstimationRun,
    HomodyneModel,
    homodyne_fi,
    homodyne_pdf,
    homodyne_variance,
    mle_estimate,
    optimal_theta,
    run_estimation,
    sample_homodyne,
)
from .optimal_probe import (
    AuditReport,
    OptimalProbeSpec,
    mixed_bound_audit,
    optimal_state,
    saturation_check,
    squeeze_param,
)
from .qfi_engine import (
    LemmaReport,
    QfiReport,
    SldCoefficients,
    generator_variance,
    qfi,
    qfi_bound,
    qfi_pure_linear,
    sld,
    solve_lambda,
    verify_matrix_lemmas,
)
from .sequential_planner import (
    SequentialPlan,
    compose_sequential,
    optimal_controls,
    sequential_bound,
    sequential_qfi,
)
