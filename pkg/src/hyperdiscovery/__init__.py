"""Discovery of sparse hyperelastic constitutive models from test data.

The package fits incompressible, isotropic strain-energy models built from
a twelve-term polyconvex catalog to uniaxial-tension, uniaxial-compression
and simple-shear stress measurements.  Two discovery paths are provided:
exhaustive best-subset regression ranked by information criteria, and a
regularised non-negative gradient-trained model with term pruning.
"""

from .exceptions import (
    DataError,
    DegenerateDataError,
    DiscoveryError,
    DomainError,
    FeasibilityError,
    FitError,
    HyperdiscoveryError,
    ParameterError,
)
from .kinematics import (
    DeformationState,
    LoadingMode,
    invariants_shear,
    invariants_uniaxial,
    piola_transform,
)
from .energy import (
    CATALOG,
    FEASIBILITY_MARGIN,
    Activation,
    ClassicModel,
    Demiray,
    FeasibilityReport,
    FeasibilityViolation,
    Gent,
    ModelSpec,
    MooneyRivlin,
    NeoHookean,
    TermKind,
    TermParams,
    classic_to_spec,
    feasibility_bound,
    load_model,
    log_inner_limit,
    model_derivative,
    model_energy,
    model_expression,
    model_to_text,
    parameter_vector,
    save_model,
    term_derivative,
    term_expression,
    term_kind,
    term_value,
    text_to_model,
)
from .stress import (
    nominal_stress,
    nominal_stress_shear,
    nominal_stress_uniaxial,
    predict_curve,
)
from .data import (
    DataSeries,
    DataWarning,
    Dataset,
    SyntheticSpec,
    generate_synthetic,
    invariant_extrema,
    load_csv,
    predict_dataset,
    save_csv,
)
from .fit import (
    DENOMINATOR_FLOOR,
    AdamConfig,
    FitConfig,
    FitResult,
    adam_fit,
    evaluate_model,
    fit_subset,
    mape_loss,
    multi_mode_loss,
    r_squared,
    rss,
)
from .select import (
    ContributionSeries,
    DiscoveryResult,
    SelectionCriterion,
    SubsetRecord,
    SweepRow,
    best_subset_discover,
    contribution_table,
    criterion_value,
    elastic_grid,
    hyperparameter_sweep,
    l1_grid,
    l2_grid,
    nn_discover,
)
from .estimators import (
    BestSubsetRegressor,
    ClassicModelRegressor,
    ConstitutiveNetworkRegressor,
    TermSubsetRegressor,
)

__version__ = "0.1.0"
