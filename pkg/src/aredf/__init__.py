"""Simulation lab for residual EDFs in contaminated autoregressions.

Simulate stationary AR(p) series with root-n local gross-error
contamination, estimate the mean and lag coefficients robustly, build
residual and symmetrized empirical distribution functions, verify the
first-order expansion of the residual EDF by Monte Carlo, and run a
symmetrized chi-square normality test with level/power experiments.
"""

from .ar_process import (
    ARModelSpec,
    ContaminationSpec,
    ModelError,
    SamplePath,
    check_stationary,
    contaminate,
    simulate_clean,
)
from .edf import EdfView, ks_distance
from .estimation import (
    DegenerateDataError,
    EstimateSet,
    EstimatorConfig,
    estimate_beta,
    estimate_mu,
    estimate_path,
    residuals,
)
from .expansion import (
    DriftingInnovations,
    ExpansionReport,
    ExperimentConfig,
    FixedInnovations,
    SweepConfig,
    drift_identity_table,
    expansion_remainder,
    run_experiment,
    symmetrized_remainder,
)
from .innovations import (
    Laplace,
    LocalMixture,
    Mixture,
    Normal,
    StudentT,
    contaminated_normal,
)
from .normality import (
    ChiSquareConfig,
    NormalityReport,
    PowerScenario,
    chi_square_normality,
    run_level_power,
)
from .outliers import (
    AtomMixture,
    CauchyOutliers,
    NormalOutliers,
    PointMass,
    UniformOutliers,
)
from .shift import ShiftResult, shift_value, symmetrized_shift

__version__ = "0.1.0"
