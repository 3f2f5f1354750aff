"""Shape-based classification of multivariate functional data.

Directional outlyingness summaries (MO, VO, FO and their matrix versions),
robust Mahalanobis scoring of the (MO, VO) feature via the minimum covariance
determinant, depth-based baseline classifiers, and seeded benchmark
generators with an experiment runner.
"""

from .curves import (
    Curve,
    FunctionalGroup,
    Grid,
    derivative_augment,
    integrate,
    read_groups_csv,
    write_groups_csv,
)
from .classify import (
    METHODS,
    ClassifierConfig,
    Prediction,
    TrainedModel,
    functional_depth_fm,
    functional_depth_rp,
    predict,
    predict_batch,
    predict_maxdepth,
    predict_rmd,
    predict_vom,
    rp_directions,
    train,
)
from .errors import (
    ConvergenceError,
    CsvFormatError,
    DegenerateDataError,
    InvalidCovarianceError,
    SingularScatterError,
    UnsupportedParameterError,
)
from .experiment import ExperimentResult, ExperimentSpec, emit_diagnostics, run_experiment
from .outlyingness import (
    OutlyingnessSummary,
    ReferenceFrame,
    check_transformation_invariance,
    pointwise_outlyingness,
    reference_frame,
    summarize,
    summarize_values,
)
from .pointwise import (
    geometric_median,
    mahalanobis_depth,
    random_tukey_depth,
    tukey_depth_1d,
)
from .robust import McdFit, c_step, consistency_factor, default_h, mcd_fit, rmd
from .simulate import (
    BivariateMaternCov,
    GeneratorSpec,
    SquaredExponentialCov,
    bessel_k,
    default_grid,
    derivative_dataset,
    generate,
    joint_covariance,
    matern,
    matern_matrix,
    sample_gp,
)

__version__ = "0.1.0"
