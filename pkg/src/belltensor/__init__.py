"""Numerical toolkit for two-setting full-correlation Bell inequalities on
multiqubit states, centered on the generalized GHZ family."""

from .errors import (
    BisectionError,
    CapacityError,
    NumericalIntegrityError,
    ParameterError,
    PostselectionError,
)
from .frames import (
    CriterionResult,
    CVectors,
    EulerAngles,
    EvenWitness,
    FrameSet,
    OptimizerConfig,
    Rotation3,
    best_c,
    euler_to_rotation,
    even_violation_frames,
    full_norm_squared,
    maximize_criterion,
    maximize_sum_squares,
    rotate_tensor,
    sector_sum_squares,
    tmod_value,
    xy_sector,
)
from .functionals import (
    BellResult,
    CorrelationTable,
    MeasurementSettings,
    chsh,
    conditional_chsh,
    correlation_table,
    expectation,
    mabk,
    mabk_coefficients,
    optimize_settings,
    wwzb,
)
from .oracle import (
    DeterministicStrategy,
    InequalityRecord,
    SignTensor,
    enumerate_inequalities,
    lhv_member,
    local_bound,
    max_over_strategies,
    strategies,
    strategy_table,
)
from .scan import ScanConfig, ScanReport, ScanRow, bisect_threshold, run_scan
from .states import (
    CorrelationTensor,
    DensityMatrix,
    GhzParams,
    StateVector,
    analytic_ghz_tensor,
    correlation_tensor,
    density_of,
    make_ghz,
    postselect_primed,
    postselection_probability,
    reduce,
)
from .version import __version__

__all__ = [name for name in dir() if not name.startswith("_")]
