"""Tone-reservation design of flat-envelope OFDM radar pulses."""

from .errors import ConfigError, DimensionError, NumericalError, UndefinedMetricError
from .model import (
    BasebandSignal,
    FourierOperator,
    SymbolMatrix,
    WaveformParams,
    cve,
    papr_real,
    pmepr,
    pmepr_cve_bound,
    synthesize,
)
from .radar import (
    AmbiguityGrid,
    DetectionConfig,
    ambiguity_function,
    chu_code,
    detection_probability,
    detection_threshold,
    matched_filter,
)
from .reservation import (
    FixedPart,
    ReservationPlan,
    apply_reserved,
    build_fixed_part,
    pinv_apply,
    update_beta_theta,
)
from .solvers import (
    SolverConfig,
    SolverTrace,
    solve,
    solve_batch,
    solve_tr_cve,
    solve_tr_e4,
    solve_tr_max,
)

__version__ = "0.1.0"
