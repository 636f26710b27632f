"""Self-excited Hawkes process model of cascade popularity."""
from .cascades import (
    Cascade,
    CascadeFormatError,
    FilterCriteria,
    SehpParams,
    filter_cascades,
    parse_cascades,
    read_cascades,
    write_cascades,
)
from .estimation import FitConfig, FitError, FitResult, UnfittableCascadeError, default_initialization, fit
from .evaluation import MetricsReport, accuracy, horizon_sweep, mape
from .intensity import IntensityContext, compensator, rate
from .likelihood import LogLikResult, log_likelihood, log_likelihood_quadrature
from .prediction import PredictionSeries, expected_new_events, predict, predict_series
from .simulation import SimConfig, simulate, simulate_corpus

__version__ = "0.1.0"
