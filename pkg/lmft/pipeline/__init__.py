from .series import CellDiagnostics, FeatureSeries, TimeSeries
from .seeding import SeedContext, SeedStrategy, SeedStrategyFactory, SeedVariant
from .transform import (
    extract,
    fit_exemplar,
    lmft_at,
    lmft_predict_at,
    local_problem,
    log2_grid,
)
from .smoothing import loess, nw_smooth
from .stability import DemoFamily, SeedDemoResult, flag_jumps, gradient_descent, seed_demo
