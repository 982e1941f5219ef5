from .dtw import dtw, dtw_matrix
from .metrics import ConfusionMatrix, metrics
from .classify import (
    DistanceTable,
    NNResult,
    ZScoreResult,
    display_distance_matrix,
    nn1_classify,
    zscore_channels,
)
