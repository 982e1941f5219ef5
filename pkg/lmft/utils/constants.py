import lmft
from pathlib import Path

"""
Constants:
    ROOT_DIR (Path): Root directory of the project.
    DROP_THRESHOLD (float): Raw kernel weights below this are dropped from a local fit.
    JITTER_START (float): First diagonal jitter (relative to mean diagonal) tried on Cholesky failure.
    JITTER_MAX (float): Largest relative jitter tried before giving up.
    JITTER_FACTOR (float): Escalation factor between jitter attempts.
    MAX_ITERATIONS (int): Optimizer iteration cap per restart.
    GRADIENT_TOLERANCE (float): Projected-gradient tolerance of the optimizer.
    PARAM_LOWER (float): Lower optimizer bound for any covariance parameter (natural units).
    PARAM_UPPER (float): Upper optimizer bound for any covariance parameter (natural units).
    MULTISEED_COUNT (int): Default number of log-uniform seeds.
    MULTISEED_LO (float): Default lower end of the log-uniform seed range.
    MULTISEED_HI (float): Default upper end of the log-uniform seed range.
    EXEMPLAR_SEED_COUNT (int): Seeds used when fitting an exemplar model.
    CONTRIVED_BANDWIDTH (float): Tricube bandwidth used on the contrived datasets.
    ORACLE_TOLERANCE (float): Tolerance of the lemma / theorem replication checks.
    COROLLARY_TOLERANCE (float): Tolerance of the multi-weight replication check.
    ORACLE_INSTANCES (int): Default number of random oracle instances.
    COROLLARY_INSTANCES (int): Default number of random corollary instances.
    JUMP_FACTOR (float): Adjacent-difference multiple of the median that flags a jump.
    CONFIG_SCHEMA_VERSION (int): Version of the experiment config schema.
    EXIT_OK (int): CLI exit code on success.
    EXIT_VALIDATION (int): CLI exit code on validation errors.
    EXIT_NUMERICAL (int): CLI exit code on numerical failures.
    CSV_FLOAT_FORMAT (str): Float format giving lossless CSV round-trips.

"""

ROOT_DIR = Path(lmft.__file__).parent.parent
DROP_THRESHOLD = 1e-12
JITTER_START = 1e-10
JITTER_MAX = 1e-4
JITTER_FACTOR = 10.0
MAX_ITERATIONS = 200
GRADIENT_TOLERANCE = 1e-6
PARAM_LOWER = 1e-12
PARAM_UPPER = 1e12
MULTISEED_COUNT = 100
MULTISEED_LO = 1e-10
MULTISEED_HI = 1e10
EXEMPLAR_SEED_COUNT = 400
CONTRIVED_BANDWIDTH = 120.0
ORACLE_TOLERANCE = 1e-9
COROLLARY_TOLERANCE = 1e-8
ORACLE_INSTANCES = 1000
COROLLARY_INSTANCES = 200
JUMP_FACTOR = 10.0
CONFIG_SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
CSV_FLOAT_FORMAT = "%.17g"
