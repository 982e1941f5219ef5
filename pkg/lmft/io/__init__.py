from .series_io import (
    read_csv,
    read_json,
    read_manifest,
    write_csv,
    write_rows,
    write_features,
    write_json,
)
from .config import ExperimentConfig, component_seed, load_config, parse_config
