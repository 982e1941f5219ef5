import os
import numpy as np
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple
from lmft.evaluation import ConfusionMatrix, DistanceTable, metrics, nn1_classify
from lmft.io import read_csv, read_manifest, write_csv, write_features, write_json, write_rows
from lmft.io.config import ExperimentConfig, component_seed
from lmft.pipeline import FeatureSeries, TimeSeries, extract, loess, nw_smooth
from lmft.synth import gen_labeled_segments, gen_variable_noise, gen_variable_period
from lmft.utils.errors import ValidationError
from lmft.utils.logging import logger
from lmft.utils.version import RunMetadata


@dataclass
class RunArtifacts:
    """In-memory results of a run; ``write`` puts them on disk under the output prefix."""

    prefix: str
    metrics: Dict[str, Any] = field(default_factory=dict)
    series: Optional[TimeSeries] = None
    features: Optional[FeatureSeries] = None
    smoothed: Optional[TimeSeries] = None
    neighbors: Optional[List[Dict[str, Any]]] = None
    distance_table: Optional[DistanceTable] = None

    def write(self) -> List[str]:
        written = []
        if self.series is not None:
            written.append(write_csv(self.series, f"{self.prefix}.series.csv"))
        if self.features is not None:
            written.extend(write_features(self.features, self.prefix))
        if self.smoothed is not None:
            written.append(write_csv(self.smoothed, f"{self.prefix}.smoothed.csv"))
        if self.neighbors is not None:
            written.append(write_rows(self.neighbors, f"{self.prefix}.neighbors.csv"))
        written.append(write_json(self.metrics, f"{self.prefix}.metrics.json"))
        return written


def load_series(config: ExperimentConfig) -> Tuple[TimeSeries, bool]:
    """The single series a config points at, and whether it was generated."""
    data = config.data
    if data.path is not None:
        return read_csv(data.path), False
    generator = data.generator
    seed = component_seed(config.rng_seed, "synth")
    match generator.kind:
        case "variable_noise":
            return gen_variable_noise(seed, generator.n or 1000), True
        case "variable_period":
            return gen_variable_period(seed, generator.n or 1001), True
    raise ValidationError(f"{generator.kind} is a labeled corpus, not a single series")


def load_corpus(config: ExperimentConfig) -> Tuple[List[Tuple[TimeSeries, str]], List[Tuple[TimeSeries, str]]]:
    """(train, test) lists of (series, label)."""
    data = config.data
    if data.manifest is not None:
        train, test = [], []
        for path, label, split in read_manifest(data.manifest):
            (train if split == "train" else test).append((read_csv(path), label))
        return train, test

    generator = data.generator
    corpus = gen_labeled_segments([c.to_spec() for c in generator.classes], generator.per_class,
                                  generator.seg_len, component_seed(config.rng_seed, "synth"))
    n_test = int(round(generator.per_class * generator.test_fraction))
    n_train = generator.per_class - n_test
    train, test = [], []
    for index, item in enumerate(corpus):
        (train if index % generator.per_class < n_train else test).append(item)
    return train, test


def write_corpus(train: List[Tuple[TimeSeries, str]], test: List[Tuple[TimeSeries, str]],
                 directory: str) -> List[str]:
    """One CSV per segment plus a ``manifest.csv`` that a 'manifest' data section can point at."""
    written, rows = [], []
    for split, items in (("train", train), ("test", test)):
        for index, (series, label) in enumerate(items):
            name = f"{split}_{index:04d}.csv"
            written.append(write_csv(series, os.path.join(directory, name)))
            rows.append({"path": name, "label": label, "split": split})
    written.append(write_rows(rows, os.path.join(directory, "manifest.csv")))
    return written


def _smooth(config: ExperimentConfig, features: FeatureSeries) -> TimeSeries:
    kernel = config.smoothing.kernel.to_spec()
    xs, ys = features.query_times, features.features
    if config.smoothing.method == "loess":
        values = loess(xs, ys, kernel, xs)
    else:
        values = nw_smooth(xs, ys, kernel, xs)
    return TimeSeries(xs, values, list(features.feature_names))


def _extract(config: ExperimentConfig, series: TimeSeries, threads: int,
             stride: Optional[int]) -> FeatureSeries:
    return extract(series, config.query.resolve(series.times, stride), config.kernel.to_spec(),
                   config.cov_expr(), config.seed_strategy(), config.fit_options(), threads)


def _feature_metrics(features: FeatureSeries) -> Dict[str, Any]:
    cells = features.diagnostics
    nan_columns = [name for name, column in zip(features.feature_names, features.features.T)
                   if np.all(np.isnan(column))]
    converged = [c for c in cells if not c.failed and c.converged]
    return {
        "n_queries": int(features.query_times.size),
        "n_features": len(features.feature_names),
        "cells": len(cells),
        "failed_cells": len(features.failed_cells),
        "converged_cells": len(converged),
        "unfilled_features": nan_columns,
    }


def classify_corpus(config: ExperimentConfig, train: List[Tuple[TimeSeries, str]],
                    test: List[Tuple[TimeSeries, str]], threads: int,
                    stride: Optional[int] = None
                    ) -> Tuple[Dict[str, Any], List[Dict[str, Any]], DistanceTable]:
    """1NN + DTW on LMFT features (or on the raw series when ``classification.features`` is off)."""
    options = config.classification
    if options is None:
        raise ValidationError("A labeled corpus needs a 'classification' section")
    if not train:
        raise ValidationError("The corpus has no training items")

    def _represent(item: TimeSeries):
        if options.features:
            return _extract(config, item, threads, stride)
        return item

    train_items = [(_represent(item), label) for item, label in train]
    test_items = [_represent(item) for item, _ in test]
    result = nn1_classify(train_items, test_items, scale=options.scale, window=options.window,
                          threads=threads)
    true_labels = [label for _, label in test]
    labels = sorted({label for _, label in train} | set(true_labels))
    cm = ConfusionMatrix.from_predictions(true_labels, result.labels, labels)
    table = DistanceTable(result.distances, [str(label) for _, label in train],
                          [str(label) for label in true_labels], list(result.neighbor_index))
    logger.debug(table.render())
    summary = {"confusion": cm.to_dict(), **metrics(cm, options.positive),
               "n_train": len(train), "n_test": len(test)}
    rows = result.to_rows()
    for row, label in zip(rows, true_labels):
        row["true"] = label
    return summary, rows, table


def run(config: ExperimentConfig, threads: int = 1, stride: Optional[int] = None,
        output: Optional[str] = None) -> RunArtifacts:
    """
    Execute every stage the config asks for: synthesis when the data is generated,
    extraction, smoothing when configured, and classification for labeled corpora.
    Nothing touches the disk until ``RunArtifacts.write``.
    """
    artifacts = RunArtifacts(prefix=output or config.output)
    artifacts.metrics["metadata"] = RunMetadata.local_metadata().to_dict()
    artifacts.metrics["config"] = config.model_dump(mode="json")

    if config.data.is_corpus:
        train, test = load_corpus(config)
        summary, rows, table = classify_corpus(config, train, test, threads, stride)
        artifacts.metrics["classification"] = summary
        artifacts.neighbors = rows
        artifacts.distance_table = table
        logger.event(f"classification accuracy {summary['accuracy']}")
        return artifacts

    series, generated = load_series(config)
    if generated:
        artifacts.series = series
    features = _extract(config, series, threads, stride)
    artifacts.features = features
    artifacts.metrics["extraction"] = _feature_metrics(features)
    if config.smoothing is not None:
        artifacts.smoothed = _smooth(config, features)
        artifacts.metrics["smoothing"] = {"method": config.smoothing.method,
                                          "kernel": config.smoothing.kernel.model_dump(exclude_none=True)}
    if config.classification is not None:
        logger.warning("classification needs a labeled corpus; section ignored for a single series")
    return artifacts
