from .binning import QuantileBins, quantile_bins
from .io import (
    Dataset,
    ParseError,
    load_dataset,
    read_labels_csv,
    read_manifest,
    read_series_csv,
    write_dataset,
    write_labels_csv,
    write_manifest,
    write_series_csv,
)
from .series import (
    GENERATOR_EPOCH,
    AnomalyClass,
    DatasetManifest,
    LabelRecord,
    LabelSource,
    MultivariateSeries,
    SnippetRange,
    slice_series,
    znormalize,
)

__all__ = [
    "AnomalyClass",
    "Dataset",
    "DatasetManifest",
    "GENERATOR_EPOCH",
    "LabelRecord",
    "LabelSource",
    "MultivariateSeries",
    "ParseError",
    "QuantileBins",
    "SnippetRange",
    "load_dataset",
    "quantile_bins",
    "read_labels_csv",
    "read_manifest",
    "read_series_csv",
    "slice_series",
    "write_dataset",
    "write_labels_csv",
    "write_manifest",
    "write_series_csv",
    "znormalize",
]
