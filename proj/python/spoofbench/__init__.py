"""Python bindings for the spoofbench C++ core."""

from ._core import (
    DataError,
    InvalidArgument,
    Minutia,
    MinutiaKind,
    ProtocolError,
    complete_link,
    detect_minutiae,
    extract_patch,
    featurize,
    kmeans,
    pearson,
    synth_fingerprint,
    tdr_at_fdr,
    tsne,
)

__all__ = [
    "DataError",
    "InvalidArgument",
    "Minutia",
    "MinutiaKind",
    "ProtocolError",
    "complete_link",
    "detect_minutiae",
    "extract_patch",
    "featurize",
    "kmeans",
    "pearson",
    "synth_fingerprint",
    "tdr_at_fdr",
    "tsne",
]
