"""Spectral merger clustering of multichannel time series."""

from ._core import (
    MergeTrace,
    SmcError,
    affinity,
    ar2_coefficients,
    cluster,
    cluster_epochs,
    complete_linkage,
    gcv_score,
    gcv_select_bandwidth,
    periodogram,
    select_k,
    sim_index,
    simulate_ar2,
    simulate_design,
    smoothed_periodogram,
    squared_coherence,
    summarize_epochs,
    tvd,
)

__all__ = [
    "MergeTrace",
    "SmcError",
    "affinity",
    "ar2_coefficients",
    "cluster",
    "cluster_epochs",
    "complete_linkage",
    "gcv_score",
    "gcv_select_bandwidth",
    "periodogram",
    "select_k",
    "sim_index",
    "simulate_ar2",
    "simulate_design",
    "smoothed_periodogram",
    "squared_coherence",
    "summarize_epochs",
    "tvd",
]
