"""Python bindings for the resilience core library."""

from ._core import (
    ResilienceError,
    categorize_cf,
    categorize_fb,
    categorize_kp,
    fb_value,
    implied_dr,
    mfpca,
    oracle_eigen,
    paper_loadings,
    pca,
    pooled_t,
    pv,
    ufpca,
    welch_test,
)

__version__ = "0.1.0"

__all__ = [
    "ResilienceError",
    "categorize_cf",
    "categorize_fb",
    "categorize_kp",
    "fb_value",
    "implied_dr",
    "mfpca",
    "oracle_eigen",
    "paper_loadings",
    "pca",
    "pooled_t",
    "pv",
    "ufpca",
    "welch_test",
]
