"""Python bindings for the vstemma C++ core."""

from ._core import (
    Clustering,
    InputError,
    NumericalError,
    __version__,
    cer,
    diacritics_cer,
    distribution_distance,
    edit_operations,
    embed_patch,
    generate_tradition,
    hungarian_match,
    kmeans,
    letter_distribution,
    levenshtein,
    manuscript_distance,
    neighbor_joining,
    normalize_text,
    otsu_threshold,
    read_distances,
    render_page,
    robinson_foulds,
    run_pipeline,
    segment_page,
    spearman,
    tree_distances,
    upgma,
    write_synthetic_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
