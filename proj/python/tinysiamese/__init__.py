"""TinySiamese: a lightweight verification head over precomputed feature vectors."""

from ._core import (
    BenchReport,
    ClassifyReport,
    Confusion,
    Dataset,
    EpochStat,
    EvalReport,
    FeatureRecord,
    TinyModel,
    __version__,
    bench_matching,
    classify_gallery_probe,
    distance_vector,
    embed,
    evaluate_balanced,
    generate_synthetic,
    init_model,
    load_dataset,
    load_model,
    make_dataset,
    save_dataset,
    save_model,
    score,
    train,
)

__all__ = [
    "BenchReport",
    "ClassifyReport",
    "Confusion",
    "Dataset",
    "EpochStat",
    "EvalReport",
    "FeatureRecord",
    "TinyModel",
    "__version__",
    "bench_matching",
    "classify_gallery_probe",
    "distance_vector",
    "embed",
    "evaluate_balanced",
    "generate_synthetic",
    "init_model",
    "load_dataset",
    "load_model",
    "make_dataset",
    "save_dataset",
    "save_model",
    "score",
    "train",
]
