"""Subgraph concept network: generation, training, evaluation, explanation."""

from ._scnet import (
    evaluate,
    explain,
    generate,
    load_dataset,
    load_tudataset,
    predict,
    save_dataset,
    train,
)

__all__ = [
    "evaluate",
    "explain",
    "generate",
    "load_dataset",
    "load_tudataset",
    "predict",
    "save_dataset",
    "train",
]
