"""Multilevel image thresholding with an electromagnetism-like optimizer."""
__version__ = "0.1.0"

from ._backend import BACKEND
from .emo import EmoParams, OptResult, maximize, optimize
from .image_io import (
    Histogram,
    ImageFormatError,
    ProbDist,
    RasterImage,
    add_gaussian_noise,
    add_salt_pepper,
    build_histogram,
    load_histogram_file,
    load_image,
    normalize,
    save_histogram_file,
    save_image,
)
from .objectives import ObjectiveKind, evaluate, kapur_objective, otsu_objective, repair
from .oracle import OracleResult, exhaustive_search
from .segmentation import classify, psnr, rmse, segment_channel, segment_image
from .stats import aggregate_runs, run_std, wilcoxon_rank_sum

__all__ = [
    "BACKEND",
    "EmoParams",
    "Histogram",
    "ImageFormatError",
    "ObjectiveKind",
    "OptResult",
    "OracleResult",
    "ProbDist",
    "RasterImage",
    "add_gaussian_noise",
    "add_salt_pepper",
    "aggregate_runs",
    "build_histogram",
    "classify",
    "evaluate",
    "exhaustive_search",
    "kapur_objective",
    "load_histogram_file",
    "load_image",
    "maximize",
    "normalize",
    "optimize",
    "otsu_objective",
    "psnr",
    "repair",
    "rmse",
    "run_std",
    "save_histogram_file",
    "save_image",
    "segment_channel",
    "segment_image",
    "wilcoxon_rank_sum",
]
