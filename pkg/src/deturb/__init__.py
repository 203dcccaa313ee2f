"""Turbulence distortion synthesis, lucky-frame subsampling, fusion and metrics."""

from .image import (
    Kernel1D,
    VectorField,
    as_frames,
    as_image,
    convolve_separable,
    gaussian_kernel,
    laplacian,
    resize,
    to_grayscale,
    warp,
)
from .io import read_frame_dir, read_image, write_image
from .metrics import MetricReport, psnr, report, sharpness, ssim
from .simulate import SequenceSpec, SimParams, distort_blur, gen_sequence, gen_vector_field
from .subsample import (
    SubsampleParams,
    SubsampleResult,
    brute_force_subsample_step,
    energy,
    fuse,
    quality_measure,
    select_subset,
    subsample,
)
from .tensorfile import TensorFormatError, read_tensor, write_tensor
from .dataset import DatasetConfig, build_dataset, load_config, subsample_to_tensor

__version__ = "0.1.0"

__all__ = [
    "Kernel1D",
    "VectorField",
    "as_frames",
    "as_image",
    "convolve_separable",
    "gaussian_kernel",
    "laplacian",
    "resize",
    "to_grayscale",
    "warp",
    "read_frame_dir",
    "read_image",
    "write_image",
    "MetricReport",
    "psnr",
    "report",
    "sharpness",
    "ssim",
    "SequenceSpec",
    "SimParams",
    "distort_blur",
    "gen_sequence",
    "gen_vector_field",
    "SubsampleParams",
    "SubsampleResult",
    "brute_force_subsample_step",
    "energy",
    "fuse",
    "quality_measure",
    "select_subset",
    "subsample",
    "TensorFormatError",
    "read_tensor",
    "write_tensor",
    "DatasetConfig",
    "build_dataset",
    "load_config",
    "subsample_to_tensor",
    "__version__",
]
