"""Toy-scale multiframe WGAN-l1 restoration trainer."""

from .losses import critic_loss, generator_loss, gradient_penalty
from .models import Critic, Generator, clip_weights
from .restore import restore
from .tensorio import TensorFormatError, read_manifest, read_tensor, write_tensor
from .train import TrainParams, fit_depth, load_generator, train

__version__ = "0.1.0"

__all__ = [
    "Critic",
    "Generator",
    "TensorFormatError",
    "TrainParams",
    "clip_weights",
    "critic_loss",
    "fit_depth",
    "generator_loss",
    "gradient_penalty",
    "load_generator",
    "read_manifest",
    "read_tensor",
    "restore",
    "train",
    "write_tensor",
]
