"""Reference DenseNet201 feature trunk.

The trunk is the convolutional body of torchvision's DenseNet201 followed
by the final ReLU — the activation tap used as the image descriptor — and
maps (N,3,128,128) to (N,1920,4,4). Weights come either from the published
ImageNet checkpoint or from a seeded random initialization for environments
without checkpoint access; both are frozen (eval mode, no grad).
"""

from __future__ import annotations

import torch
from torch import nn
from torchvision import models

FEATURE_CHANNELS = 1920
INPUT_SIZE = 128


class FeatureTrunk(nn.Module):
    """DenseNet201 convolutional body + final ReLU, no pooling or head."""

    def __init__(self, features: nn.Module):
        super().__init__()
        self.features = features

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return torch.relu(self.features(x))


def _randomize(model: nn.Module, seed: int) -> None:
    """Deterministically re-draw parameters and batch-norm statistics."""
    generator = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for param in model.parameters():
            if param.ndim > 1:
                nn.init.kaiming_uniform_(param, a=5 ** 0.5, generator=generator)
            else:
                param.uniform_(-0.1, 0.1, generator=generator)
        for module in model.modules():
            if isinstance(module, nn.BatchNorm2d):
                module.running_mean.normal_(0.0, 0.5, generator=generator)
                module.running_var.uniform_(0.5, 1.5, generator=generator)


def build_reference(weights: str = "imagenet", seed: int = 0) -> FeatureTrunk:
    """Construct the frozen reference trunk.

    Args:
        weights: "imagenet" downloads the published checkpoint;
            "random" draws a seeded initialization instead (for offline
            use — parity tests are weight-agnostic).
        seed: generator seed for the "random" mode.

    Raises:
        ValueError: unknown weights mode.
        RuntimeError: checkpoint download failed (imagenet mode offline).
    """
    if weights == "imagenet":
        base = models.densenet201(weights=models.DenseNet201_Weights.IMAGENET1K_V1)
    elif weights == "random":
        base = models.densenet201(weights=None)
        _randomize(base, seed)
    else:
        raise ValueError(f"weights must be 'imagenet' or 'random', got {weights!r}")
    trunk = FeatureTrunk(base.features)
    trunk.eval()
    for param in trunk.parameters():
        param.requires_grad_(False)
    return trunk
