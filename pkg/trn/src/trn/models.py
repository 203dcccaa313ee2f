"""Generator (U-Net) and critic networks.

The generator consumes a stack of ``m`` distorted frames concatenated along
the channel axis and emits one restored image of the same spatial size. Its
contracting path has ``depth + 1`` convolutional blocks with max-pooling
after all but the deepest; the expanding path has ``depth`` deconvolutional
blocks. The pooled features of the deepest contracting block are
concatenated with the bottleneck output, and each expanding block's output
is concatenated with the pooled features at its resolution.

The critic is a plain convolutional net: strided conv layers followed by a
fully connected scalar head with no output nonlinearity.
"""

import torch
from torch import nn
from torch.nn import functional as F

LEAKY_SLOPE = 0.2


class SpatialInstanceNorm(nn.Module):
    """Instance normalization that passes 1x1 feature maps through unchanged.

    Desk-scale inputs can reach a 1x1 bottleneck where per-map statistics
    are undefined; full-scale behavior is ordinary instance normalization.
    """

    def forward(self, x):
        if x.shape[-2] * x.shape[-1] == 1:
            return x
        return F.instance_norm(x, eps=1e-5)


def _conv_block(in_ch: int, out_ch: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, kernel_size=3, padding=1),
        nn.LeakyReLU(LEAKY_SLOPE),
        SpatialInstanceNorm(),
    )


def _deconv_block(in_ch: int, out_ch: int) -> nn.Sequential:
    return nn.Sequential(
        nn.ConvTranspose2d(in_ch, out_ch, kernel_size=4, stride=2, padding=1),
        nn.LeakyReLU(LEAKY_SLOPE),
        SpatialInstanceNorm(),
    )


def channel_schedule(base: int, depth: int, cap_factor: int = 16) -> list[int]:
    """Monotone doubling widths for the contracting path, capped at ``base * cap_factor``."""
    return [min(base * 2**i, base * cap_factor) for i in range(depth + 1)]


class Generator(nn.Module):
    """U-Net restorer: frame stack in, same-size image out.

    Spatial dimensions must be divisible by ``2 ** depth``.
    """

    def __init__(self, in_channels: int, out_channels: int, base_channels: int = 16,
                 depth: int = 6):
        super().__init__()
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.depth = depth
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.base_channels = base_channels
        widths = channel_schedule(base_channels, depth)
        self.widths = widths

        enc = []
        prev = in_channels
        for width in widths:
            enc.append(_conv_block(prev, width))
            prev = width
        self.enc_blocks = nn.ModuleList(enc)
        self.pool = nn.MaxPool2d(2)

        dec = []
        prev = widths[depth - 1] + widths[depth]  # deepest skip + bottleneck
        for j in range(depth):
            out = widths[depth - 1 - j]
            dec.append(_deconv_block(prev, out))
            skip = depth - 2 - j
            prev = out + (widths[skip] if skip >= 0 else 0)
        self.dec_blocks = nn.ModuleList(dec)
        self.head = nn.Conv2d(widths[0], out_channels, kernel_size=3, padding=1)

    def forward(self, x):
        if x.shape[-1] % 2**self.depth or x.shape[-2] % 2**self.depth:
            raise ValueError(
                f"spatial size {tuple(x.shape[-2:])} not divisible by {2 ** self.depth}"
            )
        skips = []
        for i, block in enumerate(self.enc_blocks):
            x = block(x)
            if i < self.depth:
                x = self.pool(x)
                skips.append(x)
        x = torch.cat([skips[-1], x], dim=1)
        for j, block in enumerate(self.dec_blocks):
            x = block(x)
            skip = self.depth - 2 - j
            if skip >= 0:
                x = torch.cat([skips[skip], x], dim=1)
        return self.head(x)


class Critic(nn.Module):
    """Convolutional Wasserstein critic with a scalar linear head."""

    def __init__(self, in_channels: int, base_channels: int = 16, n_layers: int = 6):
        super().__init__()
        layers = []
        prev = in_channels
        width = base_channels
        for i in range(n_layers):
            # kernel 3 / stride 2 halves (rounding up), so tiny inputs survive
            layers.append(nn.Conv2d(prev, width, kernel_size=3, stride=2, padding=1))
            layers.append(nn.ReLU())
            if i > 0:
                layers.append(SpatialInstanceNorm())
            prev = width
            width = min(width * 2, base_channels * 8)
        self.features = nn.Sequential(*layers)
        self.head = nn.Linear(prev, 1)

    def forward(self, x):
        feats = self.features(x)
        pooled = F.adaptive_avg_pool2d(feats, 1).flatten(1)
        return self.head(pooled).squeeze(1)


def clip_weights(module: nn.Module, bound: float) -> None:
    """Clamp every parameter into ``[-bound, bound]`` in place."""
    with torch.no_grad():
        for param in module.parameters():
            param.clamp_(-bound, bound)
