"""Adversarial and reconstruction losses for the restoration trainer."""

import torch


def generator_loss(critic_scores, restored, target, l1_weight: float):
    """Negated critic mean plus weighted mean absolute reconstruction error."""
    if restored.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(restored.shape)} vs {tuple(target.shape)}")
    adversarial = -critic_scores.mean()
    l1 = torch.mean(torch.abs(target - restored))
    return adversarial + l1_weight * l1


def gradient_penalty(critic, real, fake):
    """Squared deviation of the critic's gradient norm from 1 at random interpolates.

    One fresh uniform mixing coefficient per sample. Nonnegative by
    construction; exactly zero iff the gradient has unit norm.
    """
    if real.shape != fake.shape:
        raise ValueError(f"shape mismatch: {tuple(real.shape)} vs {tuple(fake.shape)}")
    alpha = torch.rand(real.size(0), 1, 1, 1, device=real.device, dtype=real.dtype)
    interp = (alpha * real + (1.0 - alpha) * fake).detach().requires_grad_(True)
    scores = critic(interp)
    if scores.grad_fn is None:  # constant critic: zero gradient everywhere
        grads = torch.zeros_like(interp)
    else:
        grads = torch.autograd.grad(
            scores.sum(), interp, create_graph=True, allow_unused=True
        )[0]
        if grads is None:  # critic ignores its input
            grads = torch.zeros_like(interp)
    norms = grads.flatten(1).norm(2, dim=1)
    return ((norms - 1.0) ** 2).mean()


def critic_loss(real, fake, critic, gp_weight: float):
    """Wasserstein estimate ``D(fake) - D(real)`` plus the gradient penalty."""
    if real.shape != fake.shape:
        raise ValueError(f"shape mismatch: {tuple(real.shape)} vs {tuple(fake.shape)}")
    return (
        critic(fake).mean()
        - critic(real).mean()
        + gp_weight * gradient_penalty(critic, real, fake)
    )
