"""Least-squares adversarial, cycle-consistency and joint objectives."""

from __future__ import annotations

from .. import numerics as nx
from ..numerics import Tensor


def lsgan_losses(d_real: Tensor, d_fake: Tensor) -> tuple[Tensor, Tensor]:
    """Return ``(loss_D, loss_G_adv)``.

    loss_D pushes real scores to 1 and fake scores to 0; loss_G_adv pushes
    fake scores to 1. Expectations are means over the patch map.
    """
    loss_d = nx.mean(nx.square(d_real - 1.0)) + nx.mean(nx.square(d_fake))
    loss_g = nx.mean(nx.square(d_fake - 1.0))
    return loss_d, loss_g


def cycle_consistency_loss(x: Tensor, f_of_g_x: Tensor, y: Tensor, g_of_f_y: Tensor) -> Tensor:
    """Mean absolute forward-cycle error plus mean absolute backward-cycle error."""
    if f_of_g_x.shape != x.shape:
        raise ValueError(f"forward cycle shape {f_of_g_x.shape} differs from input {x.shape}")
    if g_of_f_y.shape != y.shape:
        raise ValueError(f"backward cycle shape {g_of_f_y.shape} differs from input {y.shape}")
    return nx.mean(nx.abs(f_of_g_x - x)) + nx.mean(nx.abs(g_of_f_y - y))


def total_loss(adv_g, adv_f, cyc, lambda_cyc: float = 10.0):
    """Joint generator objective ``adv_g + adv_f + lambda_cyc * cyc``.

    Works on tensors (for backprop) or plain floats (for bookkeeping).
    """
    if lambda_cyc < 0:
        raise ValueError(f"lambda_cyc must be nonnegative, got {lambda_cyc}")
    return adv_g + adv_f + cyc * lambda_cyc
