"""Particle-distance adversarial losses computed in discriminator feature space.

With e_D(a, b) = e(D(a), D(b)):

    loss_G = -2 mean e_D(x, G(z)) + mean_{j != j'} e_D(G(z_j), G(z_j'))
    loss_D = -2 mean e_D(x, G(z)) + mean_{i != i'} e_D(x_i, x_i')
                                  + mean_{j != j'} e_D(G(z_j), G(z_j'))

The discriminator maximizes loss_D; the stabilized variant replaces e by
e - eps * s in the discriminator loss only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from src.framework.core.exceptions import ConfigError, ShapeMismatchError
from src.framework.core.kernels import KernelSpec, grad_sum, pairwise
from src.framework.nn.mlp import MlpModel, Params

FloatArray = NDArray[np.float64]


@dataclass
class LossResult:
    """Loss value with parameter gradients for the model being trained.

    ``sample_grads`` holds dLoss/dG(z) for generator losses.
    """

    value: float
    grads: Params
    sample_grads: FloatArray | None = None

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.value)) and all(
            np.all(np.isfinite(g)) for g in self.grads.values()
        )


def _cross_mean(k: KernelSpec, a: FloatArray, b: FloatArray, matched: bool) -> float:
    if matched:
        if a.shape != b.shape:
            raise ShapeMismatchError("matched pairs need equal batches", a.shape, b.shape)
        n = a.shape[0]
        if n < 2:
            return 0.0
        return float(pairwise(k, a, b, exclude_diagonal=True).sum()) / (n * (n - 1))
    return float(pairwise(k, a, b).mean())


def _cross_grad(k: KernelSpec, a: FloatArray, b: FloatArray, matched: bool) -> FloatArray:
    """d/da of mean e(a_i, b_j), using symmetry of e."""
    if matched:
        n = a.shape[0]
        if n < 2:
            return np.zeros_like(a)
        return grad_sum(k, a, b, exclude_diagonal=True) / (n * (n - 1))
    return grad_sum(k, a, b) / (a.shape[0] * b.shape[0])


def _self_mean(k: KernelSpec, a: FloatArray) -> float:
    n = a.shape[0]
    if n < 2:
        return 0.0
    return float(pairwise(k, a, a, exclude_diagonal=True).sum()) / (n * (n - 1))


def _self_grad(k: KernelSpec, a: FloatArray) -> FloatArray:
    """d/da of the diagonal-excluded self mean (each pair appears twice)."""
    n = a.shape[0]
    if n < 2:
        return np.zeros_like(a)
    return 2.0 * grad_sum(k, a, a, exclude_diagonal=True) / (n * (n - 1))


def _sum_grads(first: Params, second: Params) -> Params:
    return {name: first[name] + second[name] for name in first}


def loss_G(
    D: MlpModel,
    G: MlpModel,
    data_batch: FloatArray,
    latent_batch: FloatArray,
    k: KernelSpec,
) -> LossResult:
    """Generator loss and its gradients with respect to G (D frozen)."""
    fake, g_cache = G.forward_with_cache(latent_batch)
    fx = D.forward(data_batch)
    fg, d_cache = D.forward_with_cache(fake)
    value = -2.0 * _cross_mean(k, fx, fg, False) + _self_mean(k, fg)
    feature_grad = -2.0 * _cross_grad(k, fg, fx, False) + _self_grad(k, fg)
    _, sample_grads = D.backward(fake, feature_grad, d_cache)
    g_grads, _ = G.backward(latent_batch, sample_grads, g_cache)
    return LossResult(value, g_grads, sample_grads)


def loss_D(
    D: MlpModel,
    G: MlpModel,
    data_batch: FloatArray,
    latent_batch: FloatArray,
    k: KernelSpec,
    matched_pairs: bool = False,
) -> LossResult:
    """Discriminator loss (to be maximized) and its gradients with respect to D.

    Args:
        D: Discriminator (feature map).
        G: Generator, frozen.
        data_batch: Real samples.
        latent_batch: Latent codes.
        k: Loss kernel.
        matched_pairs: Exclude index-matched cross pairs (equal batches).

    Returns:
        Loss value and D parameter gradients.
    """
    fake = G.forward(latent_batch)
    fx, x_cache = D.forward_with_cache(data_batch)
    fg, f_cache = D.forward_with_cache(fake)
    value = (
        -2.0 * _cross_mean(k, fx, fg, matched_pairs) + _self_mean(k, fx) + _self_mean(k, fg)
    )
    grad_fx = -2.0 * _cross_grad(k, fx, fg, matched_pairs) + _self_grad(k, fx)
    grad_fg = -2.0 * _cross_grad(k, fg, fx, matched_pairs) + _self_grad(k, fg)
    real_grads, _ = D.backward(data_batch, grad_fx, x_cache)
    fake_grads, _ = D.backward(fake, grad_fg, f_cache)
    return LossResult(value, _sum_grads(real_grads, fake_grads))


def loss_D_stabilized(
    D: MlpModel,
    G: MlpModel,
    data_batch: FloatArray,
    latent_batch: FloatArray,
    k: KernelSpec,
    s: KernelSpec,
    epsilon: float,
    matched_pairs: bool = False,
) -> LossResult:
    """Discriminator loss with the kernel e - epsilon * s."""
    if epsilon < 0:
        raise ConfigError("epsilon must be non-negative", field="epsilon")
    base = loss_D(D, G, data_batch, latent_batch, k, matched_pairs)
    if epsilon == 0:
        return base
    stab = loss_D(D, G, data_batch, latent_batch, s, matched_pairs)
    grads = {name: base.grads[name] - epsilon * stab.grads[name] for name in base.grads}
    return LossResult(base.value - epsilon * stab.value, grads)
