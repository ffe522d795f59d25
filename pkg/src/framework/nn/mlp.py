"""Fully connected networks with exact reverse-mode gradients.

Layers are affine maps ``a @ W + b`` followed by LeakyReLU on every layer
except the last, which is linear (or tanh when configured). ``backward``
returns gradients with respect to the parameters and to the inputs, so a
generator can be trained through a frozen discriminator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray

from src.framework.core.exceptions import ConfigError, ShapeMismatchError

logger = structlog.get_logger(__name__)

FloatArray = NDArray[np.float64]
Params = dict[str, FloatArray]

CHECKPOINT_FORMAT = "flowlab-mlp"
CHECKPOINT_VERSION = 1


class OutputActivation(str, Enum):
    LINEAR = "linear"
    TANH = "tanh"


@dataclass
class ForwardCache:
    """Layer inputs and pre-activations recorded by a forward pass."""

    inputs: list[FloatArray] = field(default_factory=list)
    preacts: list[FloatArray] = field(default_factory=list)


@dataclass
class MlpModel:
    """Multilayer perceptron.

    Attributes:
        layer_dims: Widths from input to output, e.g. [2, 100, 50, 16].
        params: Weights ``W{i}`` of shape (d_in, d_out) and biases ``b{i}``.
        slope: LeakyReLU negative slope, in (0, 1).
        use_bias: Whether biases are part of the parameter set.
        output: Activation of the last layer.
    """

    layer_dims: list[int]
    params: Params
    slope: float = 0.2
    use_bias: bool = True
    output: OutputActivation = OutputActivation.LINEAR

    def __post_init__(self) -> None:
        if len(self.layer_dims) < 2 or any(d < 1 for d in self.layer_dims):
            raise ConfigError("layer_dims needs at least two positive widths", field="layer_dims")
        if not 0 < self.slope < 1:
            raise ConfigError("LeakyReLU slope must lie in (0, 1)", field="slope")
        for i, (d_in, d_out) in enumerate(zip(self.layer_dims[:-1], self.layer_dims[1:])):
            w = self.params.get(f"W{i}")
            if w is None or w.shape != (d_in, d_out):
                raise ShapeMismatchError(
                    f"W{i} does not match layer dims",
                    (d_in, d_out),
                    () if w is None else w.shape,
                )
            b = self.params.get(f"b{i}")
            if self.use_bias and (b is None or b.shape != (d_out,)):
                raise ShapeMismatchError(
                    f"b{i} does not match layer dims", (d_out,), () if b is None else b.shape
                )

    @classmethod
    def init(
        cls,
        layer_dims: list[int],
        rng: np.random.Generator,
        slope: float = 0.2,
        use_bias: bool = True,
        output: OutputActivation = OutputActivation.LINEAR,
    ) -> MlpModel:
        """Weights uniform in +-1/sqrt(fan_in), zero biases."""
        params: Params = {}
        for i, (d_in, d_out) in enumerate(zip(layer_dims[:-1], layer_dims[1:])):
            bound = 1.0 / np.sqrt(d_in)
            params[f"W{i}"] = rng.uniform(-bound, bound, size=(d_in, d_out))
            if use_bias:
                params[f"b{i}"] = np.zeros(d_out)
        return cls(list(layer_dims), params, slope, use_bias, output)

    @classmethod
    def from_arrays(
        cls,
        weights: list[ArrayLike],
        biases: list[ArrayLike] | None = None,
        slope: float = 0.2,
        output: OutputActivation = OutputActivation.LINEAR,
    ) -> MlpModel:
        ws = [np.array(w, dtype=np.float64) for w in weights]
        dims = [ws[0].shape[0]] + [w.shape[1] for w in ws]
        params: Params = {f"W{i}": w for i, w in enumerate(ws)}
        if biases is not None:
            for i, b in enumerate(biases):
                params[f"b{i}"] = np.array(b, dtype=np.float64)
        return cls(dims, params, slope, biases is not None, output)

    @property
    def n_layers(self) -> int:
        return len(self.layer_dims) - 1

    def parameters(self) -> Params:
        """Name-ordered parameter mapping (W0, b0, W1, b1, ...)."""
        return self.params

    def copy(self) -> MlpModel:
        return MlpModel(
            list(self.layer_dims),
            {name: p.copy() for name, p in self.params.items()},
            self.slope,
            self.use_bias,
            self.output,
        )

    def _check_input(self, batch: FloatArray) -> FloatArray:
        x = np.asarray(batch, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.layer_dims[0]:
            raise ShapeMismatchError("input width mismatch", (None, self.layer_dims[0]), x.shape)
        return x

    def forward_with_cache(self, batch: ArrayLike) -> tuple[FloatArray, ForwardCache]:
        a = self._check_input(np.asarray(batch, dtype=np.float64))
        cache = ForwardCache()
        for i in range(self.n_layers):
            cache.inputs.append(a)
            z = a @ self.params[f"W{i}"]
            if self.use_bias:
                z = z + self.params[f"b{i}"]
            cache.preacts.append(z)
            if i < self.n_layers - 1:
                a = np.where(z >= 0, z, self.slope * z)
            elif self.output is OutputActivation.TANH:
                a = np.tanh(z)
            else:
                a = z
        return a, cache

    def forward(self, batch: ArrayLike) -> FloatArray:
        return self.forward_with_cache(batch)[0]

    def backward(
        self,
        batch: ArrayLike,
        upstream_grad: ArrayLike,
        cache: ForwardCache | None = None,
    ) -> tuple[Params, FloatArray]:
        """Reverse-mode gradients of sum(upstream_grad * forward(batch)).

        Args:
            batch: Inputs of the forward pass.
            upstream_grad: dLoss/dOutput, shape (B, d_out).
            cache: Cache from ``forward_with_cache``; recomputed when omitted.

        Returns:
            Parameter gradients keyed like ``params`` and input gradients (B, d_in).
        """
        if cache is None:
            out, cache = self.forward_with_cache(batch)
        else:
            out = None
        g = np.asarray(upstream_grad, dtype=np.float64)
        expected = (cache.inputs[0].shape[0], self.layer_dims[-1])
        if g.shape != expected:
            raise ShapeMismatchError("upstream gradient shape mismatch", expected, g.shape)
        grads: Params = {}
        for i in reversed(range(self.n_layers)):
            z = cache.preacts[i]
            if i < self.n_layers - 1:
                g = g * np.where(z >= 0, 1.0, self.slope)
            elif self.output is OutputActivation.TANH:
                t = np.tanh(z) if out is None else out
                g = g * (1.0 - t**2)
            grads[f"W{i}"] = cache.inputs[i].T @ g
            if self.use_bias:
                grads[f"b{i}"] = g.sum(axis=0)
            g = g @ self.params[f"W{i}"].T
        ordered = {name: grads[name] for name in self.params}
        return ordered, g

    # --- checkpoints ---

    def to_checkpoint(self) -> dict[str, Any]:
        return {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "layer_dims": list(self.layer_dims),
            "slope": self.slope,
            "use_bias": self.use_bias,
            "output": self.output.value,
            "params": {name: p.tolist() for name, p in self.params.items()},
        }

    @classmethod
    def from_checkpoint(cls, data: dict[str, Any]) -> MlpModel:
        if data.get("format") != CHECKPOINT_FORMAT:
            raise ConfigError("not an MLP checkpoint", field="format")
        if data.get("version") != CHECKPOINT_VERSION:
            raise ConfigError(
                f"unsupported checkpoint version {data.get('version')}", field="version"
            )
        params = {name: np.array(v, dtype=np.float64) for name, v in data["params"].items()}
        return cls(
            list(data["layer_dims"]),
            params,
            float(data["slope"]),
            bool(data["use_bias"]),
            OutputActivation(data["output"]),
        )

    def save(self, path: Path) -> None:
        path.write_text(json.dumps(self.to_checkpoint()), encoding="utf-8")
        logger.debug("checkpoint_saved", path=str(path))

    @classmethod
    def load(cls, path: Path) -> MlpModel:
        return cls.from_checkpoint(json.loads(path.read_text(encoding="utf-8")))


def forward(m: MlpModel, batch: ArrayLike) -> FloatArray:
    return m.forward(batch)


def backward(
    m: MlpModel, batch: ArrayLike, upstream_grad: ArrayLike
) -> tuple[Params, FloatArray]:
    return m.backward(batch, upstream_grad)


def leaky_relu(z: ArrayLike, slope: float = 0.2) -> FloatArray:
    arr = np.asarray(z, dtype=np.float64)
    return np.where(arr >= 0, arr, slope * arr)
