"""Dense feed-forward policies over flat weight vectors (inference only)."""

from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np

from ..utils.error_handler import ConfigurationError, UsageError


class Activation(str, Enum):
    """Hidden-layer activation."""

    RELU = "relu"
    TANH = "tanh"


@dataclass(frozen=True)
class Architecture:
    """Layer sizes (input, hidden..., output); hidden activation, linear output."""

    layer_sizes: Tuple[int, ...]
    activation: Activation = Activation.RELU

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        object.__setattr__(self, "activation", Activation(self.activation))
        if len(self.layer_sizes) < 3:
            raise ConfigurationError(
                "needs input, at least one hidden layer and output", field_path="layer_sizes"
            )
        if any(size < 1 for size in self.layer_sizes):
            raise ConfigurationError("all sizes must be positive", field_path="layer_sizes")

    @classmethod
    def default_for(
        cls,
        obs_dim: int,
        n_actions: int,
        hidden: Sequence[int] = (16, 16, 8),
        activation: Activation = Activation.RELU,
    ) -> "Architecture":
        return cls((obs_dim, *hidden, n_actions), activation)

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    @property
    def n_weight_layers(self) -> int:
        return len(self.layer_sizes) - 1

    @property
    def layer_param_counts(self) -> List[int]:
        """in*out + out for every consecutive pair of layer sizes."""
        return [i * o + o for i, o in zip(self.layer_sizes[:-1], self.layer_sizes[1:])]

    @property
    def parameter_count(self) -> int:
        return sum(self.layer_param_counts)

    def to_dict(self):
        return {"layer_sizes": list(self.layer_sizes), "activation": self.activation.value}

    @classmethod
    def from_dict(cls, data) -> "Architecture":
        return cls(tuple(data["layer_sizes"]), Activation(data.get("activation", "relu")))


def unpack_weights(arch: Architecture, weights: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Split a flat vector into (W, b) per layer; W has shape (in, out), row-major."""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 1 or weights.size != arch.parameter_count:
        raise UsageError(
            f"weight vector has {weights.size} values, architecture needs {arch.parameter_count}"
        )
    if not np.all(np.isfinite(weights)):
        raise UsageError("weight vector contains non-finite values")
    layers = []
    offset = 0
    for n_in, n_out in zip(arch.layer_sizes[:-1], arch.layer_sizes[1:]):
        w = weights[offset: offset + n_in * n_out].reshape(n_in, n_out)
        offset += n_in * n_out
        b = weights[offset: offset + n_out]
        offset += n_out
        layers.append((w, b))
    # every value consumed exactly once
    assert offset == weights.size
    return layers


class PolicyNetwork:
    """An architecture bound to one weight vector, unpacked once for repeated inference."""

    def __init__(self, arch: Architecture, weights: np.ndarray):
        self.arch = arch
        self.layers = unpack_weights(arch, weights)
        self._hidden = np.tanh if arch.activation is Activation.TANH else _relu

    def forward_batch(self, obs: np.ndarray) -> np.ndarray:
        """Per-action values for observation rows of shape (n, input_dim)."""
        x = np.asarray(obs, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.arch.input_dim:
            raise UsageError(
                f"observation has shape {x.shape}, network expects (n, {self.arch.input_dim})"
            )
        last = len(self.layers) - 1
        for index, (w, b) in enumerate(self.layers):
            x = x @ w + b
            if index < last:
                x = self._hidden(x)
        return x

    def act_batch(self, obs: np.ndarray) -> np.ndarray:
        """Greedy actions; np.argmax returns the lowest index on ties."""
        return np.argmax(self.forward_batch(obs), axis=1)


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def forward(arch: Architecture, weights: np.ndarray, obs: np.ndarray) -> np.ndarray:
    """Per-action values for one observation."""
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim != 1:
        raise UsageError(f"expected a single observation vector, got shape {obs.shape}")
    return PolicyNetwork(arch, weights).forward_batch(obs[None, :])[0]


def act(arch: Architecture, weights: np.ndarray, obs: np.ndarray) -> int:
    """Greedy action index for one observation (ties go to the lowest index)."""
    return int(np.argmax(forward(arch, weights, obs)))
