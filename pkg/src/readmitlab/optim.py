"""Parameter-update rules: plain SGD and two adaptive-moment methods.

Adam and AdaBelief share one update path and differ only in the quantity fed
to the second-moment accumulator: Adam tracks the squared gradient, AdaBelief
tracks the squared deviation of the gradient from its running mean (plus a
small constant folded into the accumulator). Parameters are updated in place.
"""

from __future__ import annotations

import numpy as np

_PARAMS = dict[str, np.ndarray]


class Sgd:
    """w <- w - lr * g."""

    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def reset(self) -> None:
        pass

    def step(self, params: _PARAMS, grads: _PARAMS) -> None:
        for key, p in params.items():
            p -= self.learning_rate * grads[key]


class _AdaptiveMoment:
    """Bias-corrected first/second moment update, estimand pluggable."""

    def __init__(self, learning_rate: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.reset()

    def reset(self) -> None:
        self._t = 0
        self._m: _PARAMS = {}
        self._v: _PARAMS = {}

    def second_moment_estimand(self, grad: np.ndarray, mean: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def step(self, params: _PARAMS, grads: _PARAMS) -> None:
        self._t += 1
        c1 = 1.0 - self.beta1**self._t
        c2 = 1.0 - self.beta2**self._t
        for key, p in params.items():
            g = grads[key]
            m = self._m.setdefault(key, np.zeros_like(p))
            v = self._v.setdefault(key, np.zeros_like(p))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * self.second_moment_estimand(g, m)
            p -= self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.eps)


class Adam(_AdaptiveMoment):
    """Second moment accumulates g**2."""

    def second_moment_estimand(self, grad, mean):
        return grad * grad


class AdaBelief(_AdaptiveMoment):
    """Second moment accumulates (g - m)**2, with eps added each step so the
    accumulator never collapses to zero faster than the gradient variance."""

    def second_moment_estimand(self, grad, mean):
        diff = grad - mean
        return diff * diff + self.eps / (1.0 - self.beta2)


OPTIMIZERS = {"sgd": Sgd, "adam": Adam, "adabelief": AdaBelief}


def make_optimizer(name: str, learning_rate: float, **kwargs):
    if name not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {name!r}; expected one of {sorted(OPTIMIZERS)}")
    return OPTIMIZERS[name](learning_rate, **kwargs)
