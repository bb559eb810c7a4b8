"""
AdamW with decoupled weight decay.

Works on any mapping of named float arrays, so both the reverse network and
the entropy model parameters go through the same update.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from .errors import InputError

DEFAULT_WEIGHT_DECAY = 0.02
DEFAULT_BETAS = (0.9, 0.95)


@dataclass
class OptimizerState:
    """Moment accumulators and hyperparameters for AdamW."""
    lr: float = 1e-4
    weight_decay: float = DEFAULT_WEIGHT_DECAY
    betas: Tuple[float, float] = DEFAULT_BETAS
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def copy(self) -> "OptimizerState":
        return OptimizerState(
            lr=self.lr,
            weight_decay=self.weight_decay,
            betas=self.betas,
            eps=self.eps,
            step=self.step,
            m={k: a.copy() for k, a in self.m.items()},
            v={k: a.copy() for k, a in self.v.items()},
        )


def adamw_step(
    state: OptimizerState,
    params: Dict[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    names: Optional[Iterable[str]] = None,
    lr: Optional[float] = None,
) -> Tuple[Dict[str, np.ndarray], OptimizerState]:
    """
    One AdamW update over `names` (default: every key of grads).

    Returns new parameter and state objects; the inputs are left untouched.
    """
    names = list(grads if names is None else names)
    for name in names:
        g = grads[name]
        if g.shape != params[name].shape:
            raise InputError(f"gradient shape {g.shape} != parameter shape {params[name].shape} for {name}")
        if not np.all(np.isfinite(g)):
            raise InputError(f"non-finite gradient for {name}; step rejected")

    lr = state.lr if lr is None else lr
    beta1, beta2 = state.betas
    new_state = state.copy()
    new_state.step += 1
    t = new_state.step
    new_params = dict(params)

    for name in names:
        g = grads[name]
        m = beta1 * state.m.get(name, np.zeros_like(g)) + (1.0 - beta1) * g
        v = beta2 * state.v.get(name, np.zeros_like(g)) + (1.0 - beta2) * g * g
        new_state.m[name] = m
        new_state.v[name] = v
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        p = params[name] * (1.0 - lr * state.weight_decay)
        new_params[name] = p - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_params, new_state
