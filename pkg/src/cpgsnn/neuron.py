"""Discrete-time leaky integrate-and-fire dynamics with arctangent surrogate.

Forward semantics per step:

    U = H_prev + I
    S = 1  iff  U >= u_thr          (spike at exact equality)
    H = v_reset * S + (1 - S) * beta * U

The backward pass replaces dS/dU by the arctangent surrogate evaluated at
U - u_thr.  The reset term's dependence on S is treated as non-differentiable:
gradient flows through beta * U only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import SpikeTensor, Tensor, stack


@dataclass
class LIFParams:
    beta: float = 0.9
    u_thr: float = 1.0
    v_reset: float = 0.0
    alpha: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must be in (0,1), got {self.beta}")
        if self.u_thr <= self.v_reset:
            raise ValueError(
                f"u_thr ({self.u_thr}) must exceed v_reset ({self.v_reset})"
            )
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")


@dataclass
class MembraneState:
    """Temporal output H threaded between steps."""

    h: Tensor
    step: int = 0


def surrogate_grad(u, alpha: float):
    """(alpha/2) / (1 + ((pi/2) * alpha * u)^2), the stand-in for dS/dU."""
    u = np.asarray(u, dtype=np.float64)
    return (alpha / 2.0) / (1.0 + (np.pi / 2.0 * alpha * u) ** 2)


def spike(u_shifted: Tensor, alpha: float) -> Tensor:
    """Heaviside forward at u_shifted >= 0, surrogate-gradient backward."""
    data = (u_shifted.data >= 0.0).astype(np.float64)
    sg = surrogate_grad(u_shifted.data, alpha)

    def backward(g):
        u_shifted._accumulate(g * sg)

    return Tensor._make(data, (u_shifted,), backward)


def lif_step(
    state: MembraneState, input_current: Tensor, params: LIFParams
) -> tuple[Tensor, MembraneState]:
    """One membrane update; returns (binary spikes, new state)."""
    if not np.all(np.isfinite(input_current.data)):
        raise FloatingPointError("non-finite input current")
    if np.broadcast_shapes(state.h.shape, input_current.shape) != \
            input_current.shape:
        raise ValueError(
            f"state shape {state.h.shape} incompatible with input "
            f"{input_current.shape}"
        )
    u = state.h + input_current
    s = spike(u - params.u_thr, params.alpha)
    s_const = s.data  # detach: no gradient through the reset gate
    h_new = u * (params.beta * (1.0 - s_const)) + params.v_reset * s_const
    return s, MembraneState(h=h_new, step=state.step + 1)


def lif_step_values(h_prev: float, current: float, params: LIFParams):
    """Plain-float step for non-differentiable simulations.

    Returns (u, s, h_new).  Threshold comparison allows a tiny tolerance so
    that exact-equality crossings survive float rounding.
    """
    u = h_prev + current
    s = 1 if u >= params.u_thr - 1e-12 else 0
    h = params.v_reset * s + (1 - s) * params.beta * u
    return u, s, h


class SpikingLayer:
    """Applies LIF dynamics across the leading step axis of a sequence.

    State is reset to H = 0 at sequence start; a layer instance owns its
    membrane state during a forward pass and is not shareable mid-pass.
    """

    def __init__(self, params: LIFParams | None = None):
        self.params = params or LIFParams()

    def __call__(self, x_seq: Tensor) -> SpikeTensor:
        return self.forward(x_seq)

    def forward(self, x_seq: Tensor) -> SpikeTensor:
        t_steps = x_seq.shape[0]
        state = MembraneState(h=Tensor(np.zeros(x_seq.shape[1:])))
        spikes = []
        for t in range(t_steps):
            step_in = _take_step(x_seq, t)
            s, state = lif_step(state, step_in, self.params)
            spikes.append(s)
        out = stack(spikes, axis=0)
        return SpikeTensor(out)


def _take_step(x_seq: Tensor, t: int, axis: int = 0) -> Tensor:
    """Differentiable slice of index t along the given axis."""
    index = (slice(None),) * axis + (t,)
    data = x_seq.data[index]

    def backward(g):
        gx = np.zeros_like(x_seq.data)
        gx[index] = g
        x_seq._accumulate(gx)

    return Tensor._make(data, (x_seq,), backward)
