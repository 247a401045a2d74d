"""Lite spiking sequence models for desk-scale forecasting.

The backbones (recurrent and causal-dilated-convolution) operate position-
wise with shared weights, so without a positional encoding their feature
maps are permutation-equivariant along the sequence axis.  The readout
pools spike rates over both the step axis and the position axis before a
single non-spiking linear head, which keeps the head position-agnostic:
any positional awareness must come from the encoding under test.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blocks import CPGPEBlock, FloatPEBlock, RandomPEBlock
from .encoder import CPGPEConfig
from .neuron import LIFParams, MembraneState, SpikingLayer, lif_step, _take_step
from .nn import BatchNorm, Linear, Module
from .tensor import ShapeError, SpikeTensor, Tensor, shift_positions, stack

PE_MODES = ("none", "cpg", "float", "random")


@dataclass
class ModelConfig:
    backbone: str = "rnn"  # rnn | tcn
    hidden_dim: int = 32
    n_layers: int = 1
    t_steps: int = 4
    pe_mode: str = "none"
    recurrence: str = "step"  # step | position (rnn backbone only)
    readout: str = "rate"  # rate | membrane
    readout_pool: str = "mean"  # mean | last (pooling over positions)
    head_hidden: int = 0  # 0 = linear head, > 0 = two-layer tanh head
    kernel_size: int = 3
    lif: LIFParams = field(default_factory=LIFParams)
    cpg: CPGPEConfig | None = None
    random_pe_prob: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.backbone not in ("rnn", "tcn"):
            raise ValueError(f"unknown backbone {self.backbone!r}")
        if self.pe_mode not in PE_MODES:
            raise ValueError(f"unknown pe_mode {self.pe_mode!r}")
        if self.recurrence not in ("step", "position"):
            raise ValueError(f"unknown recurrence {self.recurrence!r}")
        if self.readout not in ("rate", "membrane"):
            raise ValueError(f"unknown readout {self.readout!r}")
        if self.readout_pool not in ("mean", "last"):
            raise ValueError(f"unknown readout_pool {self.readout_pool!r}")
        if self.head_hidden < 0:
            raise ValueError(f"head_hidden must be >= 0, got {self.head_hidden}")
        if self.pe_mode == "cpg" and self.cpg is None:
            self.cpg = CPGPEConfig()


@dataclass
class ForecastBatch:
    history: np.ndarray  # (B, L_obs, C)
    target: np.ndarray   # (B, L_pred, C)

    def __post_init__(self):
        if np.isnan(self.history).any() or np.isnan(self.target).any():
            raise ValueError("NaN in forecast batch")
        if self.history.shape[1] < 1 or self.target.shape[1] < 1:
            raise ValueError("L_obs and L_pred must be >= 1")


class InputEncoder(Module):
    """Standardize -> linear projection -> repeat over steps -> spiking layer.

    The projection is the only real-valued computation before the spiking
    path; float-PE, when active, is added to the projection (pre-spike).
    """

    def __init__(self, in_channels: int, d_model: int, t_steps: int,
                 lif: LIFParams, rng: np.random.Generator,
                 float_pe_block: FloatPEBlock | None = None):
        self.in_channels = in_channels
        self.t_steps = t_steps
        self.proj = Linear(in_channels, d_model, rng)
        self.sn = SpikingLayer(lif)
        self.float_pe_block = float_pe_block
        self.channel_mean = np.zeros(in_channels)
        self.channel_std = np.ones(in_channels)

    def fit_normalization(self, history: np.ndarray, eps: float = 1e-8):
        flat = history.reshape(-1, history.shape[-1])
        self.channel_mean = flat.mean(axis=0)
        self.channel_std = flat.std(axis=0) + eps

    def __call__(self, history: np.ndarray) -> SpikeTensor:
        if not np.all(np.isfinite(history)):
            raise ValueError("non-finite history values")
        z = (history - self.channel_mean) / self.channel_std
        current = self.proj(Tensor(z))  # (B, L, D)
        if self.float_pe_block is not None:
            current = self.float_pe_block(current)
        seq = stack([current] * self.t_steps, axis=0)  # (T, B, L, D)
        return self.sn(seq)


class SpikeRNNLayer(Module):
    """Recurrent spiking cell, unrolled over the step or the position axis.

    I(t) = x_t @ W_in + s_(t-1) @ W_rec + b, with LIF membrane dynamics.
    W_rec = 0 reduces to a feedforward spiking layer.  With step recurrence
    the cell is shared across positions; with position recurrence it scans
    the sequence left to right, carrying state between positions.

    Input currents pass through a shared batch normalization before the
    membrane update (norm=True); sparse binary inputs otherwise produce
    sub-threshold currents at initialization and the layer never spikes.
    """

    def __init__(self, d_in: int, d_out: int, lif: LIFParams,
                 rng: np.random.Generator, recur_axis: str = "step",
                 norm: bool = True):
        if recur_axis not in ("step", "position"):
            raise ValueError(f"unknown recur_axis {recur_axis!r}")
        self.w_in = Linear(d_in, d_out, rng)
        self.w_rec = Linear(d_out, d_out, rng, bias=False)
        self.bn = BatchNorm(d_out) if norm else None
        self.lif = lif
        self.recur_axis = recur_axis
        self._last_membrane: Tensor | None = None

    @property
    def last_membrane(self) -> Tensor | None:
        """Final-slot membrane potential from the most recent forward pass."""
        return self._last_membrane

    def __call__(self, x: SpikeTensor) -> SpikeTensor:
        xt = x.to_tensor()
        t_steps, b, l, _ = x.shape
        d_out = self.w_in.weight.shape[1]
        if self.recur_axis == "step":
            axis, extent, state_shape = 0, t_steps, (b, l, d_out)
        else:
            axis, extent, state_shape = 2, l, (t_steps, b, d_out)
        state = MembraneState(h=Tensor(np.zeros(state_shape)))
        s_prev = Tensor(np.zeros(state_shape))
        outs = []
        for t in range(extent):
            current = (
                self.w_in(_take_step(xt, t, axis))
                + (s_prev @ self.w_rec.weight)
            )
            if self.bn is not None:
                current = self.bn(current)
            s, state = lif_step(state, current, self.lif)
            outs.append(s)
            s_prev = s
        self._last_membrane = state.h
        return SpikeTensor(stack(outs, axis=axis))


class SpikeTCNLayer(Module):
    """Causal dilated convolution over positions, then BN and spiking."""

    def __init__(self, d_in: int, d_out: int, kernel_size: int, dilation: int,
                 lif: LIFParams, rng: np.random.Generator):
        if kernel_size < 1:
            raise ValueError(f"kernel_size must be >= 1, got {kernel_size}")
        self.kernel_size = kernel_size
        self.dilation = dilation
        self.taps = [Linear(d_in, d_out, rng, bias=(k == 0))
                     for k in range(kernel_size)]
        self.bn = BatchNorm(d_out)
        self.sn = SpikingLayer(lif)

    def __call__(self, x: SpikeTensor) -> SpikeTensor:
        t_steps, b, l, _ = x.shape
        span = (self.kernel_size - 1) * self.dilation
        if span >= l:
            raise ShapeError(
                f"kernel span {span + 1} exceeds sequence length {l}"
            )
        xt = x.to_tensor()
        y = None
        for k, tap in enumerate(self.taps):
            xk = shift_positions(xt, k * self.dilation, axis=2)
            yk = tap(xk)
            y = yk if y is None else y + yk
        return self.sn(self.bn(y))

    @property
    def receptive_field(self) -> int:
        return (self.kernel_size - 1) * self.dilation + 1


class MLPHead(Module):
    """Two-layer real-valued readout head with a tanh hidden layer.

    Operating on pooled statistics only, it stays position-agnostic; it
    exists because a purely linear head cannot turn pooled spike counts
    into the nonlinear functions of them that forecasting requires.
    """

    def __init__(self, d_in: int, d_hidden: int, d_out: int,
                 rng: np.random.Generator):
        self.fc1 = Linear(d_in, d_hidden, rng)
        self.fc2 = Linear(d_hidden, d_out, rng)

    def __call__(self, x: Tensor) -> Tensor:
        return self.fc2(self.fc1(x).tanh())


class ForecastModel(Module):
    """Encoder -> optional PE block -> spiking backbone -> pooled readout."""

    def __init__(self, config: ModelConfig, in_channels: int, l_pred: int):
        self.config = config
        self.in_channels = in_channels
        self.l_pred = l_pred
        rng = np.random.default_rng(config.seed)
        d = config.hidden_dim
        float_block = FloatPEBlock(d) if config.pe_mode == "float" else None
        self.encoder = InputEncoder(
            in_channels, d, config.t_steps, config.lif, rng, float_block
        )
        if config.pe_mode == "cpg":
            self.pe_block = CPGPEBlock(d, config.cpg, config.lif, rng)
        elif config.pe_mode == "random":
            width = config.cpg.width if config.cpg else 2 * 20
            self.pe_block = RandomPEBlock(
                d, width, config.random_pe_prob, config.seed, config.lif, rng
            )
        else:
            self.pe_block = None
        self.layers = []
        for i in range(config.n_layers):
            if config.backbone == "rnn":
                self.layers.append(
                    SpikeRNNLayer(d, d, config.lif, rng, config.recurrence)
                )
            else:
                self.layers.append(
                    SpikeTCNLayer(d, d, config.kernel_size, 2**i,
                                  config.lif, rng)
                )
        if config.head_hidden > 0:
            self.head = MLPHead(d, config.head_hidden,
                                l_pred * in_channels, rng)
        else:
            self.head = Linear(d, l_pred * in_channels, rng)

    def set_training(self, training: bool) -> None:
        for m in self._bn_modules():
            m.training = training

    def _bn_modules(self):
        out = []
        if self.pe_block is not None:
            out.append(self.pe_block.bn)
        for layer in self.layers:
            if getattr(layer, "bn", None) is not None:
                out.append(layer.bn)
        return out

    def backbone_spikes(self, history: np.ndarray,
                        offsets: np.ndarray | None = None) -> SpikeTensor:
        x = self.encoder(history)
        if self.pe_block is not None:
            x = self.pe_block(x, offsets)
        for layer in self.layers:
            x = layer(x)
        return x

    def readout(self, x: SpikeTensor) -> Tensor:
        """Reduce spikes over steps and positions, project to the horizon."""
        if self.config.readout == "membrane":
            last = self.layers[-1]
            memb = getattr(last, "last_membrane", None)
            if memb is None:
                raise ValueError(
                    "membrane readout requires an rnn final layer"
                )
            if self.config.recurrence == "position":
                pooled = memb.mean(axis=0)  # (B, D) over steps
            else:
                pooled = memb.mean(axis=1)  # (B, D) over positions
        else:
            rate = x.to_tensor().mean(axis=0)  # (B, L, D) over steps
            if self.config.readout_pool == "last":
                pooled = _take_step(rate, rate.shape[1] - 1, axis=1)
            else:
                pooled = rate.mean(axis=1)  # (B, D) over positions
        b = pooled.shape[0]
        y = self.head(pooled)
        return y.reshape(b, self.l_pred, self.in_channels)

    def __call__(self, history: np.ndarray,
                 offsets: np.ndarray | None = None) -> Tensor:
        """Forecast from history windows.

        When per-window series offsets are given, the positional block
        indexes its codes by absolute series tick rather than by position
        within the window, so windows taken at different points of the
        series receive different codes.
        """
        return self.readout(self.backbone_spikes(history, offsets))
