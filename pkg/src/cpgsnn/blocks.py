"""Pluggable positional-encoding blocks.

The spike-form block concatenates the positional spike matrix along the
feature axis and maps back to the input width through Linear -> BN -> SN,
so the output stays strictly binary.  Direct elementwise addition of two
spike matrices is structurally impossible here: binary payloads only meet
through concatenation or through real-valued pre-activations.

`CPGLinearLayer` is the drop-in linear variant: two parallel projections
(input and positional code) are summed as real values before BN and the
spiking layer.  With block-structured weights it reproduces the concat
block bit-exactly.
"""

from __future__ import annotations

import numpy as np

from .encoder import CPGPEConfig, float_pe, generate_pe, random_pe
from .neuron import LIFParams, SpikingLayer
from .nn import BatchNorm, Linear, Module
from .tensor import ShapeError, SpikeTensor, Tensor, concat_features

_PE_CACHE: dict[tuple, SpikeTensor] = {}


def cached_pe(t_steps: int, seq_len: int, config: CPGPEConfig) -> SpikeTensor:
    """The positional tensor is input-independent; compute once per shape."""
    key = (
        t_steps, seq_len, config.n_pairs, config.tau, config.eta,
        config.v_thres, config.flatten_order,
    )
    if key not in _PE_CACHE:
        _PE_CACHE[key] = generate_pe(t_steps, seq_len, config)
    return _PE_CACHE[key]


def _broadcast_pe(pe: SpikeTensor, batch: int) -> SpikeTensor:
    t, _, l, w = pe.shape
    bits = np.broadcast_to(pe.bits, (t, batch, l, w))
    return SpikeTensor(bits.copy())


def _slice_codes(codes: np.ndarray, offsets: np.ndarray, t_steps: int,
                 seq_len: int) -> SpikeTensor:
    """Per-sample windows into a (horizon, W) per-tick code table.

    Absolute-time indexing: sample b at position p reads the code of series
    tick offsets[b] + p, identically on every step.  Codes at any tick are
    independent of the horizon the table was generated for, so windows drawn
    against different horizons agree wherever they overlap.
    """
    rows = np.stack([codes[o:o + seq_len] for o in offsets])  # (B, L, W)
    bits = np.broadcast_to(rows, (t_steps,) + rows.shape)
    return SpikeTensor(bits.copy().astype(np.float64))


def cached_tick_codes(horizon: int, config: CPGPEConfig) -> np.ndarray:
    """(horizon, width) per-tick CPG codes for absolute-time indexing."""
    return cached_pe(1, horizon, config).bits[0, 0]


class CPGPEBlock(Module):
    """Dimension-neutral positional block: (T,B,L,D) -> (T,B,L,D)."""

    def __init__(
        self,
        d_model: int,
        config: CPGPEConfig,
        lif: LIFParams | None = None,
        rng: np.random.Generator | None = None,
    ):
        rng = rng or np.random.default_rng(0)
        self.d_model = d_model
        self.config = config
        self.linear = Linear(d_model + config.width, d_model, rng)
        self.bn = BatchNorm(d_model)
        self.sn = SpikingLayer(lif)

    def __call__(self, x: SpikeTensor,
                 offsets: np.ndarray | None = None) -> SpikeTensor:
        t, b, l, d = x.shape
        if d != self.d_model:
            raise ShapeError(
                f"block configured for D={self.d_model}, input has D={d}"
            )
        if offsets is None:
            pe = _broadcast_pe(cached_pe(t, l, self.config), b)
        else:
            codes = cached_tick_codes(int(np.max(offsets)) + l, self.config)
            pe = _slice_codes(codes, offsets, t, l)
        x1 = concat_features(x, pe)
        y = self.linear(x1.to_tensor())
        return self.sn(self.bn(y))


class CPGLinearLayer(Module):
    """Linear layer with the positional code injected through a parallel map."""

    def __init__(
        self,
        d_in: int,
        d_out: int,
        config: CPGPEConfig,
        lif: LIFParams | None = None,
        rng: np.random.Generator | None = None,
    ):
        rng = rng or np.random.default_rng(0)
        self.d_in = d_in
        self.d_out = d_out
        self.config = config
        self.linear1 = Linear(d_in, d_out, rng)
        self.linear2 = Linear(config.width, d_out, rng, bias=False)
        self.bn = BatchNorm(d_out)
        self.sn = SpikingLayer(lif)

    def __call__(self, x: SpikeTensor) -> SpikeTensor:
        t, b, l, d = x.shape
        if d != self.d_in:
            raise ShapeError(f"expected D_in={self.d_in}, input has D={d}")
        pe = cached_pe(t, l, self.config)
        x1 = self.linear1(x.to_tensor())
        x2 = pe.to_tensor() @ self.linear2.weight  # (T,1,L,D_out), broadcast over B
        x3 = x1 + x2
        return self.sn(self.bn(x3))


class RandomPEBlock(Module):
    """Ablation baseline: same plumbing as CPGPEBlock, random fixed codes."""

    def __init__(
        self,
        d_model: int,
        width: int,
        spike_prob: float = 0.5,
        seed: int = 0,
        lif: LIFParams | None = None,
        rng: np.random.Generator | None = None,
    ):
        rng = rng or np.random.default_rng(0)
        self.d_model = d_model
        self.width = width
        self.spike_prob = spike_prob
        self.seed = seed
        self.linear = Linear(d_model + width, d_model, rng)
        self.bn = BatchNorm(d_model)
        self.sn = SpikingLayer(lif)
        self._codes: np.ndarray | None = None
        self._abs_codes: np.ndarray | None = None

    def _pe_bits(self, t_steps: int, seq_len: int) -> np.ndarray:
        n = t_steps * seq_len
        if self._codes is None or self._codes.shape[0] != n:
            self._codes = random_pe(n, self.width, self.spike_prob, self.seed)
        return self._codes.reshape(t_steps, 1, seq_len, self.width)

    def _tick_codes(self, horizon: int) -> np.ndarray:
        # Bernoulli rows are drawn tick-major, so a longer table agrees
        # with a shorter one on their shared prefix.
        if self._abs_codes is None or self._abs_codes.shape[0] < horizon:
            self._abs_codes = random_pe(
                horizon, self.width, self.spike_prob, self.seed
            )
        return self._abs_codes

    def __call__(self, x: SpikeTensor,
                 offsets: np.ndarray | None = None) -> SpikeTensor:
        t, b, l, d = x.shape
        if d != self.d_model:
            raise ShapeError(
                f"block configured for D={self.d_model}, input has D={d}"
            )
        if offsets is None:
            pe = _broadcast_pe(SpikeTensor(self._pe_bits(t, l)), b)
        else:
            codes = self._tick_codes(int(np.max(offsets)) + l)
            pe = _slice_codes(codes, offsets, t, l)
        x1 = concat_features(x, pe)
        y = self.linear(x1.to_tensor())
        return self.sn(self.bn(y))


class FloatPEBlock(Module):
    """Real-valued sinusoidal addition, usable only before the first spiking
    layer; its output is dense and deliberately not a SpikeTensor."""

    def __init__(self, d_model: int):
        if d_model % 2 != 0:
            raise ValueError(f"d_model must be even, got {d_model}")
        self.d_model = d_model

    def __call__(self, x_real: Tensor) -> Tensor:
        if isinstance(x_real, SpikeTensor):
            raise TypeError("FloatPEBlock operates on dense pre-spike values")
        l = x_real.shape[-2]
        pe = float_pe(np.arange(l), self.d_model)  # (L, D), broadcasts
        return x_real + pe
