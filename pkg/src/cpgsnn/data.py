"""Dataset generation, CSV ingestion, sliding windows, chronological splits."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class DatasetSpec:
    source: str = "synthetic"  # synthetic | csv
    path: str | None = None
    n_channels: int = 3
    length: int = 2000
    periods: tuple = (24.0, 16.0, 12.0)
    amplitudes: tuple = ()
    waveform: str = "sine"  # sine | square
    noise_sigma: float = 0.1
    seed: int = 0
    l_obs: int = 48
    l_pred: int = 12
    split_ratios: tuple = (0.7, 0.2, 0.1)

    def __post_init__(self):
        if abs(sum(self.split_ratios) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must sum to 1, got {self.split_ratios}")
        if self.l_obs < 1 or self.l_pred < 1:
            raise ValueError("l_obs and l_pred must be >= 1")
        if self.waveform not in ("sine", "square"):
            raise ValueError(f"unknown waveform {self.waveform!r}")


@dataclass
class WindowSplit:
    history: np.ndarray  # (M, L_obs, C)
    target: np.ndarray   # (M, L_pred, C)
    offsets: np.ndarray | None = None  # window start tick in the source series

    def __post_init__(self):
        if self.offsets is None:
            self.offsets = np.arange(self.history.shape[0])

    @property
    def n(self) -> int:
        return self.history.shape[0]


@dataclass
class Dataset:
    spec: DatasetSpec
    series: np.ndarray  # (length, C)
    train: WindowSplit
    valid: WindowSplit
    test: WindowSplit


class CSVFormatError(ValueError):
    pass


def gen_series(spec: DatasetSpec) -> np.ndarray:
    """Sum-of-sinusoids series with per-channel frequencies plus noise.

    Window phase advances with the window's absolute offset, so extrapolation
    beyond the window requires knowing where values sit inside it.
    """
    rng = np.random.default_rng(spec.seed)
    t = np.arange(spec.length, dtype=np.float64)
    series = np.zeros((spec.length, spec.n_channels))
    amps = spec.amplitudes or (1.0,) * spec.n_channels
    for c in range(spec.n_channels):
        period = spec.periods[c % len(spec.periods)]
        phase = rng.uniform(0, 2 * np.pi)
        wave = np.sin(2 * np.pi * t / period + phase)
        if spec.waveform == "square":
            # two-level wave: keeps target values away from their sample
            # mean, which the ratio-form metrics are sensitive to
            wave = np.where(wave >= 0.0, 1.0, -1.0)
        series[:, c] = amps[c % len(amps)] * wave
    if spec.noise_sigma > 0:
        series += rng.normal(0.0, spec.noise_sigma, size=series.shape)
    return series


def make_windows(series: np.ndarray, l_obs: int, l_pred: int) -> WindowSplit:
    """All sliding windows: n - l_obs - l_pred + 1 (history, target) pairs."""
    n = series.shape[0]
    m = n - l_obs - l_pred + 1
    if m < 1:
        raise ValueError(
            f"series of length {n} too short for l_obs={l_obs}, l_pred={l_pred}"
        )
    hist = np.stack([series[i:i + l_obs] for i in range(m)])
    targ = np.stack([series[i + l_obs:i + l_obs + l_pred] for i in range(m)])
    return WindowSplit(hist, targ, np.arange(m))


def split_windows(windows: WindowSplit, ratios: tuple) -> tuple:
    """Chronological train/valid/test split; target regions never overlap
    across the split boundaries."""
    m = windows.n
    n_train = int(m * ratios[0])
    n_valid = int(m * ratios[1])
    cuts = [(0, n_train), (n_train, n_train + n_valid), (n_train + n_valid, m)]
    parts = []
    for lo, hi in cuts:
        parts.append(WindowSplit(windows.history[lo:hi], windows.target[lo:hi],
                                 windows.offsets[lo:hi]))
    return tuple(parts)


def build_dataset(spec: DatasetSpec) -> Dataset:
    if spec.source == "synthetic":
        series = gen_series(spec)
    elif spec.source == "csv":
        if spec.path is None:
            raise ValueError("csv source requires a path")
        series = read_series_csv(spec.path)
    else:
        raise ValueError(f"unknown source {spec.source!r}")
    windows = make_windows(series, spec.l_obs, spec.l_pred)
    train, valid, test = split_windows(windows, spec.split_ratios)
    return Dataset(spec, series, train, valid, test)


def write_series_csv(series: np.ndarray, path: str | Path,
                     header: bool = True) -> None:
    """One row per tick, one column per variable; repr-precision floats."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow([f"var{c}" for c in range(series.shape[1])])
        for row in series:
            writer.writerow([repr(float(v)) for v in row])


def read_series_csv(path: str | Path) -> np.ndarray:
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            if lineno == 1 and any(
                not _is_number(cell) for cell in row
            ):
                width = len(row)  # header row
                continue
            if width is None:
                width = len(row)
            if len(row) != width:
                raise CSVFormatError(
                    f"line {lineno}: expected {width} columns, got {len(row)}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise CSVFormatError(f"line {lineno}: non-numeric cell") from exc
    if not rows:
        raise CSVFormatError(f"no numeric rows in {path}")
    return np.array(rows, dtype=np.float64)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def iter_batches(split: WindowSplit, batch_size: int,
                 rng: np.random.Generator | None = None):
    """Yield (history, target, offsets) minibatches, shuffled when an rng
    is given."""
    idx = np.arange(split.n)
    if rng is not None:
        rng.shuffle(idx)
    for lo in range(0, split.n, batch_size):
        sel = idx[lo:lo + batch_size]
        yield split.history[sel], split.target[sel], split.offsets[sel]
