"""Two-LIF burst circuit: an emitter that fires K consecutive spikes every
R + K steps, terminated by a resetter neuron.

Current schedule (everything in units of one step, step 0 is the initial
rest state and carries no input):

    I_e(t) = I_c1 + S_e(t-1) * (U_thr - I_c1 - V_reset) - S_r(t-1) * U_thr
    I_r(t) = S_e(t-1) * I_c2 - S_r(t-1) * (I_c2 + V_reset)

`derive_currents` returns the published closed-form constants.  Stepping the
membrane recurrence directly shows those constants produce R-1 rest steps and
K-1 burst spikes (period R+K-2): the published first-spike formula counts one
step too many, because it implicitly assumes the first injection arrives one
step late.  The recurrence is treated as ground truth here, so the circuit
builder (`CircuitParams.for_pattern`) derives its currents at (R+1, K+1),
which makes the simulated emitter pattern exactly (0^R 1^K).  The offset is
surfaced, not absorbed: `first_spike_time` is the recurrence-faithful
closed form and `first_spike_time_uncorrected` is the stated one (always one
step later in the firing regime).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .neuron import LIFParams, lif_step_values


class NeverFiresError(ValueError):
    """Constant current too weak to ever reach threshold."""


def _check_lif(beta: float, u_thr: float) -> None:
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must be in (0,1), got {beta}")
    if u_thr <= 0:
        raise ValueError(f"u_thr must be > 0, got {u_thr}")


def first_spike_time(beta: float, u_thr: float, i_c: float) -> int:
    """First-spike step for constant current, faithful to the recurrence.

    From rest, U(k) = I_c (1 - beta^k) / (1 - beta); the first k with
    U(k) >= u_thr is ceil(log_beta(1 - u_thr (1 - beta) / I_c)), counting
    exact-equality crossings as spikes.
    """
    _check_lif(beta, u_thr)
    if i_c <= 0:
        raise NeverFiresError(f"current must be > 0, got {i_c}")
    arg = 1.0 - u_thr * (1.0 - beta) / i_c
    if arg <= 0.0:
        raise NeverFiresError(
            f"I_c={i_c} never drives the membrane to threshold "
            f"(steady state {i_c / (1 - beta):.6g} <= u_thr={u_thr})"
        )
    k = math.log(arg) / math.log(beta)
    # exact-equality crossings land on an integer up to float noise
    if abs(k - round(k)) < 1e-9:
        return max(1, int(round(k)))
    return max(1, math.ceil(k))


def first_spike_time_uncorrected(beta: float, u_thr: float, i_c: float) -> int:
    """The closed form as published: one step later than the recurrence."""
    _check_lif(beta, u_thr)
    if i_c <= 0:
        raise NeverFiresError(f"current must be > 0, got {i_c}")
    arg = beta - u_thr * beta * (1.0 - beta) / i_c
    if arg <= 0.0:
        raise NeverFiresError(
            f"I_c={i_c} never drives the membrane to threshold"
        )
    k = math.log(arg) / math.log(beta)
    if abs(k - round(k)) < 1e-9:
        return max(1, int(round(k)))
    return max(1, math.ceil(k))


def simulate_first_spike(
    beta: float, u_thr: float, i_c: float, max_steps: int = 100000
) -> int:
    """Brute-force the membrane recurrence until the first spike."""
    _check_lif(beta, u_thr)
    params = LIFParams(beta=beta, u_thr=u_thr, v_reset=0.0)
    h = 0.0
    for k in range(1, max_steps + 1):
        _, s, h = lif_step_values(h, i_c, params)
        if s:
            return k
    raise NeverFiresError(f"no spike within {max_steps} steps for I_c={i_c}")


def derive_currents(
    beta: float, u_thr: float, r_steps: int, k_steps: int
) -> tuple[float, float]:
    """Published base currents for rest length R and burst length K.

    I_c1 = U_thr beta (1-beta) / (beta - beta^R)      requires R >= 2
    I_c2 = U_thr beta (1-beta) / (beta - beta^(K-1))  requires K >= 3
    """
    _check_lif(beta, u_thr)
    if r_steps < 2:
        raise ValueError(
            f"R={r_steps} < 2 makes the denominator beta - beta^R non-positive"
        )
    if k_steps < 3:
        raise ValueError(
            f"K={k_steps} < 3 makes the denominator beta - beta^(K-1) "
            f"{'zero' if k_steps == 2 else 'non-positive'}"
        )
    i_c1 = u_thr * beta * (1.0 - beta) / (beta - beta**r_steps)
    i_c2 = u_thr * beta * (1.0 - beta) / (beta - beta ** (k_steps - 1))
    return i_c1, i_c2


@dataclass
class CircuitParams:
    beta: float
    u_thr: float
    v_reset: float
    r_steps: int
    k_steps: int
    i_c1: float
    i_c2: float

    @classmethod
    def for_pattern(
        cls,
        beta: float,
        u_thr: float = 1.0,
        v_reset: float = 0.0,
        r_steps: int = 5,
        k_steps: int = 3,
    ) -> "CircuitParams":
        """Currents tuned so the simulated emitter emits exactly (0^R 1^K).

        Applies the one-step correction to the published formulas (see module
        docstring): currents are derived at (R+1, K+1).
        """
        if r_steps < 2 or k_steps < 3:
            raise ValueError(
                f"require R >= 2 and K >= 3, got R={r_steps}, K={k_steps}"
            )
        if u_thr <= v_reset:
            raise ValueError(f"u_thr ({u_thr}) must exceed v_reset ({v_reset})")
        i_c1, i_c2 = derive_currents(beta, u_thr, r_steps + 1, k_steps + 1)
        return cls(beta, u_thr, v_reset, r_steps, k_steps, i_c1, i_c2)

    @property
    def period(self) -> int:
        return self.r_steps + self.k_steps


@dataclass
class CircuitTrace:
    """Per-step record of both neurons; step 0 is the initial rest state."""

    u_e: np.ndarray
    s_e: np.ndarray
    u_r: np.ndarray
    s_r: np.ndarray
    i_e: np.ndarray
    i_r: np.ndarray

    def __len__(self):
        return len(self.s_e)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "U_e", "S_e", "U_r", "S_r", "I_e", "I_r"])
            for t in range(len(self)):
                writer.writerow(
                    [t, self.u_e[t], int(self.s_e[t]), self.u_r[t],
                     int(self.s_r[t]), self.i_e[t], self.i_r[t]]
                )


def simulate_circuit(params: CircuitParams, n_steps: int) -> CircuitTrace:
    """Step both neurons under the circuit's current schedule."""
    if n_steps < params.period:
        raise ValueError(
            f"n_steps={n_steps} shorter than one period {params.period}"
        )
    lif = LIFParams(
        beta=params.beta, u_thr=params.u_thr, v_reset=params.v_reset
    )
    u_e = np.zeros(n_steps)
    s_e = np.zeros(n_steps, dtype=np.uint8)
    u_r = np.zeros(n_steps)
    s_r = np.zeros(n_steps, dtype=np.uint8)
    i_e = np.zeros(n_steps)
    i_r = np.zeros(n_steps)
    h_e = h_r = 0.0
    se_prev = sr_prev = 0
    for t in range(1, n_steps):
        cur_e = (
            params.i_c1
            + se_prev * (params.u_thr - params.i_c1 - params.v_reset)
            - sr_prev * params.u_thr
        )
        cur_r = se_prev * params.i_c2 - sr_prev * (params.i_c2 + params.v_reset)
        u_e[t], se, h_e = lif_step_values(h_e, cur_e, lif)
        u_r[t], sr, h_r = lif_step_values(h_r, cur_r, lif)
        s_e[t], s_r[t] = se, sr
        i_e[t], i_r[t] = cur_e, cur_r
        se_prev, sr_prev = se, sr
    return CircuitTrace(u_e, s_e, u_r, s_r, i_e, i_r)


def verify_period(
    params: CircuitParams, n_periods: int = 5, state_tol: float = 1e-9
) -> dict:
    """Check the emitter pattern (0^R 1^K)^n and state recurrence.

    Returns a JSON-serializable report; never raises on mismatch.
    """
    if n_periods < 2:
        raise ValueError(f"n_periods must be >= 2, got {n_periods}")
    period = params.period
    n_steps = n_periods * period
    trace = simulate_circuit(params, n_steps)
    expected = np.tile(
        np.concatenate(
            [np.zeros(params.r_steps, np.uint8), np.ones(params.k_steps, np.uint8)]
        ),
        n_periods,
    )
    mismatches = np.nonzero(trace.s_e != expected)[0]
    boundary_err = 0.0
    for k in range(1, n_periods):
        t = k * period
        boundary_err = max(
            boundary_err, abs(trace.u_e[t] - trace.u_e[0]),
            abs(trace.u_r[t] - trace.u_r[0]),
        )
    resetter_per_period = [
        int(trace.s_r[k * period:(k + 1) * period].sum())
        for k in range(n_periods)
    ]
    ok = (
        mismatches.size == 0
        and boundary_err <= state_tol
        and all(c == 1 for c in resetter_per_period[1:])
    )
    return {
        "params": {
            "beta": params.beta, "u_thr": params.u_thr,
            "v_reset": params.v_reset, "R": params.r_steps,
            "K": params.k_steps, "i_c1": params.i_c1, "i_c2": params.i_c2,
        },
        "n_periods": n_periods,
        "pattern_ok": bool(mismatches.size == 0),
        "first_mismatch_step": int(mismatches[0]) if mismatches.size else None,
        "state_recurrence_error": float(boundary_err),
        "resetter_spikes_per_period": resetter_per_period,
        "pass": bool(ok),
    }


def verify_grid(
    betas=(0.5, 0.8, 0.9, 0.95),
    r_values=range(2, 11),
    k_values=range(3, 7),
    v_resets=(0.0, -0.2),
    u_thr: float = 1.0,
    n_periods: int = 5,
) -> dict:
    """Exhaustive verification over a parameter grid."""
    reports = []
    for beta in betas:
        for r in r_values:
            for k in k_values:
                for vr in v_resets:
                    params = CircuitParams.for_pattern(
                        beta, u_thr=u_thr, v_reset=vr, r_steps=r, k_steps=k
                    )
                    reports.append(verify_period(params, n_periods))
    return {
        "n_cases": len(reports),
        "n_failed": sum(0 if r["pass"] else 1 for r in reports),
        "all_pass": all(r["pass"] for r in reports),
        "reports": reports,
    }


def grid_report_to_json(report: dict, path: str | Path | None = None) -> str:
    text = json.dumps(report, indent=2)
    if path is not None:
        Path(path).write_text(text)
    return text


def circular_cross_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """c[k] = sum_t a[t] * b[(t + k) mod n], for binary train comparison."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    n = len(a)
    return np.array([np.dot(a, np.roll(b, -k)) for k in range(n)])
