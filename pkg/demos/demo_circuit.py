"""Simulate the two-neuron emitter/resetter circuit and check periodicity.

A single emitter driven by a constant current, reset by a companion neuron,
emits the periodic pattern 0^R 1^K.  This demo derives the currents for a
chosen (beta, R, K), prints the spike train, and then runs the exhaustive
verification grid.

Run:  python3 demos/demo_circuit.py
"""

from cpgsnn.circuit import CircuitParams, simulate_circuit, verify_grid


def main():
    beta, r_steps, k_steps = 0.9, 4, 3
    params = CircuitParams.for_pattern(
        beta, u_thr=1.0, v_reset=0.0, r_steps=r_steps, k_steps=k_steps
    )
    period = params.period
    trace = simulate_circuit(params, 3 * period)

    print(f"beta={beta}, silent steps R={r_steps}, burst steps K={k_steps}, "
          f"period={period}")
    bits = "".join(str(int(s)) for s in trace.s_e)
    for start in range(0, len(bits), period):
        print(f"  {bits[start:start + period]}")

    report = verify_grid()
    print(f"\nfull grid: {report['n_cases']} cases, "
          f"{report['n_failed']} failed, all_pass={report['all_pass']}")


if __name__ == "__main__":
    main()
