"""Small forecasting ablation: no positional codes vs CPG codes.

Trains the spiking forecaster on a synthetic phase-sensitive series using
the quickstart config (one seed, two modes) and prints test metrics
for each positional-encoding mode.  For the full three-seed comparison use
configs/ablation.json (takes several minutes).

Run:  python3 demos/demo_forecast.py
"""

import json

from cpgsnn.experiment import load_config, run_experiment


def main():
    config = load_config("configs/quickstart.json")
    result = run_experiment(config, out_dir="out/quickstart")
    print(json.dumps(result["aggregates"], indent=2))
    for record in result["records"]:
        if "error" in record:
            print(record)
        else:
            print(f"pe_mode={record['pe_mode']} seed={record['seed']} "
                  f"test R^2={record['test']['r2']:.4f} "
                  f"RSE={record['test']['rse']:.4f}")


if __name__ == "__main__":
    main()
