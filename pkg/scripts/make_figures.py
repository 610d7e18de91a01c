"""End-to-end demo: run a small set of simulations and render figures.

By default this uses a shortened window so the whole thing finishes in a
few minutes; pass --full for the t_max = 1000 protocol used in the
acceptance suite (much slower).

Usage: python scripts/make_figures.py [--full] [--outdir out/demo]
"""

import argparse
import json
import subprocess
import sys
from pathlib import Path


def run_cli(tool, *args):
    cmd = [sys.executable, "-m", tool, *args]
    print("+", " ".join(cmd), flush=True)
    subprocess.run(cmd, check=True)


def write_json(path, body):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(body, indent=2) + "\n")
    return path


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--full", action="store_true", help="use the 1000-period protocol")
    ap.add_argument("--outdir", default="out/demo")
    args = ap.parse_args()
    out = Path(args.outdir)
    t_max = 1000.0 if args.full else 200.0

    base = {"preset": "weakly_coupled", "delta_e": 3.0, "t_max": t_max}

    # donor population: collision runs at three interaction lengths + reference
    runs = []
    for tau in (10.0, 1.0, 0.1):
        d = out / f"ri_tau{tau:g}"
        cfg = write_json(out / f"cfg_ri_tau{tau:g}.json",
                         {**base, "method": "ri", "tau": tau, "output_dir": str(d)})
        run_cli("riet.cli", "run", str(cfg))
        runs.append({"path": str(d / "trajectory.csv"), "label": f"tau = {tau:g}"})
    d = out / "lindblad"
    cfg = write_json(out / "cfg_lindblad.json",
                     {**base, "method": "lindblad", "dt": 1e-3, "output_dir": str(d)})
    run_cli("riet.cli", "run", str(cfg))
    runs.append({"path": str(d / "trajectory.csv"), "label": "Lindblad", "reference": True})
    spec = write_json(out / "fig_population.json",
                      {"kind": "population_overlay", "inputs": runs,
                       "output": str(out / "population.png"),
                       "title": "weakly coupled, energy gap 3"})
    run_cli("plotkit.cli", str(spec))

    # state preparation fidelity
    d = out / "stateprep"
    cfg = write_json(out / "cfg_stateprep.json",
                     {**base, "method": "stateprep", "tau": 0.1, "t_max": min(t_max, 400.0),
                      "output_dir": str(d)})
    run_cli("riet.cli", "run", str(cfg))
    spec = write_json(out / "fig_fidelity.json",
                      {"kind": "fidelity",
                       "inputs": [{"path": str(d / "trajectory.csv"), "label": "weakly coupled"}],
                       "output": str(out / "fidelity.png")})
    run_cli("plotkit.cli", str(spec))

    # coarse rate sweep
    values = [round(0.5 + 0.25 * i, 2) for i in range(17)] if not args.full else \
             [round(0.5 + 0.05 * i, 2) for i in range(81)]
    d = out / "rate_sweep"
    cfg = write_json(out / "cfg_sweep.json",
                     {**base, "method": "ri", "tau": 0.1,
                      "sweep": {"parameter": "delta_e", "values": values},
                      "output_dir": str(d)})
    run_cli("riet.cli", "sweep", str(cfg))
    spec = write_json(out / "fig_rates.json",
                      {"kind": "rate_sweep",
                       "inputs": [{"path": str(d / "sweep.csv"), "label": "tau = 0.1"}],
                       "output": str(out / "rates.png")})
    run_cli("plotkit.cli", str(spec))
    print(f"figures in {out}/")


if __name__ == "__main__":
    main()
