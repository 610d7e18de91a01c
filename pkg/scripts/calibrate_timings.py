"""Development calibration: full-scale rate agreement and dt convergence.

Not part of the test suite; prints timings used to pick sweep step sizes.
"""

import os
import time

os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import numpy as np  # noqa: E402

from riet.analysis import fit_transfer_rate  # noqa: E402
from riet.dynamics import RIConfig, evolve_ri, integrate_lindblad  # noqa: E402
from riet.model import ModelParams, build_da, build_initial_state  # noqa: E402


def lind_rate(params, t_max, dt):
    ops = build_da(params)
    rho0 = build_initial_state(ops, params)
    t0 = time.perf_counter()
    traj = integrate_lindblad(rho0, ops, t_max, dt, max(1, int(round(0.1 / dt))))
    el = time.perf_counter() - t0
    fit = fit_transfer_rate(traj)
    return fit.k, el


def ri_rate(params, t_max, tau):
    ops = build_da(params)
    rho0 = build_initial_state(ops, params)
    t0 = time.perf_counter()
    cfg = RIConfig(tau=tau, steps=int(round(t_max / tau)),
                   record_stride=max(1, int(round(0.1 / tau))))
    traj = evolve_ri(rho0, ops, cfg)
    el = time.perf_counter() - t0
    fit = fit_transfer_rate(traj)
    return fit.k, el


def main():
    weak = ModelParams(kind="DA", v=0.1, kbt=1.0, gamma_cfg=0.01, n_levels=16,
                       delta_e=3.0, lam=1.0)
    k_ri, el = ri_rate(weak, 1000.0, 0.1)
    print(f"weak RI  tau=0.1 : k={k_ri:.6e}  ({el:.1f}s)", flush=True)
    k_l, el = lind_rate(weak, 1000.0, 1e-3)
    print(f"weak Lind dt=1e-3: k={k_l:.6e}  ({el:.1f}s)  RIdiff={abs(k_ri-k_l)/k_l:.3%}",
          flush=True)

    hot = ModelParams(kind="DA", v=0.1, kbt=2.0, gamma_cfg=0.1, n_levels=32,
                      delta_e=20.0, lam=20.0)
    k_hot = {}
    for dt in (4e-3, 2e-3, 1e-3):
        k, el = lind_rate(hot, 1000.0, dt)
        k_hot[dt] = k
        print(f"hot Lind dt={dt:g} : k={k:.6e}  ({el:.1f}s)", flush=True)
    print(f"hot 4e-3 vs 1e-3: {abs(k_hot[4e-3]-k_hot[1e-3])/k_hot[1e-3]:.4%}", flush=True)
    print(f"hot 2e-3 vs 1e-3: {abs(k_hot[2e-3]-k_hot[1e-3])/k_hot[1e-3]:.4%}", flush=True)
    k_ri_hot, el = ri_rate(hot, 1000.0, 0.01)
    print(f"hot RI tau=0.01 : k={k_ri_hot:.6e}  ({el:.1f}s)  "
          f"Lind diff={abs(k_ri_hot-k_hot[1e-3])/k_hot[1e-3]:.3%}", flush=True)

    # edge of the sweep range, worst case for RK4 stability
    hot35 = ModelParams(kind="DA", v=0.1, kbt=2.0, gamma_cfg=0.1, n_levels=32,
                        delta_e=35.0, lam=20.0)
    for dt in (4e-3, 2e-3):
        k, el = lind_rate(hot35, 1000.0, dt)
        print(f"hot dE=35 dt={dt:g}: k={k:.6e}  ({el:.1f}s)", flush=True)


if __name__ == "__main__":
    main()
