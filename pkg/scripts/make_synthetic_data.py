"""Generate a synthetic dataset: config, pressure trace, and dense frames.

Simulates the default actuator under a rectangular pulse, resamples the
shape at the sensor spacing, and writes config.json, pressure.csv and
frames.csv into the output directory. The first frame (t = 0) is the
unactuated reference shape.
"""

import argparse
import os

import numpy as np

from bendsim.dynamics import ActuatorGeometry, DynamicsParams, build_chain
from bendsim.integrator import PressureTrace, SimConfig, simulate
from bendsim.io import ModelConfig, write_config
from bendsim.synthetic import DEFAULT_SPACING, dense_frames_from_trajectory


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="synthetic_data")
    parser.add_argument("--links", type=int, default=5)
    parser.add_argument("--pressure-kpa", type=float, default=240.0)
    parser.add_argument("--t-end", type=float, default=1.6)
    parser.add_argument("--n-frames", type=int, default=9)
    parser.add_argument("--spacing-m", type=float, default=DEFAULT_SPACING)
    args = parser.parse_args()

    geometry = ActuatorGeometry(r1=0.014, r2=0.010, wall=0.004,
                                total_length=0.17, total_mass=0.069)
    params = DynamicsParams.uniform(1.6067, 0.008, args.links)
    config = ModelConfig(geometry=geometry, n_links=args.links, params=params)
    chain = build_chain(geometry, args.links)
    trace = PressureTrace.rectangular(0.12, args.t_end * 2,
                                      args.pressure_kpa * 1e3)
    trajectory = simulate(chain, params, geometry, trace,
                          SimConfig(t_end=args.t_end, output_rate=500.0))
    times = np.linspace(0.0, args.t_end, args.n_frames)
    frames = dense_frames_from_trajectory(trajectory, times, args.spacing_m)

    os.makedirs(args.out_dir, exist_ok=True)
    write_config(config, os.path.join(args.out_dir, "config.json"))
    with open(os.path.join(args.out_dir, "pressure.csv"), "w") as fh:
        fh.write("time_s,pressure_pa\n")
        for t, p in trace.samples:
            fh.write(f"{t:.10g},{p:.10g}\n")
    with open(os.path.join(args.out_dir, "frames.csv"), "w") as fh:
        fh.write("time_s,point_index,x_m,y_m\n")
        for frame in frames:
            for i, (x, y) in enumerate(frame.points):
                fh.write(f"{frame.time:.10g},{i},{x:.10g},{y:.10g}\n")
    sizes = sorted({len(f) for f in frames})
    print(f"wrote {args.out_dir}/: {len(frames)} frames "
          f"({sizes[0]}-{sizes[-1]} points each)")


if __name__ == "__main__":
    main()
