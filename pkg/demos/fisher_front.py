#!/usr/bin/env python3
"""Measure the traveling-front speed of the logistic reaction-diffusion run.

With growth rate r and diffusion D the pulled front invades the unstable
state at speed 2*sqrt(r*D). A step initial condition relaxes onto that front;
the measured speed approaches the bound from below as the transient decays.
"""

import numpy as np

from npde import (EllipticCoefficients, extend, fisher, fisher_min_front_speed,
                  front_position, front_speed, make_grid, step_explicit)

R, D = 1.0, 1.0
N, H, K = 4000, 0.1, 0.004

if __name__ == "__main__":
    grid = make_grid(N, H, K, extend())
    x = H * np.arange(N)
    u = np.where(x <= 20.0, 1.0, 0.0)
    coeffs = EllipticCoefficients.constant(grid, D, reaction=fisher(R))

    times, positions = [], []
    for step in range(1, 30001):
        u = step_explicit(u, coeffs, grid)
        if step % 500 == 0:
            times.append(step * K)
            positions.append(front_position(u, H))

    measured = front_speed(np.asarray(positions), np.asarray(times))
    target = fisher_min_front_speed(R, D)
    print(f"r={R} D={D}: theoretical minimal speed {target}")
    print(f"front positions tracked at the u=0.5 crossing, "
          f"{len(times)} samples to T={times[-1]:g}")
    print(f"least-squares speed over the second half: {measured:.4f} "
          f"({abs(measured - target) / target:.2%} off)")
