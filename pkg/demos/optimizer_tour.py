#!/usr/bin/env python3
"""Race the optimizer suite on one seeded least-squares bowl.

Gauss-Newton lands on the minimizer in a single step (the step IS the
normal-equation solve), Newton with the pseudoinverse Hessian does the same,
L-BFGS takes a handful of curvature pairs, Adam and SGD crawl. Also shows the
gradient-flow view: plain descent on the 1D quadratic is exact exponential
decay.
"""

import numpy as np

from npde import (AdamState, LBFGSState, adam_step, gauss_newton_step,
                  lbfgs_direction, lbfgs_update, newton_pinv_step, sgd_step)


def loss(J, b, theta):
    r = J @ theta - b
    return 0.5 * float(r @ r)


if __name__ == "__main__":
    rng = np.random.default_rng(2)
    J = rng.standard_normal((40, 6)) * np.array([1, 1, 1, 5, 5, 0.3])
    b = rng.standard_normal(40)
    theta0 = rng.standard_normal(6)
    budget = 60
    print(f"least squares, 6 parameters, condition number "
          f"{np.linalg.cond(J.T @ J):.0f}, {budget} iterations each\n")

    theta = theta0.copy()
    for i in range(budget):
        theta = sgd_step(theta, J.T @ (J @ theta - b), 0.001).values
    print(f"  sgd(eta=0.001)        final loss {loss(J, b, theta):.6f}")

    state = AdamState.fresh(6, eta=0.05)
    theta = theta0.copy()
    for i in range(budget):
        state, th = adam_step(state, theta, J.T @ (J @ theta - b))
        theta = th.values
    print(f"  adam(eta=0.05)        final loss {loss(J, b, theta):.6f}")

    theta = theta0.copy()
    lb = LBFGSState(m=10)
    g = J.T @ (J @ theta - b)
    for i in range(budget):
        d = lbfgs_direction(lb, g)
        new_theta = theta + 0.5 * d
        new_g = J.T @ (J @ new_theta - b)
        lb = lbfgs_update(lb, new_theta - theta, new_g - g)
        theta, g = new_theta, new_g
    print(f"  lbfgs(eta=0.5, m=10)  final loss {loss(J, b, theta):.6f}")

    th = newton_pinv_step(theta0, J.T @ (J @ theta0 - b), J.T @ J, 1.0)
    print(f"  newton-pinv, 1 step   final loss {loss(J, b, th.values):.6f}")

    th = gauss_newton_step(theta0, J @ theta0 - b, J, 1.0)
    print(f"  gauss-newton, 1 step  final loss {loss(J, b, th.values):.6f}")

    residual, *_ = np.linalg.lstsq(J, b, rcond=None)
    print(f"  normal-equation floor {loss(J, b, residual):.6f}\n")

    theta = np.array([1.0])
    for t in range(1, 6):
        theta = sgd_step(theta, theta, 0.5).values
        print(f"  gradient flow on 0.5*theta^2: step {t}, "
              f"theta = {theta[0]} = (1-eta)^{t}")
