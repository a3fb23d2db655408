"""Loss functions and the optimizer suite for coefficient learning.

First order: plain gradient descent theta <- theta - eta * g, and Adam with
bias-corrected moments

    m <- b1 m + (1-b1) g          mhat = m / (1 - b1^(t+1))
    v <- b2 v + (1-b2) g^2        vhat = v / (1 - b2^(t+1))
    theta <- theta - eta * mhat / (sqrt(vhat) + eps)

(defaults b1=0.9, b2=0.999, eps=1e-8; elementwise squaring and rooting).

Second order: Newton steps with the pseudoinverse form (H*H)^{-1} H* grad,
realized as a regularized solve because exact invertibility fails
numerically; Gauss-Newton theta - eta (J^T J)^{-1} J^T r for least squares
(the left pseudoinverse of J); and L-BFGS via the standard two-loop recursion
with curvature-guarded history and gamma = s^T y / y^T y initial scaling.

grad_fd is the central-difference gradient oracle every analytic gradient in
this package is checked against.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

Layout = tuple[tuple[str, int, int], ...]


@dataclass(frozen=True)
class ThetaVector:
    """Flat parameter vector plus a named-range layout over its entries."""

    values: np.ndarray
    layout: Layout

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        spans = sorted((start, stop, name) for name, start, stop in self.layout)
        cursor = 0
        for start, stop, name in spans:
            if start != cursor or stop < start:
                raise ValueError(f"layout ranges must be disjoint and cover the vector "
                                 f"(bad range {name!r}: [{start}, {stop}))")
            cursor = stop
        if cursor != v.size:
            raise ValueError(f"layout covers {cursor} entries but vector has {v.size}")

    @classmethod
    def flat(cls, values, name: str = "theta") -> "ThetaVector":
        v = np.asarray(values, dtype=float)
        return cls(v, ((name, 0, v.size),))

    def __len__(self) -> int:
        return self.values.size

    def get(self, name: str) -> np.ndarray:
        for nm, start, stop in self.layout:
            if nm == name:
                return self.values[start:stop]
        raise KeyError(name)

    def with_values(self, values) -> "ThetaVector":
        v = np.asarray(values, dtype=float)
        if v.shape != self.values.shape:
            raise ValueError("replacement values must keep the vector size")
        return ThetaVector(v, self.layout)


def _as_theta(theta) -> ThetaVector:
    if isinstance(theta, ThetaVector):
        return theta
    return ThetaVector.flat(theta)


@dataclass(frozen=True)
class LossSpec:
    """Loss family and its weights: l2_decay(nu) or pde_constrained(beta, lam)."""

    kind: str = "l2_decay"
    nu: float = 0.0
    beta: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in ("l2_decay", "pde_constrained"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        for name in ("nu", "beta", "lam"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def l2_loss(output: np.ndarray, target: np.ndarray, weights: np.ndarray,
            nu: float) -> tuple[float, np.ndarray]:
    """Half squared error with weight decay; returns (loss, d loss/d output)."""
    output = np.asarray(output, dtype=float)
    target = np.asarray(target, dtype=float)
    if output.shape != target.shape:
        raise ValueError("output and target lengths differ")
    diff = output - target
    w = np.asarray(weights, dtype=float)
    loss = 0.5 * (float(diff @ diff) + nu * float(w @ w))
    return loss, diff


def pde_constrained_loss(u: np.ndarray, u_hat: np.ndarray, theta,
                         beta: float, residual: np.ndarray, lam: float) -> float:
    """Penalty form of the constrained objective.

    0.5 ||u - u_hat||^2 + (beta/2) ||theta||^2 + (lam/2) ||residual||^2, with
    the residual being the discrete u_t - O_L u evaluated on the trajectory
    (discretize-then-optimize).
    """
    u = np.ravel(np.asarray(u, dtype=float))
    u_hat = np.ravel(np.asarray(u_hat, dtype=float))
    if u.shape != u_hat.shape:
        raise ValueError("u and u_hat shapes differ")
    th = _as_theta(theta).values
    r = np.ravel(np.asarray(residual, dtype=float))
    d = u - u_hat
    return 0.5 * float(d @ d) + 0.5 * beta * float(th @ th) + 0.5 * lam * float(r @ r)


def sgd_step(theta, g: np.ndarray, eta: float) -> ThetaVector:
    """Plain gradient descent theta - eta * g."""
    th = _as_theta(theta)
    g = np.asarray(g, dtype=float)
    if g.shape != th.values.shape:
        raise ValueError("gradient size does not match theta")
    if eta <= 0:
        raise ValueError("step size eta must be positive")
    return th.with_values(th.values - eta * g)


@dataclass(frozen=True)
class AdamState:
    """Adam moments and hyper-parameters; t counts completed steps."""

    m: np.ndarray
    v: np.ndarray
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    eta: float = 0.001
    t: int = 0

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("decay rates must lie in [0, 1)")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.t < 0:
            raise ValueError("step counter must be >= 0")
        if self.m.shape != self.v.shape:
            raise ValueError("moment vectors must share a shape")
        if np.any(self.v < 0):
            raise ValueError("second moments must be >= 0")

    @classmethod
    def fresh(cls, n: int, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8, eta: float = 0.001) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), beta1, beta2, eps, eta, 0)


def adam_step(state: AdamState, theta, g: np.ndarray) -> tuple[AdamState, ThetaVector]:
    """One Adam update; returns the advanced state and the new parameters."""
    th = _as_theta(theta)
    g = np.asarray(g, dtype=float)
    if g.shape != th.values.shape or g.shape != state.m.shape:
        raise ValueError("gradient size does not match theta/state")
    m = state.beta1 * state.m + (1.0 - state.beta1) * g
    v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    t1 = state.t + 1
    mhat = m / (1.0 - state.beta1**t1)
    vhat = v / (1.0 - state.beta2**t1)
    new_values = th.values - state.eta * mhat / (np.sqrt(vhat) + state.eps)
    return replace(state, m=m, v=v, t=t1), th.with_values(new_values)


def _regularized_normal_solve(M: np.ndarray, rhs: np.ndarray,
                              context: str) -> np.ndarray:
    """Solve (M + mu I) x = rhs with mu = 1e-12 tr(M)/n; warn when M is bad."""
    n = M.shape[0]
    mu = 1e-12 * float(np.trace(M)) / max(n, 1)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e12:
        warnings.warn(f"{context}: ill-conditioned normal matrix "
                      f"(cond ~ {cond:.3e}); using damped solve", RuntimeWarning)
        mu = max(mu, 1e-10 * float(np.trace(M)) / max(n, 1))
    return np.linalg.solve(M + mu * np.eye(n), rhs)


def newton_pinv_step(theta, g: np.ndarray, H: np.ndarray, eta: float) -> ThetaVector:
    """Newton update through the pseudoinverse form (H*H)^{-1} H* g.

    For symmetric invertible H this is theta - eta H^{-1} g; the normal
    matrix is regularized because exact invertibility fails numerically.
    """
    th = _as_theta(theta)
    g = np.asarray(g, dtype=float)
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] != th.values.size:
        raise ValueError("H must be square and sized to theta")
    HtH = H.T @ H
    step = _regularized_normal_solve(HtH, H.T @ g, "newton_pinv_step")
    return th.with_values(th.values - eta * step)


def gauss_newton_step(theta, residuals: np.ndarray, J: np.ndarray,
                      eta: float) -> ThetaVector:
    """Gauss-Newton update theta - eta (J^T J)^{-1} J^T r."""
    th = _as_theta(theta)
    r = np.asarray(residuals, dtype=float)
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != r.size or J.shape[1] != th.values.size:
        raise ValueError("J must be (len(residuals), len(theta))")
    if J.shape[0] < J.shape[1]:
        raise ValueError("Gauss-Newton needs at least as many residuals as parameters")
    step = _regularized_normal_solve(J.T @ J, J.T @ r, "gauss_newton_step")
    return th.with_values(th.values - eta * step)


@dataclass(frozen=True)
class LBFGSState:
    """Curvature-pair history for the limited-memory inverse-Hessian estimate."""

    history: tuple[tuple[np.ndarray, np.ndarray], ...] = ()
    m: int = 10

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("memory size must be >= 1")
        for s, y in self.history:
            if float(np.dot(s, y)) <= 0.0:
                raise ValueError("stored pairs must satisfy s^T y > 0")


def lbfgs_update(state: LBFGSState, s: np.ndarray, y: np.ndarray) -> LBFGSState:
    """Insert a curvature pair, dropping the oldest beyond the memory size.

    Pairs with s^T y <= 0 are skipped; the inverse-Hessian estimate must stay
    positive definite.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    if float(np.dot(s, y)) <= 0.0:
        return state
    history = state.history + ((s, y),)
    if len(history) > state.m:
        history = history[-state.m:]
    return replace(state, history=history)


def lbfgs_direction(state: LBFGSState, g: np.ndarray) -> np.ndarray:
    """Two-loop recursion direction -H~ g; plain -g with empty history."""
    g = np.asarray(g, dtype=float)
    if not state.history:
        return -g
    q = g.copy()
    alphas = []
    rhos = []
    for s, y in reversed(state.history):
        rho = 1.0 / float(np.dot(y, s))
        alpha = rho * float(np.dot(s, q))
        q -= alpha * y
        alphas.append(alpha)
        rhos.append(rho)
    s_new, y_new = state.history[-1]
    gamma = float(np.dot(s_new, y_new)) / float(np.dot(y_new, y_new))
    r = gamma * q
    for (s, y), alpha, rho in zip(state.history, reversed(alphas), reversed(rhos)):
        beta = rho * float(np.dot(y, r))
        r += s * (alpha - beta)
    return -r


def grad_fd(loss_fn, theta, eps: float) -> np.ndarray:
    """Central-difference gradient (L(t+eps e_i) - L(t-eps e_i)) / (2 eps).

    The independent oracle for every analytic gradient here; raises with the
    offending coordinate index when an evaluation is non-finite.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    th = _as_theta(theta)
    base = th.values
    wrap = (lambda v: loss_fn(th.with_values(v))) if isinstance(theta, ThetaVector) \
        else (lambda v: loss_fn(v))
    grad = np.empty(base.size)
    for i in range(base.size):
        vp = base.copy()
        vp[i] += eps
        vm = base.copy()
        vm[i] -= eps
        fp = float(wrap(vp))
        fm = float(wrap(vm))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise FloatingPointError(f"non-finite loss at coordinate {i}")
        grad[i] = (fp - fm) / (2.0 * eps)
    return grad
