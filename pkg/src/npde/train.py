"""Supervised training loop binding pipelines, losses, and optimizers.

A pipeline is an ordered stack of differentiable layers whose parameters live
in one flat ThetaVector:

    DenseLayer      y = act(W x + b), parameters W and b
    DiffusionLayer  n unrolled explicit diffusion steps with a learnable
                    per-node coefficient field A (the medium being trained)

Gradients are exact gradients of the discrete unrolled computation, obtained
by reverse accumulation through the steps; grad_fd is the acceptance oracle
they are checked against. Training follows the plain supervised loop: fix the
initial/boundary data, randomize theta (uniform in +-1/sqrt(fan_in) per
tensor), solve forward, take an optimizer step on the L2-with-weight-decay
loss, and repeat until the target loss or the epoch cap is reached. Gradients
are full batch (mean over samples); runs are deterministic given the seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, pad, pad_coefficient
from .reactions import ReactionSpec, no_reaction
from .stencil import diffusion_term
from .optim import (AdamState, LBFGSState, LossSpec, ThetaVector, adam_step,
                    gauss_newton_step, lbfgs_direction, lbfgs_update, sgd_step)

DIVERGENCE_LOSS = 1e12


class DenseLayer:
    """Fully connected layer with a composed activation."""

    def __init__(self, n_in: int, n_out: int,
                 activation: ReactionSpec = no_reaction()):
        if n_in < 1 or n_out < 1:
            raise ValueError("layer sizes must be >= 1")
        if not activation.differentiable:
            raise ValueError(f"activation {activation.kind!r} is not differentiable")
        self.n_in = n_in
        self.n_out = n_out
        self.activation = activation

    def param_shapes(self):
        return [("W", (self.n_out, self.n_in)), ("b", (self.n_out,))]

    @property
    def fan_in(self) -> int:
        return self.n_in

    def forward(self, params, x):
        W, b = params["W"], params["b"]
        z = W @ x + b
        return self.activation.activate(z), (x, z)

    def backward(self, params, cache, gy):
        x, z = cache
        gz = gy * self.activation.activate_deriv(z)
        return params["W"].T @ gz, {"W": np.outer(gz, x), "b": gz}


class DiffusionLayer:
    """Unrolled explicit diffusion steps with a learnable coefficient field A.

    Each step is u <- u + k * diff(A, u) + k * C(u) on the layer's 1D grid,
    exactly the solver's explicit update, so the trained A drops straight
    into gen_conv1d / step_explicit. n_steps = 0 is the identity map (the
    parameters then only feel weight decay).
    """

    def __init__(self, grid: GridSpec, n_steps: int,
                 reaction: ReactionSpec = no_reaction()):
        if grid.ndim != 1:
            raise ValueError("DiffusionLayer supports 1D grids")
        if n_steps < 0:
            raise ValueError("n_steps must be >= 0")
        if not reaction.differentiable:
            raise ValueError(f"reaction {reaction.kind!r} is not differentiable")
        self.grid = grid
        self.n_steps = n_steps
        self.reaction = reaction

    def param_shapes(self):
        return [("A", (self.grid.n_points,))]

    @property
    def fan_in(self) -> int:
        return 3  # stencil support

    def forward(self, params, x):
        A = params["A"]
        u = np.asarray(x, dtype=float)
        states = [u]
        k = self.grid.k
        for _ in range(self.n_steps):
            u = u + k * diffusion_term(u, A, self.grid)
            if self.reaction.kind != "none":
                u = u + k * self.reaction(states[-1])
            states.append(u)
        return u, states

    def backward(self, params, cache, gy):
        A = params["A"]
        grid = self.grid
        k, h2 = grid.k, grid.h**2
        bc_kind = grid.bc.kind
        coeff_kind = "extend" if bc_kind == "dirichlet" else bc_kind
        Ap = pad_coefficient(A, grid.bc, 1)
        gA = np.zeros_like(A)
        g = np.asarray(gy, dtype=float).copy()
        for u_prev in reversed(cache[:-1]):
            up = pad(u_prev, grid.bc, 1)
            # adjoint of the second difference of the padded product Ap * up
            c = k / h2
            gP = np.zeros(up.size)
            gP[:-2] += c * g
            gP[1:-1] -= 2.0 * c * g
            gP[2:] += c * g
            gu = g + _pad_adjoint_1d(gP * Ap, bc_kind)
            gA += _pad_adjoint_1d(gP * up, coeff_kind)
            if self.reaction.kind != "none":
                gu = gu + k * self.reaction.deriv(u_prev) * g
            g = gu
        return g, {"A": gA}


def _pad_adjoint_1d(gpad: np.ndarray, kind: str) -> np.ndarray:
    """Scatter width-1 ghost-cell cotangents back onto their source nodes."""
    core = gpad[1:-1].copy()
    if kind == "periodic":
        core[-1] += gpad[0]
        core[0] += gpad[-1]
    elif kind == "extend":
        core[0] += gpad[0]
        core[-1] += gpad[-1]
    elif kind == "mirror":
        core[1] += gpad[0]
        core[-2] += gpad[-1]
    # dirichlet ghosts are constants: no contribution
    return core


class Pipeline:
    """Ordered differentiable layers sharing one flat parameter vector."""

    def __init__(self, layers: list):
        self.layers = list(layers)
        layout = []
        cursor = 0
        for i, layer in enumerate(self.layers):
            for name, shape in layer.param_shapes():
                size = int(np.prod(shape))
                layout.append((f"layer{i}.{name}", cursor, cursor + size))
                cursor += size
        self.layout: tuple = tuple(layout)
        self.n_params = cursor

    @classmethod
    def dense(cls, dims: list[int], activations: list[ReactionSpec]) -> "Pipeline":
        """An MLP with dims = [n_in, hidden..., n_out]; one activation per layer."""
        if len(activations) != len(dims) - 1:
            raise ValueError("need one activation per layer")
        return cls([DenseLayer(dims[i], dims[i + 1], activations[i])
                    for i in range(len(dims) - 1)])

    @classmethod
    def from_blocks(cls, blocks) -> "Pipeline":
        """Build from generated DenseBlocks (shapes and activations carry over)."""
        layers = [DenseLayer(b.W.shape[1], b.W.shape[0], b.activation) for b in blocks]
        pipe = cls(layers)
        pipe._block_theta = np.concatenate(
            [np.concatenate([b.W.ravel(), b.bias]) for b in blocks]) if blocks else np.zeros(0)
        return pipe

    def theta_from_blocks(self) -> ThetaVector:
        if not hasattr(self, "_block_theta"):
            raise ValueError("pipeline was not built from blocks")
        return ThetaVector(self._block_theta.copy(), self.layout)

    def init_theta(self, rng: np.random.Generator) -> ThetaVector:
        """Uniform +-1/sqrt(fan_in) per tensor, in layer order."""
        values = np.empty(self.n_params)
        cursor = 0
        for layer in self.layers:
            bound = 1.0 / np.sqrt(layer.fan_in)
            for _, shape in layer.param_shapes():
                size = int(np.prod(shape))
                values[cursor:cursor + size] = rng.uniform(-bound, bound, size)
                cursor += size
        return ThetaVector(values, self.layout)

    def _unpack(self, theta: ThetaVector):
        per_layer = []
        cursor = 0
        for layer in self.layers:
            params = {}
            for name, shape in layer.param_shapes():
                size = int(np.prod(shape))
                params[name] = theta.values[cursor:cursor + size].reshape(shape)
                cursor += size
            per_layer.append(params)
        return per_layer

    def forward(self, theta: ThetaVector, x: np.ndarray) -> np.ndarray:
        out, _ = self.forward_with_caches(theta, x)
        return out

    def forward_with_caches(self, theta: ThetaVector, x: np.ndarray):
        params = self._unpack(theta)
        caches = []
        out = np.asarray(x, dtype=float)
        for layer, p in zip(self.layers, params):
            out, cache = layer.forward(p, out)
            caches.append(cache)
        return out, caches

    def backward(self, theta: ThetaVector, caches, grad_out: np.ndarray) -> np.ndarray:
        params = self._unpack(theta)
        grad = np.zeros(self.n_params)
        cursor = self.n_params
        g = np.asarray(grad_out, dtype=float)
        for layer, p, cache in zip(reversed(self.layers), reversed(params),
                                   reversed(caches)):
            g, grads = layer.backward(p, cache, g)
            for name, shape in reversed(layer.param_shapes()):
                size = int(np.prod(shape))
                cursor -= size
                grad[cursor:cursor + size] = grads[name].ravel()
        return grad


def pipeline_gradient(model: Pipeline, sample, loss: LossSpec,
                      theta: ThetaVector) -> np.ndarray:
    """Exact single-sample gradient of the discrete unrolled computation.

    Matches grad_fd within 1e-5 relative (absolute floor 1e-8) by contract.
    """
    x, target = sample
    out, caches = model.forward_with_caches(theta, x)
    grad = model.backward(theta, caches, out - np.asarray(target, dtype=float))
    if loss.nu > 0:
        grad = grad + loss.nu * theta.values
    return grad


def batch_loss(model: Pipeline, theta: ThetaVector, samples,
               loss: LossSpec) -> float:
    """Mean per-sample half squared error plus one weight-decay term."""
    total = 0.0
    for x, target in samples:
        diff = model.forward(theta, x) - np.asarray(target, dtype=float)
        total += 0.5 * float(diff @ diff)
    total /= len(samples)
    if loss.nu > 0:
        total += 0.5 * loss.nu * float(theta.values @ theta.values)
    return total


def batch_gradient(model: Pipeline, theta: ThetaVector, samples,
                   loss: LossSpec) -> np.ndarray:
    grad = np.zeros(model.n_params)
    for x, target in samples:
        out, caches = model.forward_with_caches(theta, x)
        grad += model.backward(theta, caches, out - np.asarray(target, dtype=float))
    grad /= len(samples)
    if loss.nu > 0:
        grad += loss.nu * theta.values
    return grad


def residuals_and_jacobian(model: Pipeline, theta: ThetaVector, samples):
    """Stacked residuals out - target and their exact Jacobian w.r.t. theta.

    Jacobian rows come from one reverse pass per residual component.
    """
    residuals = []
    rows = []
    for x, target in samples:
        out, caches = model.forward_with_caches(theta, x)
        res = out - np.asarray(target, dtype=float)
        residuals.append(res)
        for i in range(res.size):
            one_hot = np.zeros(res.size)
            one_hot[i] = 1.0
            rows.append(model.backward(theta, caches, one_hot))
    return np.concatenate(residuals), np.asarray(rows)


@dataclass(frozen=True)
class Dataset:
    """Supervised samples (input vector, target vector) plus a train/val split."""

    samples: list
    split: tuple[float, float] = (1.0, 0.0)

    def __post_init__(self):
        if not self.samples:
            raise ValueError("dataset needs at least one sample")
        if not np.isclose(sum(self.split), 1.0):
            raise ValueError("split fractions must sum to 1")
        if self.n_train < 1:
            raise ValueError("dataset needs at least one training sample")
        d_in = {np.asarray(x).shape for x, _ in self.samples}
        d_out = {np.asarray(y).shape for _, y in self.samples}
        if len(d_in) != 1 or len(d_out) != 1:
            raise ValueError("samples are not dimensionally consistent")

    @property
    def n_train(self) -> int:
        return max(1, int(round(self.split[0] * len(self.samples))))

    @property
    def train_samples(self) -> list:
        return self.samples[:self.n_train]

    @property
    def validation_samples(self) -> list:
        return self.samples[self.n_train:]


def _warn_if_unstable(model: Pipeline, theta: ThetaVector) -> None:
    """Flag explicit-unstable initial coefficients in unrolled solver layers.

    Only a warning: the coefficients are the thing being learned and may move
    into (or out of) the stable region during training.
    """
    for i, layer in enumerate(model.layers):
        if isinstance(layer, DiffusionLayer) and layer.n_steps > 0:
            A = theta.get(f"layer{i}.A")
            max_r_a = layer.grid.r * float(np.max(np.abs(A)))
            if max_r_a > 0.5:
                warnings.warn(
                    f"layer{i}: initial coefficients are explicit-unstable "
                    f"(r*max|A| = {max_r_a:.3g} > 0.5)", RuntimeWarning)


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "adam"
    eta: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    memory: int = 10

    def __post_init__(self):
        if self.kind not in ("sgd", "adam", "lbfgs", "gauss_newton"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch losses and the final parameters of one training run."""

    loss_curve: np.ndarray
    final_theta: ThetaVector
    converged: bool
    stop_reason: str                # target_loss | max_epochs | divergence
    final_loss: float
    best_loss: float

    @property
    def epochs(self) -> int:
        return len(self.loss_curve)

    def summary(self) -> str:
        return (f"epochs={self.epochs} loss={self.final_loss:.17g} "
                f"converged={str(self.converged).lower()}")


def train_supervised(model: Pipeline, data: Dataset, loss: LossSpec,
                     opt: OptimizerConfig, seed: int, max_epochs: int,
                     target_loss: float,
                     theta0: ThetaVector | None = None) -> TrainReport:
    """Deterministic full-batch training until target_loss or max_epochs.

    Theta starts from ``theta0`` when given, else seed-randomized. Divergence
    (non-finite loss or loss above 1e12) stops the run and keeps the last
    finite parameters.
    """
    if loss.kind != "l2_decay":
        raise ValueError("train_supervised optimizes the L2-with-decay loss")
    if max_epochs < 0:
        raise ValueError("max_epochs must be >= 0")
    rng = np.random.default_rng(seed)
    theta = theta0 if theta0 is not None else model.init_theta(rng)
    samples = data.train_samples
    _warn_if_unstable(model, theta)

    adam = AdamState.fresh(model.n_params, opt.beta1, opt.beta2, opt.eps, opt.eta) \
        if opt.kind == "adam" else None
    lbfgs = LBFGSState(m=opt.memory) if opt.kind == "lbfgs" else None
    prev_theta_g = None

    current = batch_loss(model, theta, samples, loss)
    best = current
    curve: list[float] = []
    if current <= target_loss:
        return TrainReport(np.asarray(curve), theta, True, "target_loss",
                           current, best)

    stop_reason = "max_epochs"
    converged = False
    for _ in range(max_epochs):
        if opt.kind == "gauss_newton":
            r, J = residuals_and_jacobian(model, theta, samples)
            new_theta = gauss_newton_step(theta, r, J, opt.eta)
        else:
            g = batch_gradient(model, theta, samples, loss)
            if opt.kind == "sgd":
                new_theta = sgd_step(theta, g, opt.eta)
            elif opt.kind == "adam":
                adam, new_theta = adam_step(adam, theta, g)
            else:
                if prev_theta_g is not None:
                    s = theta.values - prev_theta_g[0]
                    y = g - prev_theta_g[1]
                    lbfgs = lbfgs_update(lbfgs, s, y)
                direction = lbfgs_direction(lbfgs, g)
                new_theta = theta.with_values(theta.values + opt.eta * direction)
                prev_theta_g = (theta.values.copy(), g.copy())
        new_loss = batch_loss(model, new_theta, samples, loss)
        if not np.isfinite(new_loss) or new_loss > DIVERGENCE_LOSS:
            stop_reason = "divergence"
            break
        theta = new_theta
        current = new_loss
        curve.append(current)
        best = min(best, current)
        if current <= target_loss:
            stop_reason = "target_loss"
            converged = True
            break
    return TrainReport(np.asarray(curve), theta, converged, stop_reason,
                       current, best)
