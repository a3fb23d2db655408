"""Neural building blocks generated from the discretized PDE.

One explicit solver step is one layer. The per-node 3-tap diffusion stencil,
scaled by the time step and with the Euler identity folded into the center
tap, is a 1D convolution kernel; a shared 3x3 stencil is a 2D convolution
kernel; a full-size kernel with one channel per output neuron is a dense
layer; the traveling-wave substitution tau = z - v t turns depth propagation
into a two-tap recurrence, i.e. an RNN cell; the explicit one-step matrix
assembled from the variable-coefficient stencil supplies the coupling weights
of an RBM energy.

The central contract is generator/solver equivalence: a generated block's
forward pass reproduces the corresponding solver step to rounding. Reaction
terms enter conv blocks additively with weight k, evaluated on the input
slice (diffuse first, react on the pre-update slice); dense layers compose
their activation in the usual y = act(W x + b) sense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, pad, pad_coefficient
from .reactions import ReactionSpec, no_reaction
from .stencil import EllipticCoefficients, diffusion_term, laplacian_1d, apply_stencil


def _finite(name: str, arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class Conv1DBlock:
    """Per-output-node 3-tap kernels with the Euler identity folded in.

    kernels[j] = [W_{j-1}, W_j, W_{j+1}] acts on the padded field around node
    j. ``forward`` equals one explicit solver step for the generating
    coefficients; ``forward_without_identity`` is the residual branch F(x).
    """

    kernels: np.ndarray           # (n, 3)
    grid: GridSpec
    bias: np.ndarray | None = None
    activation: ReactionSpec = no_reaction()

    def __post_init__(self):
        k = _finite("kernels", self.kernels)
        if k.ndim != 2 or k.shape[1] != 3 or k.shape[0] != self.grid.n_points:
            raise ValueError("kernels must be (n_points, 3)")
        object.__setattr__(self, "kernels", k)
        if self.bias is not None:
            b = _finite("bias", self.bias)
            if b.shape != (k.shape[0],):
                raise ValueError("bias must have one entry per output node")
            object.__setattr__(self, "bias", b)

    def forward(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != self.grid.shape:
            raise ValueError(f"field shape {u.shape} does not match grid {self.grid.shape}")
        up = pad(u, self.grid.bc, 1)
        K = self.kernels
        out = K[:, 0] * up[:-2] + K[:, 1] * up[1:-1] + K[:, 2] * up[2:]
        if self.bias is not None:
            out = out + self.bias
        if self.activation.kind != "none":
            out = out + self.grid.k * self.activation(u)
        return out

    def forward_without_identity(self, u: np.ndarray) -> np.ndarray:
        """The residual branch: forward minus the identity skip."""
        return self.forward(u) - np.asarray(u, dtype=float)


@dataclass(frozen=True)
class Conv2DBlock:
    """Shared learnable 3x3 kernel plus the Euler identity.

    The kernel absorbs k*D/h**2, so forward(u) = u + correlate(kernel, u).
    Inputs with a leading channel axis are processed channel by channel.
    """

    kernel: np.ndarray            # (3, 3)
    grid: GridSpec
    channels_in: int = 1
    channels_out: int = 1
    activation: ReactionSpec = no_reaction()

    def __post_init__(self):
        kk = _finite("kernel", self.kernel)
        if kk.shape != (3, 3):
            raise ValueError("2D kernel must be 3x3")
        if self.channels_in < 1 or self.channels_out < 1:
            raise ValueError("channel counts must be >= 1")
        object.__setattr__(self, "kernel", kk)

    def _single(self, u: np.ndarray) -> np.ndarray:
        out = u + apply_stencil(u, self.kernel, self.grid.bc)
        if self.activation.kind != "none":
            out = out + self.grid.k * self.activation(u)
        return out

    def forward(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.ndim == 3:
            return np.stack([self._single(ch) for ch in u])
        if u.shape != self.grid.shape:
            raise ValueError(f"field shape {u.shape} does not match grid {self.grid.shape}")
        return self._single(u)

    def forward_without_identity(self, u: np.ndarray) -> np.ndarray:
        return self.forward(u) - np.asarray(u, dtype=float)


@dataclass(frozen=True)
class DenseBlock:
    """Full-connection layer; channel i of the multi-channel view is row i of W."""

    W: np.ndarray                 # (l, m)
    bias: np.ndarray              # (l,)
    activation: ReactionSpec = no_reaction()

    def __post_init__(self):
        W = _finite("W", self.W)
        b = _finite("bias", self.bias)
        if W.ndim != 2:
            raise ValueError("W must be a matrix")
        if b.shape != (W.shape[0],):
            raise ValueError("bias length must equal the output count")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "bias", b)

    def forward(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.W.shape[1],):
            raise ValueError(f"input length {u.shape} does not match W columns {self.W.shape[1]}")
        return self.activation.activate(self.W @ u + self.bias)

    def forward_without_identity(self, u: np.ndarray) -> np.ndarray:
        # a dense block has no folded identity; its forward IS the residual branch
        return self.forward(u)

    def channel_kernels(self) -> np.ndarray:
        """One full-size kernel per output channel (the rows of W)."""
        return self.W.copy()

    def forward_channels(self, u: np.ndarray) -> np.ndarray:
        """Evaluate via explicit per-channel kernel sums (the multi-channel view)."""
        u = np.asarray(u, dtype=float)
        pre = np.array([float(np.dot(row, u)) for row in self.W]) + self.bias
        return self.activation.activate(pre)


def gen_conv1d(coeffs: EllipticCoefficients, grid: GridSpec) -> Conv1DBlock:
    """Generate the 1D conv layer of one explicit step.

    Kernel row j is k * (1/h**2)[A_{j-1}, -2 A_j, A_{j+1}] plus the identity
    at the center tap; a nonzero convection B is folded into the side taps.
    forward() then equals step_explicit for the same coefficients.
    """
    if grid.ndim != 1:
        raise ValueError("gen_conv1d expects a 1D grid")
    coeffs.validate_against(grid)
    A = coeffs.A
    Ap = pad_coefficient(A, grid.bc, 1)
    scale = grid.k / grid.h**2
    n = grid.n_points
    kernels = np.zeros((n, 3))
    kernels[:, 0] = scale * Ap[:-2]
    kernels[:, 1] = scale * (-2.0 * A) + 1.0
    kernels[:, 2] = scale * Ap[2:]
    if coeffs.B is not None:
        w = grid.k / (2.0 * grid.h)
        kernels[:, 0] -= w * coeffs.B
        kernels[:, 2] += w * coeffs.B
    return Conv1DBlock(kernels, grid, activation=coeffs.C)


def gen_conv2d(kernel_init: np.ndarray, grid: GridSpec, channels: int = 1,
               activation: ReactionSpec = no_reaction()) -> Conv2DBlock:
    """Wrap a 3x3 stencil as a learnable conv layer with the Euler identity.

    Initialize from e.g. (k*D/h**2) * laplacian_2d_9pt() to reproduce a
    diffusion step.
    """
    return Conv2DBlock(np.asarray(kernel_init, dtype=float), grid,
                       channels_in=channels, channels_out=channels,
                       activation=activation)


def gen_dense(W: np.ndarray, bias: np.ndarray,
              activation: ReactionSpec = no_reaction()) -> DenseBlock:
    """Build a dense layer; forward(u) = activation(W u + bias)."""
    return DenseBlock(np.asarray(W, dtype=float), np.asarray(bias, dtype=float),
                      activation)


def residual_step(x: np.ndarray, block) -> np.ndarray:
    """ResNet update x_{l+1} = x_l + F(x_l, W_l)."""
    x = np.asarray(x, dtype=float)
    return x + block.forward_without_identity(x)


def _laplacian_matrix(grid: GridSpec) -> np.ndarray:
    """Dense matrix of the 3-point Laplacian (1/h**2 included) under the grid bc.

    Built from the linear part of apply_stencil (a nonzero dirichlet value is
    an affine offset and does not belong in the matrix).
    """
    n = grid.n_points
    taps = laplacian_1d(grid.h)
    offset = apply_stencil(np.zeros(n), taps, grid.bc)
    M = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        M[:, j] = apply_stencil(e, taps, grid.bc) - offset
    return M


@dataclass(frozen=True)
class RNNCell:
    """Two-tap recurrence of the traveling-wave discretization.

    State update: u_{tau+1} = W1 u_tau + W2 u_{tau-1} + U f(tau); the stacked
    transition [[W1, W2], [I, 0]] shifts the state (W3 = I, W4 = 0 implicit).
    Generation constants are retained for provenance.
    """

    W1: np.ndarray
    W2: np.ndarray
    U: np.ndarray
    Dxy: float
    Dz: float
    v: float
    h: float
    k: float

    def __post_init__(self):
        for name in ("W1", "W2", "U"):
            m = _finite(name, getattr(self, name))
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"{name} must be square")
            object.__setattr__(self, name, m)
        if self.W1.shape != self.W2.shape or self.W1.shape != self.U.shape:
            raise ValueError("W1, W2, U must share a shape")

    @property
    def n(self) -> int:
        return self.W1.shape[0]


def gen_rnn_cell(Dxy: float, Dz: float, v: float, grid: GridSpec) -> RNNCell:
    """Closed-form RNN weights from the traveling-wave recurrence.

    Solving -v (u_{tau+1} - u_tau)/k = Dxy L_T u_tau
            + Dz (u_{tau+1} - 2 u_tau + u_{tau-1})/h**2 + f
    for u_{tau+1} gives, with T = h**2 L_T (unscaled taps) and
    den = v h**2 + k Dz:

        W1 = (v h**2 I + 2 k Dz I - k Dxy T) / den
        W2 = -(k Dz / den) I
        U  = -(k h**2 / den) I

    so k -> 0 freezes the recurrence (W1 -> I, W2, U -> 0) and Dz = 0 gives
    W1 = I - (k/v) Dxy L_T, W2 = 0, U = -(k/v) I.
    """
    if grid.ndim != 1:
        raise ValueError("gen_rnn_cell expects a 1D transverse grid")
    if v <= 0:
        raise ValueError("propagation speed v must be positive")
    h, k = grid.h, grid.k
    den = v * h**2 + k * Dz
    if den == 0.0:
        raise ValueError("degenerate denominator v*h**2 + k*Dz = 0")
    n = grid.n_points
    T = _laplacian_matrix(grid) * h**2
    I = np.eye(n)
    W1 = ((v * h**2 + 2.0 * k * Dz) * I - k * Dxy * T) / den
    W2 = -(k * Dz / den) * I
    U = -(k * h**2 / den) * I
    return RNNCell(W1, W2, U, float(Dxy), float(Dz), float(v), h, k)


def rnn_forward(cell: RNNCell, h_prev: np.ndarray, f_input: np.ndarray) -> np.ndarray:
    """Advance the stacked state [u_tau; u_{tau-1}] one recurrence step."""
    h_prev = np.asarray(h_prev, dtype=float)
    f_input = np.asarray(f_input, dtype=float)
    n = cell.n
    if h_prev.shape != (2 * n,):
        raise ValueError(f"stacked state must have 2n = {2 * n} entries")
    if f_input.shape != (n,):
        raise ValueError(f"input must have n = {n} entries")
    u_t, u_tm1 = h_prev[:n], h_prev[n:]
    top = cell.W1 @ u_t + cell.W2 @ u_tm1 + cell.U @ f_input
    return np.concatenate([top, u_t])


def elman_forward(x: np.ndarray, h_prev: np.ndarray, U: np.ndarray, W: np.ndarray,
                  V: np.ndarray, b_h: np.ndarray, b_o: np.ndarray,
                  act_h: ReactionSpec, act_o: ReactionSpec) -> tuple[np.ndarray, np.ndarray]:
    """Basic Elman network step: h = act_h(Ux + Wh' + b_h), o = act_o(Vh + b_o)."""
    x = np.asarray(x, dtype=float)
    h_prev = np.asarray(h_prev, dtype=float)
    h = act_h.activate(np.asarray(U, dtype=float) @ x
                       + np.asarray(W, dtype=float) @ h_prev
                       + np.asarray(b_h, dtype=float))
    o = act_o.activate(np.asarray(V, dtype=float) @ h + np.asarray(b_o, dtype=float))
    return h, o


@dataclass(frozen=True)
class RBMEnergy:
    """Bilinear energy E(v,h) = -v^T W h - b^T v - c^T h.

    W is assembled from the variable-coefficient stencil band and is not
    symmetrized (it is symmetric only for constant A).
    """

    W: np.ndarray                 # (n_visible, n_hidden)
    b: np.ndarray                 # (n_visible,)
    c: np.ndarray                 # (n_hidden,)

    def __post_init__(self):
        W = _finite("W", self.W)
        b = _finite("b", self.b)
        c = _finite("c", self.c)
        if W.ndim != 2 or b.shape != (W.shape[0],) or c.shape != (W.shape[1],):
            raise ValueError("inconsistent RBM shapes")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)


def gen_rbm(coeffs: EllipticCoefficients, grid: GridSpec,
            visible_bias: np.ndarray | None = None,
            hidden_bias: np.ndarray | None = None) -> RBMEnergy:
    """Assemble RBM couplings from the explicit one-step matrix I + k*diff.

    Visible units are the old slice, hidden units the new slice; the
    tridiagonal band ties each hidden unit to its stencil neighborhood.
    """
    if grid.ndim != 1:
        raise ValueError("gen_rbm expects a 1D grid")
    coeffs.validate_against(grid)
    n = grid.n_points
    offset = diffusion_term(np.zeros(n), coeffs.A, grid)
    M = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        M[:, j] = diffusion_term(e, coeffs.A, grid) - offset
    W = np.eye(n) + grid.k * M
    b = np.zeros(n) if visible_bias is None else np.asarray(visible_bias, dtype=float)
    c = np.zeros(n) if hidden_bias is None else np.asarray(hidden_bias, dtype=float)
    return RBMEnergy(W, b, c)


def rbm_energy(rbm: RBMEnergy, v: np.ndarray, h: np.ndarray) -> float:
    """Joint energy of a visible/hidden configuration."""
    v = np.asarray(v, dtype=float)
    h = np.asarray(h, dtype=float)
    return float(-(v @ rbm.W @ h) - rbm.b @ v - rbm.c @ h)


def rbm_free_energy(rbm: RBMEnergy, v: np.ndarray) -> float:
    """F(v) = -b^T v - sum_h log(1 + exp(c_h + (W^T v)_h)), overflow-safe."""
    v = np.asarray(v, dtype=float)
    if v.shape != (rbm.W.shape[0],):
        raise ValueError("visible vector length does not match W")
    x = rbm.c + rbm.W.T @ v
    # log(1 + e^x) = logaddexp(0, x) avoids overflow for large |x|
    return float(-(rbm.b @ v) - np.sum(np.logaddexp(0.0, x)))
