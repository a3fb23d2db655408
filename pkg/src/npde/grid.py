"""Grids, boundary conditions, and ghost-cell padding.

Every solver and generated block in this package works on a uniform grid
described by two step sizes: the spatial step ``h`` (network width per node)
and the time step ``k`` (one layer per step). Boundary handling is done by
padding fields with ghost cells before applying a stencil:

    periodic   ghost cells wrap around the domain
    mirror     ghost cells reflect about the boundary node (edge not repeated)
    extend     ghost cells replicate the edge node
    dirichlet  ghost cells are filled with a fixed boundary value

Mirror padding reflects without duplicating the edge cell, which preserves a
zero normal derivative to first order. 2D grids are square (same n_points and
h on both axes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PAD_KINDS = ("dirichlet", "periodic", "mirror", "extend")


@dataclass(frozen=True)
class BoundaryCondition:
    """One padding rule per grid; ``value`` is only meaningful for dirichlet."""

    kind: str
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in _PAD_KINDS:
            raise ValueError(f"unknown boundary condition kind {self.kind!r}")
        if not np.isfinite(self.value):
            raise ValueError("dirichlet boundary value must be finite")


def dirichlet(value: float = 0.0) -> BoundaryCondition:
    return BoundaryCondition("dirichlet", float(value))


def periodic() -> BoundaryCondition:
    return BoundaryCondition("periodic")


def mirror() -> BoundaryCondition:
    return BoundaryCondition("mirror")


def extend() -> BoundaryCondition:
    return BoundaryCondition("extend")


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid: ``n_points`` per axis, spatial step ``h``, time step ``k``.

    ``h`` and ``k`` are the two hyper-parameters controlling the width and the
    depth of the generated network; ``r = k/h**2`` is the mesh ratio that
    governs explicit stability.
    """

    n_points: int
    h: float
    k: float
    bc: BoundaryCondition
    ndim: int = 1

    def __post_init__(self):
        if self.ndim not in (1, 2):
            raise ValueError("only 1D and 2D grids are supported")
        if self.n_points < 3:
            raise ValueError("grid too small: need n_points >= 3 for a 3-point stencil")
        for name in ("h", "k"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and positive, got {v}")

    @property
    def r(self) -> float:
        """Mesh ratio k/h**2."""
        return self.k / self.h**2

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_points,) * self.ndim


def make_grid(n_points: int, h: float, k: float, bc: BoundaryCondition,
              ndim: int = 1) -> GridSpec:
    """Validate and build a GridSpec. Rejects n_points < 3 and non-positive h, k."""
    return GridSpec(int(n_points), float(h), float(k), bc, ndim)


@dataclass(frozen=True)
class FieldState:
    """One time slice of the field u; ``components`` is 2 for Turing systems.

    Two-component states store the U and V channels stacked along axis 0.
    Values must be finite and shaped to the owning grid.
    """

    values: np.ndarray
    components: int = 1

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite entries")
        if self.components not in (1, 2):
            raise ValueError("components must be 1 or 2")
        if self.components == 2 and (v.ndim < 2 or v.shape[0] != 2):
            raise ValueError("two-component fields stack U and V on axis 0")
        object.__setattr__(self, "values", v)

    def validate_against(self, grid: GridSpec) -> None:
        expected = grid.shape if self.components == 1 else (2, *grid.shape)
        if self.values.shape != expected:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid shape {expected}")


def as_field(values, grid: GridSpec) -> np.ndarray:
    """Coerce ``values`` to a float array validated against ``grid``."""
    state = FieldState(np.asarray(values, dtype=float))
    state.validate_against(grid)
    return state.values


def pad(field: np.ndarray, bc: BoundaryCondition, width: int = 1) -> np.ndarray:
    """Extend ``field`` by ``width`` ghost cells per side along every axis.

    periodic wraps, mirror reflects without repeating the edge cell, extend
    replicates the edge cell, dirichlet fills the boundary value. Interior
    values are always unchanged.
    """
    if width < 1:
        raise ValueError("pad width must be >= 1")
    field = np.asarray(field, dtype=float)
    if bc.kind == "periodic":
        return np.pad(field, width, mode="wrap")
    if bc.kind == "mirror":
        # np.pad 'reflect' excludes the edge sample, matching the mirror rule;
        # it needs width <= n-1 source cells to reflect from.
        if min(field.shape) - 1 < width:
            raise ValueError("mirror pad width exceeds reflectable interior")
        return np.pad(field, width, mode="reflect")
    if bc.kind == "extend":
        return np.pad(field, width, mode="edge")
    return np.pad(field, width, mode="constant", constant_values=bc.value)


def pad_coefficient(coeff: np.ndarray, bc: BoundaryCondition, width: int = 1) -> np.ndarray:
    """Pad a coefficient field (A or B) to supply ghost-node medium values.

    Coefficients follow the grid geometry for periodic/mirror/extend; under
    dirichlet the boundary value constrains u, not the medium, so the
    coefficient is edge-replicated instead.
    """
    if bc.kind == "dirichlet":
        return pad(coeff, extend(), width)
    return pad(coeff, bc, width)


def unpad(field: np.ndarray, width: int = 1) -> np.ndarray:
    """Drop ``width`` ghost cells per side (inverse of pad on the interior)."""
    sl = (slice(width, -width),) * np.ndim(field)
    return np.asarray(field)[sl]
