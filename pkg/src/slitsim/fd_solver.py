"""Direct Schrodinger integration via the real/imaginary split.

    d(psi_R)/dt = -(1/2) lap psi_I + V psi_I
    d(psi_I)/dt = +(1/2) lap psi_R - V psi_R

Spatial derivatives use 4th-order stencils: the 5-point central formula in
the interior and 6-point one-sided / skewed formulas at the two outermost
points per side (no boundary condition is imposed; the grid is chosen wide
enough that the field is negligible at the edges). Time stepping is
classic RK4 on the coupled 2N-component system.
"""

from dataclasses import dataclass

import numpy as np

from .core import MIN_POINTS, ComplexField
from .errors import GridTooSmall, NormDrift
from . import core

# Second-derivative boundary weights, common factor 1/(12 delta^2); the
# interior uses the 5-point central formula, the outermost point the fully
# one-sided 6-point formula, its neighbor the skewed 6-point formula
# (written out in place below).
_C_EDGE = (45.0, -154.0, 214.0, -156.0, 61.0, -10.0)       # at index 0

# First-derivative boundary weights, common factor 1/(12 delta); the
# interior uses the 5-point central formula.
_D_EDGE = (-25.0, 48.0, -36.0, 16.0, -3.0)                 # at index 0
_D_SKEW = (-3.0, -10.0, 18.0, -6.0, 1.0)                   # at index 1


def _check_axis_length(n):
    if n < MIN_POINTS:
        raise GridTooSmall(
            f"stencils need at least {MIN_POINTS} points per axis, got {n}")


def _second_derivative_axis(f, delta, axis=0):
    """4th-order second derivative along one axis of a 1D or 2D array."""
    f = np.moveaxis(f, axis, 0)
    _check_axis_length(f.shape[0])
    out = np.empty_like(f, dtype=float)
    out[2:-2] = (-30.0 * f[2:-2]
                 + 16.0 * (f[3:-1] + f[1:-3])
                 - (f[4:] + f[:-4]))
    out[0] = sum(c * f[k] for k, c in enumerate(_C_EDGE))
    out[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2]
              + 14.0 * f[3] - 6.0 * f[4] + f[5])
    out[-1] = sum(c * f[-1 - k] for k, c in enumerate(_C_EDGE))
    out[-2] = (10.0 * f[-1] - 15.0 * f[-2] - 4.0 * f[-3]
               + 14.0 * f[-4] - 6.0 * f[-5] + f[-6])
    out /= 12.0 * delta ** 2
    return np.moveaxis(out, 0, axis)


def _first_derivative_axis(f, delta, axis=0):
    """4th-order first derivative along one axis of a 1D or 2D array."""
    f = np.moveaxis(f, axis, 0)
    _check_axis_length(f.shape[0])
    out = np.empty_like(f, dtype=float)
    out[2:-2] = 8.0 * (f[3:-1] - f[1:-3]) - (f[4:] - f[:-4])
    out[0] = sum(c * f[k] for k, c in enumerate(_D_EDGE))
    out[1] = sum(c * f[k] for k, c in enumerate(_D_SKEW))
    out[-1] = -sum(c * f[-1 - k] for k, c in enumerate(_D_EDGE))
    out[-2] = -sum(c * f[-1 - k] for k, c in enumerate(_D_SKEW))
    out /= 12.0 * delta
    return np.moveaxis(out, 0, axis)


def laplacian_1d(values, grid):
    """4th-order Laplacian of a 1D sampled function."""
    return _second_derivative_axis(np.asarray(values, dtype=float),
                                   grid.delta)


def laplacian_2d(values, grid):
    """Axis-by-axis 4th-order Laplacian on a square 2D grid."""
    f = np.asarray(values, dtype=float)
    return (_second_derivative_axis(f, grid.delta, axis=0)
            + _second_derivative_axis(f, grid.delta, axis=1))


def laplacian(values, grid):
    if grid.dim == 1:
        return laplacian_1d(values, grid)
    return laplacian_2d(values, grid)


def gradient(values, grid):
    """Tuple of 4th-order first derivatives, one per axis."""
    f = np.asarray(values, dtype=float)
    return tuple(_first_derivative_axis(f, grid.delta, axis=a)
                 for a in range(grid.dim))


def stencil_plan(grid):
    """Per-index stencil classification along one axis (diagnostic aid)."""
    labels = ["interior"] * grid.n
    labels[0] = "left_edge"
    labels[1] = "left_skew"
    labels[-2] = "right_skew"
    labels[-1] = "right_edge"
    return tuple(labels)


@dataclass(frozen=True)
class FdState:
    """Field plus time plus the (usually zero) external potential."""

    field: ComplexField
    t: float
    potential: np.ndarray = None

    def __post_init__(self):
        if self.potential is None:
            object.__setattr__(self, "potential",
                               np.zeros(self.field.grid.shape))
        elif self.potential.shape != self.field.grid.shape:
            raise ValueError("potential shape must match the grid")


def rhs(state):
    """Time derivatives (d psi_R/dt, d psi_I/dt) of the split system."""
    grid = state.field.grid
    re, im, v = state.field.re, state.field.im, state.potential
    dre = -0.5 * laplacian(im, grid) + v * im
    dim = 0.5 * laplacian(re, grid) - v * re
    return dre, dim


def _rhs_arrays(re, im, grid, v):
    dre = -0.5 * laplacian(im, grid) + v * im
    dim = 0.5 * laplacian(re, grid) - v * re
    return dre, dim


def _rk4_arrays(re, im, grid, v, dt):
    k1r, k1i = _rhs_arrays(re, im, grid, v)
    k2r, k2i = _rhs_arrays(re + 0.5 * dt * k1r, im + 0.5 * dt * k1i, grid, v)
    k3r, k3i = _rhs_arrays(re + 0.5 * dt * k2r, im + 0.5 * dt * k2i, grid, v)
    k4r, k4i = _rhs_arrays(re + dt * k3r, im + dt * k3i, grid, v)
    re_new = re + (dt / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
    im_new = im + (dt / 6.0) * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
    return re_new, im_new


def rk4_step(state, dt):
    """One classic RK4 step of the coupled 2N-component system."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    grid = state.field.grid
    re, im = _rk4_arrays(state.field.re, state.field.im, grid,
                         state.potential, dt)
    return FdState(field=ComplexField(grid=grid, re=re, im=im),
                   t=state.t + dt, potential=state.potential)


def iterate(state, dt, n_steps):
    """Yield the state after each of n_steps RK4 steps (lazy)."""
    grid = state.field.grid
    re, im = state.field.re, state.field.im
    t, v = state.t, state.potential
    for k in range(n_steps):
        re, im = _rk4_arrays(re, im, grid, v, dt)
        t = state.t + (k + 1) * dt
        yield FdState(field=ComplexField(grid=grid, re=re, im=im),
                      t=t, potential=v)


NORM_TOLERANCE = 1e-6


def propagate(config, initial_field, potential=None, norm_tolerance=NORM_TOLERANCE):
    """Run the configured Schrodinger propagation, returning snapshots.

    Snapshots are recorded at the requested times (snapped to the step
    lattice) plus t_final; each is checked against the norm-drift guard.
    """
    dt = config.dt
    state = FdState(field=initial_field, t=0.0, potential=potential)
    norm0 = core.norm(initial_field)

    wanted = set()
    for t_snap in config.snapshot_times:
        wanted.add(int(round(t_snap / dt)))
    wanted.add(config.n_steps)
    wanted.discard(0)

    snapshots = []
    if 0 in {int(round(t / dt)) for t in config.snapshot_times}:
        snapshots.append((0.0, initial_field))

    for k, st in enumerate(iterate(state, dt, config.n_steps), start=1):
        if k in wanted:
            drift = abs(core.norm(st.field) - norm0)
            if drift > norm_tolerance:
                raise NormDrift(
                    f"norm drift {drift:.3e} at t={st.t:.6g} exceeds "
                    f"{norm_tolerance:.1e} (time step too large for grid?)")
            snapshots.append((st.t, st.field))
    return snapshots
