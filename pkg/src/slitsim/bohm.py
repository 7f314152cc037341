"""Bohmian trajectories from numerically propagated fields.

The velocity field is the phase gradient, computed in the branch-free
form (psi_R grad psi_I - psi_I grad psi_R) / (psi_R^2 + psi_I^2) with the
4th-order first-derivative stencils; points whose density falls below
EPS_NODE times the instantaneous peak are masked as undefined. Off-grid
values come from local cubic interpolation, and trajectories are RK4 with
the velocity linearly interpolated in time between adjacent field steps.

A trajectory that runs into a masked (near-node) region fails loudly with
the time of incursion instead of continuing on extrapolated velocities.
"""

from dataclasses import dataclass

import numpy as np

from . import fd_solver
from .analytic import Trajectory
from .core import EPS_NODE, ComplexField
from .errors import MaskedRegion


@dataclass(frozen=True)
class VelocityField:
    """Bohmian velocity sampled on the grid at one instant."""

    grid: object
    t: float
    components: tuple      # one array per axis
    mask: np.ndarray       # True where velocity is undefined (near-node)


def velocity_field(field, t=0.0):
    """Velocity at every grid point with near-node points masked."""
    grid = field.grid
    dens = field.density()
    mask = dens < EPS_NODE * dens.max()
    grad_re = fd_solver.gradient(field.re, grid)
    grad_im = fd_solver.gradient(field.im, grid)
    safe = np.where(mask, 1.0, dens)
    comps = tuple(
        np.where(mask, np.nan,
                 (field.re * gi - field.im * gr) / safe)
        for gr, gi in zip(grad_re, grad_im))
    return VelocityField(grid=grid, t=t, components=comps, mask=mask)


def _lagrange_eval(xs, ys, x):
    """Value at x of the Lagrange polynomial through (xs, ys)."""
    total = 0.0
    for j in range(len(xs)):
        lj = 1.0
        for k in range(len(xs)):
            if k != j:
                lj *= (x - xs[k]) / (xs[j] - xs[k])
        total += ys[j] * lj
    return total


def _interp_1d_line(values, mask, grid, x):
    """Cubic interpolation along a 1D array with near-node masking.

    Uses the 4 nearest grid points; if the nominal stencil is majority
    masked, or fewer than 4 unmasked points exist among the 6 nearest,
    raises MaskedRegion. A minority of masked points is replaced by the
    nearest unmasked ones.
    """
    base = _axis_nodes_1d(grid, x)
    idx = np.arange(base, base + 4)
    masked = mask[idx]
    if masked.sum() >= 3:
        raise MaskedRegion(f"interpolation stencil majority-masked at {x:.4g}")
    if masked.any():
        lo = max(base - 1, 0)
        hi = min(base + 5, grid.n)
        window = np.arange(lo, hi)
        window = window[~mask[window]]
        if len(window) < 4:
            raise MaskedRegion(
                f"fewer than 4 unmasked points near {x:.4g}")
        coords = grid.lo + window * grid.delta
        order = np.argsort(np.abs(coords - x), kind="stable")[:4]
        idx = np.sort(window[order])
    xs = grid.lo + idx * grid.delta
    return _lagrange_eval(xs, values[idx], x)


def _axis_nodes_1d(grid, x):
    i = int(np.floor((x - grid.lo) / grid.delta))
    return min(max(i - 1, 0), grid.n - 4)


def interpolate_velocity(vf, point):
    """Velocity vector at an off-grid point by local cubic interpolation."""
    grid = vf.grid
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    if not np.all((pt >= grid.lo) & (pt <= grid.hi)):
        raise ValueError(f"point {pt} outside the grid")
    if grid.dim == 1:
        x = pt[0]
        return np.array([
            _interp_1d_line(vf.components[0], vf.mask, grid, x)])

    # 2D: separable pass, rows (axis 0) chosen around y1, each row
    # interpolated along axis 1 with its own mask handling.
    y1, y2 = pt
    base1 = _axis_nodes_1d(grid, y1)
    rows = np.arange(base1, base1 + 4)
    if vf.mask[rows].all(axis=1).sum() >= 3:
        raise MaskedRegion(f"interpolation stencil majority-masked at {pt}")
    xs1 = grid.lo + rows * grid.delta
    out = np.empty(2)
    for c, comp in enumerate(vf.components):
        row_vals = np.array([
            _interp_1d_line(comp[r], vf.mask[r], grid, y2) for r in rows])
        out[c] = _lagrange_eval(xs1, row_vals, y1)
    return out


class FdFieldProvider:
    """Velocity fields on the solver's time lattice, computed lazily.

    Steps the finite-difference solver one dt at a time and caches the
    velocity fields at the two most recent lattice times, which is all the
    time-interpolation scheme needs.
    """

    def __init__(self, initial_field, dt, n_steps, potential=None):
        self.dt = dt
        self.n_steps = n_steps
        state = fd_solver.FdState(field=initial_field, t=0.0,
                                  potential=potential)
        self._iter = fd_solver.iterate(state, dt, n_steps)
        self._cache = {0: velocity_field(initial_field, 0.0)}
        self._fields = {0: initial_field}
        self._last = 0

    def field_at(self, k):
        self.at(k)
        return self._fields[k]

    def at(self, k):
        """VelocityField at lattice index k (k*dt)."""
        if k > self.n_steps:
            raise IndexError(f"lattice index {k} beyond the run")
        while self._last < k:
            st = next(self._iter)
            self._last += 1
            self._cache[self._last] = velocity_field(st.field, st.t)
            self._fields[self._last] = st.field
            for old in [i for i in self._cache if i < self._last - 1]:
                del self._cache[old]
                del self._fields[old]
        if k not in self._cache:
            raise IndexError(
                f"lattice index {k} no longer cached (monotone access only)")
        return self._cache[k]


def _rk4_point(r, dt, va, vb):
    """One RK4 step with linear-in-time velocity interpolation."""
    def mid(p):
        return 0.5 * (interpolate_velocity(va, p)
                      + interpolate_velocity(vb, p))

    f1 = interpolate_velocity(va, r)
    f2 = mid(r + 0.5 * dt * f1)
    f3 = mid(r + 0.5 * dt * f2)
    f4 = interpolate_velocity(vb, r + dt * f3)
    return r + (dt / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)


def integrate_family(provider, starts, provenance="fd",
                     snapshot_indices=()):
    """Integrate several trajectories in one pass over the field lattice.

    Returns (results, fields) where results is a list of
    (Trajectory, incursion_time_or_None) pairs -- a trajectory that runs
    into a masked region is truncated at the incursion time rather than
    aborting the whole family -- and fields maps each requested snapshot
    index to its ComplexField.
    """
    dt = provider.dt
    n = provider.n_steps
    snapshot_indices = set(snapshot_indices)
    fields = {}
    if 0 in snapshot_indices:
        fields[0] = provider.field_at(0)

    rs = [np.atleast_1d(np.asarray(s, dtype=float)).copy() for s in starts]
    paths = [[r.copy()] for r in rs]
    incursion = [None] * len(rs)

    for k in range(n):
        va = provider.at(k)
        vb = provider.at(k + 1)
        for j, r in enumerate(rs):
            if incursion[j] is not None:
                continue
            try:
                rs[j] = _rk4_point(r, dt, va, vb)
                paths[j].append(rs[j].copy())
            except MaskedRegion:
                incursion[j] = k * dt
        if k + 1 in snapshot_indices:
            fields[k + 1] = provider.field_at(k + 1)

    results = []
    for j, path in enumerate(paths):
        times = np.arange(len(path)) * dt
        results.append((Trajectory(times=times,
                                   positions=np.array(path),
                                   provenance=provenance), incursion[j]))
    return results, fields


def integrate_trajectory(provider, start, t0=0.0, t1=None, dt=None,
                         provenance="fd"):
    """RK4 integration of dr/dt = v(r, t) against a lattice field provider.

    The velocity at RK4 substage times is linearly interpolated between
    the two adjacent lattice velocity fields. Raises MaskedRegion (with
    the incursion time) if the path enters a near-node region.
    """
    dt = provider.dt if dt is None else dt
    if abs(dt - provider.dt) > 1e-15:
        raise ValueError("trajectory dt must match the field lattice")
    t1 = provider.n_steps * provider.dt if t1 is None else t1
    k0 = int(round(t0 / dt))
    k1 = int(round(t1 / dt))

    r = np.atleast_1d(np.asarray(start, dtype=float)).copy()
    times = [k0 * dt]
    positions = [r.copy()]
    for k in range(k0, k1):
        va = provider.at(k)
        vb = provider.at(k + 1)
        try:
            r = _rk4_point(r, dt, va, vb)
        except MaskedRegion as exc:
            raise MaskedRegion(
                f"trajectory entered a node region at t={k * dt:.6g}: {exc}",
                t=k * dt) from exc
        times.append((k + 1) * dt)
        positions.append(r.copy())
    return Trajectory(times=np.array(times), positions=np.array(positions),
                      provenance=provenance)


@dataclass(frozen=True)
class CrossingReport:
    """Order-preservation / coincidence check over a trajectory family."""

    violations: tuple      # (time, index_a, index_b) triples
    n_trajectories: int

    @property
    def ok(self):
        return not self.violations


def crossing_report(trajectories, min_separation=0.0):
    """Check the no-crossing property over a family of trajectories.

    1D: trajectories sorted by initial position must preserve their order
    at every recorded time. 2D: no two trajectories may come within
    min_separation of the same configuration point at the same time.
    """
    if not trajectories:
        return CrossingReport(violations=(), n_trajectories=0)
    t0 = trajectories[0].times
    for tr in trajectories:
        if len(tr.times) != len(t0) or np.any(tr.times != t0):
            raise ValueError("trajectories must share a time lattice")

    violations = []
    if trajectories[0].dim == 1:
        pos = np.stack([tr.positions[:, 0] for tr in trajectories], axis=1)
        order = np.argsort(pos[0], kind="stable")
        pos = pos[:, order]
        for it, t in enumerate(t0):
            bad = np.nonzero(np.diff(pos[it]) <= 0)[0]
            for b in bad:
                violations.append((float(t), int(order[b]),
                                   int(order[b + 1])))
    else:
        n = len(trajectories)
        for it, t in enumerate(t0):
            pts = np.stack([tr.positions[it] for tr in trajectories])
            for a in range(n):
                for b in range(a + 1, n):
                    if np.linalg.norm(pts[a] - pts[b]) <= min_separation:
                        violations.append((float(t), a, b))
    return CrossingReport(violations=tuple(violations),
                          n_trajectories=len(trajectories))
