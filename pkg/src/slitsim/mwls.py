"""Moving weighted least squares derivative estimation on point sets.

Each local fit expands the sampled function in monomials of (r - r0),
ordered by total degree then lexicographically, weights the residual at
each neighbor by 1/sigma_n with Gaussian sigma_n, and solves the normal
equation A^T A a = A^T b. The coefficient vector then directly yields the
fitted value (degree-0 term), gradient (degree-1 terms), and Laplacian
(twice the pure degree-2 terms).

Internally the offsets are rescaled by the mean neighbor distance before
assembling the basis; this is an exact reparametrization of the same
least-squares problem (coefficients are scaled back) that keeps the normal
matrix well-conditioned at high polynomial order. The conditioning
estimate is taken on the scaled system.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import IllConditioned, TooFewPoints

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class DerivativeJet:
    """Local fit output at the expansion point."""

    value: float
    gradient: np.ndarray
    laplacian: float
    condition_estimate: float


def _as_points(points):
    """Point array with shape (n, dim); accepts (n,) as 1D."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return pts


@lru_cache(maxsize=None)
def monomial_exponents(dim, order):
    """Exponent tuples up to total degree `order`, by degree then lexicographic
    (descending power of the first coordinate within a degree)."""
    if dim == 1:
        return tuple((d,) for d in range(order + 1))
    out = []
    for d in range(order + 1):
        for i in range(d, -1, -1):
            out.append((i, d - i))
    return tuple(out)


def select_neighbors(points, r0, n_neighbors):
    """Indices of the n_neighbors points nearest to r0 (ties by index)."""
    pts = _as_points(points)
    if len(pts) < n_neighbors:
        raise TooFewPoints(
            f"requested {n_neighbors} neighbors from {len(pts)} points")
    r0 = np.atleast_1d(np.asarray(r0, dtype=float))
    dist = np.linalg.norm(pts - r0, axis=1)
    return np.argsort(dist, kind="stable")[:n_neighbors]


def gaussian_weights(points, r0, width):
    """Per-point standard errors sigma_n = exp(|r_n - r0|^2 / (2 width^2)).

    Larger sigma means smaller weight, so closer points dominate the fit.
    width="auto" uses the mean distance from r0 to the given points.
    """
    pts = _as_points(points)
    r0 = np.atleast_1d(np.asarray(r0, dtype=float))
    d2 = np.sum((pts - r0) ** 2, axis=1)
    if width == "auto":
        width = np.sqrt(d2).mean()
        if width == 0.0:
            return np.ones_like(d2)
    return np.exp(d2 / (2.0 * width ** 2))


def _design_matrix(offsets, exponents):
    """Vandermonde-style basis matrix P[n, s] = p_s(r_n - r0)."""
    cols = [np.prod(offsets ** np.asarray(e, dtype=float), axis=1)
            for e in exponents]
    return np.column_stack(cols)


def fit(points, values, r0, config, sigma=None):
    """Weighted least-squares coefficients a at expansion point r0.

    `points` are the neighbor locations entering the fit (no further
    selection happens here). Raises IllConditioned when the scaled normal
    matrix has a condition estimate above CONDITION_LIMIT.
    """
    pts = _as_points(points)
    n, dim = pts.shape
    exponents = monomial_exponents(dim, config.poly_order)
    m = len(exponents)
    if n < m:
        raise TooFewPoints(f"{n} points cannot support {m} basis polynomials")

    r0 = np.atleast_1d(np.asarray(r0, dtype=float))
    offsets = pts - r0
    if sigma is None:
        sigma = gaussian_weights(pts, r0, config.weight_width)

    h = np.linalg.norm(offsets, axis=1).mean()
    if h == 0.0:
        h = 1.0
    a_mat = _design_matrix(offsets / h, exponents) / sigma[:, None]
    b = np.asarray(values, dtype=float) / sigma
    gram = a_mat.T @ a_mat

    evals = np.linalg.eigvalsh(gram)
    cond = np.inf if evals[0] <= 0 else evals[-1] / evals[0]
    if cond > CONDITION_LIMIT:
        raise IllConditioned(
            f"normal-equation condition estimate {cond:.3e} exceeds "
            f"{CONDITION_LIMIT:.1e}")

    a_scaled = np.linalg.solve(gram, a_mat.T @ b)
    degrees = np.array([sum(e) for e in exponents], dtype=float)
    return a_scaled / h ** degrees, cond


def jet_from_coefficients(a, cond, dim, order):
    """Extract value / gradient / Laplacian from the coefficient vector."""
    exponents = monomial_exponents(dim, order)
    grad = np.zeros(dim)
    lap = 0.0
    for coeff, e in zip(a, exponents):
        if sum(e) == 1:
            grad[e.index(1)] = coeff
        elif sum(e) == 2 and 2 in e:
            lap += 2.0 * coeff
    return DerivativeJet(value=float(a[0]), gradient=grad,
                         laplacian=float(lap), condition_estimate=float(cond))


def derivative_jet(points, values, r0, config):
    """Value, gradient, and Laplacian of scattered data at r0."""
    pts = _as_points(points)
    values = np.asarray(values, dtype=float)
    idx = select_neighbors(pts, r0, config.n_neighbors)
    neighbors = pts[idx]
    sigma = gaussian_weights(neighbors, r0, config.weight_width)
    a, cond = fit(neighbors, values[idx], r0, config, sigma=sigma)
    return jet_from_coefficients(a, cond, pts.shape[1], config.poly_order)


class JetOperator:
    """Precomputed per-point linear maps from sample values to jets.

    For a fixed point geometry the normal-equation solve is a linear map;
    assembling it once lets many functions (g, v, Q) be differentiated on
    the same points cheaply, and lets a fixed-grid solver reuse the
    factorization across time steps. Jets at different points are
    independent: the whole construction is batched.
    """

    def __init__(self, points, config, targets=None):
        pts = _as_points(points)
        n_pts, dim = pts.shape
        tgt = pts if targets is None else _as_points(targets)
        exponents = monomial_exponents(dim, config.poly_order)
        m = len(exponents)
        nb = config.n_neighbors
        if n_pts < nb:
            raise TooFewPoints(
                f"requested {nb} neighbors from {n_pts} points")

        dist = np.linalg.norm(tgt[:, None, :] - pts[None, :, :], axis=2)
        self.neighbor_idx = np.argsort(dist, axis=1, kind="stable")[:, :nb]
        offsets = pts[self.neighbor_idx] - tgt[:, None, :]   # (nt, nb, dim)
        d2 = np.sum(offsets ** 2, axis=2)

        if config.weight_width == "auto":
            width = np.sqrt(d2).mean(axis=1, keepdims=True)
            width[width == 0.0] = 1.0
        else:
            width = float(config.weight_width)
        sigma = np.exp(d2 / (2.0 * np.asarray(width) ** 2))

        h = np.sqrt(d2).mean(axis=1)
        h[h == 0.0] = 1.0
        scaled = offsets / h[:, None, None]
        basis = np.stack(
            [np.prod(scaled ** np.asarray(e, dtype=float), axis=2)
             for e in exponents], axis=2)                    # (nt, nb, m)
        a_mat = basis / sigma[:, :, None]
        gram = np.einsum("nks,nkt->nst", a_mat, a_mat)

        evals = np.linalg.eigvalsh(gram)
        with np.errstate(divide="ignore"):
            cond = np.where(evals[:, 0] > 0,
                            evals[:, -1] / np.maximum(evals[:, 0], 1e-300),
                            np.inf)
        self.condition_estimates = cond
        if np.any(cond > CONDITION_LIMIT):
            worst = float(np.max(cond[np.isfinite(cond)], initial=np.inf))
            raise IllConditioned(
                f"normal-equation condition estimate {worst:.3e} exceeds "
                f"{CONDITION_LIMIT:.1e} at "
                f"{int(np.sum(cond > CONDITION_LIMIT))} point(s)")

        # solve_map[n, s, k]: scaled coefficient s from neighbor value k
        at_over_sigma = np.transpose(a_mat, (0, 2, 1)) / sigma[:, None, :]
        solve_map = np.linalg.solve(gram, at_over_sigma)

        degrees = np.array([sum(e) for e in exponents], dtype=float)
        unscale = h[:, None] ** -degrees[None, :]
        self._rows = solve_map * unscale[:, :, None]         # (nt, m, nb)
        self._exponents = exponents
        self.dim = dim

    def apply(self, values):
        """Jets for one sampled function: (value, gradient, laplacian) arrays.

        gradient has shape (n_targets, dim).
        """
        vals = np.asarray(values, dtype=float)[self.neighbor_idx]
        coeffs = np.einsum("nsk,nk->ns", self._rows, vals)
        value = coeffs[:, 0]
        grad = np.zeros((len(coeffs), self.dim))
        lap = np.zeros(len(coeffs))
        for s, e in enumerate(self._exponents):
            if sum(e) == 1:
                grad[:, e.index(1)] = coeffs[:, s]
            elif sum(e) == 2 and 2 in e:
                lap += 2.0 * coeffs[:, s]
        return value, grad, lap
